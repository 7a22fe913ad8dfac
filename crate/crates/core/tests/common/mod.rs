#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dialect_bench::kernel::{self, DocProfiles, GramMatrix, KernelConfig, DEFAULT_HASH_SEED};
use dialect_bench::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every length-`n` character window of `s`, with multiplicity.
pub fn windows(s: &str, n: usize) -> BTreeMap<String, u64> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = BTreeMap::new();
    if n > 0 && chars.len() >= n {
        for w in chars.windows(n) {
            *out.entry(w.iter().collect::<String>()).or_insert(0) += 1;
        }
    }
    out
}

pub fn presence_oracle(s: &str, t: &str, n: usize) -> u64 {
    let a: BTreeSet<String> = windows(s, n).into_keys().collect();
    let b: BTreeSet<String> = windows(t, n).into_keys().collect();
    a.intersection(&b).count() as u64
}

pub fn intersection_oracle(s: &str, t: &str, n: usize) -> u64 {
    let b = windows(t, n);
    windows(s, n).iter().map(|(g, &c)| c.min(*b.get(g).unwrap_or(&0))).sum()
}

/// Unnormalized presence kernel over a range of lengths, from substrings.
pub fn presence_range_oracle(s: &str, t: &str, lo: usize, hi: usize) -> u64 {
    (lo..=hi).map(|n| presence_oracle(s, t, n)).sum()
}

pub fn profiles(texts: &[String], cfg: &KernelConfig) -> Vec<DocProfiles> {
    let docs: Vec<(String, &str)> = texts.iter().enumerate().map(|(i, t)| (format!("d{i}"), t.as_str())).collect();
    kernel::profile_documents(docs.iter().map(|(i, t)| (i.as_str(), *t)), cfg, DEFAULT_HASH_SEED).unwrap()
}

pub fn gram(texts: &[String], cfg: &KernelConfig) -> GramMatrix<f64> {
    let p = profiles(texts, cfg);
    kernel::gram_matrix(&p, &p, cfg).unwrap()
}

pub fn to_na(m: &Matrix<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn min_eigenvalue(m: &Matrix<f64>) -> f64 {
    let na = to_na(m);
    nalgebra::SymmetricEigen::new(na).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `B Bᵀ + c I` for a random `B`: symmetric positive definite.
pub fn random_spd(rng: &mut impl Rng, dim: usize) -> Matrix<f64> {
    let b: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut a = Matrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            a[(i, j)] = (0..dim).map(|k| b[i * dim + k] * b[j * dim + k]).sum::<f64>();
        }
        a[(i, i)] += 0.1;
    }
    a
}

/// Solves `(K + λI) x = y` with nalgebra's LU, independently of the crate.
pub fn lu_solve(k: &Matrix<f64>, lambda: f64, y: &[f64]) -> Vec<f64> {
    let mut a = to_na(k);
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    let x = a.lu().solve(&nalgebra::DVector::from_column_slice(y)).expect("nonsingular");
    x.iter().copied().collect()
}

pub fn residual(k: &Matrix<f64>, lambda: f64, x: &[f64], y: &[f64]) -> f64 {
    let kx = k.mul_vec(x);
    kx.iter().zip(x).zip(y).map(|((a, b), c)| (a + lambda * b - c).powi(2)).sum::<f64>().sqrt()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
