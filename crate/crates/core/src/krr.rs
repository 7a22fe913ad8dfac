//! Kernel ridge regression in the dual.
//!
//! Training solves `(K + λI) α = y` once per class with ±1 targets
//! (one-vs-rest for more than two classes, a single system for binary
//! tasks). The factorization of `K + λI` is shared by all classes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eval;
use crate::kernel::{self, DocProfiles, GramMatrix, KernelConfig, KernelKind, Vocabulary};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DualModel<T> {
    pub classes: Vec<String>,
    /// A single vector (positive class `classes[0]`) for binary models,
    /// otherwise one vector per class.
    pub alphas: Vec<Vec<T>>,
    pub lambda: T,
    pub kernel_cfg: KernelConfig,
    pub train_refs: Vec<String>,
    pub hash_seed: u64,
    pub corpus_checksum: Option<String>,
    /// Diagonal jitter the factorization needed, zero when none.
    pub jitter: T,
}

impl<T: Scalar> DualModel<T> {
    pub fn is_binary(&self) -> bool {
        self.alphas.len() == 1 && self.classes.len() == 2
    }

    /// Per-class dual coefficients; the negative class of a binary model
    /// gets the negated vector.
    pub fn class_alphas(&self, class: usize) -> Vec<T> {
        if self.is_binary() && class == 1 {
            self.alphas[0].iter().map(|&a| -a).collect()
        } else {
            self.alphas[class].clone()
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut m = self.clone();
        for a in m.alphas.iter_mut().flatten() {
            *a = *a * factor;
        }
        m
    }
}

fn check_system<T: Scalar>(k: &GramMatrix<T>, n_targets: usize, lambda: T) -> Result<()> {
    if !k.values.is_square() || !k.symmetric {
        return Err(Error::Dimension(format!(
            "training kernel must be symmetric and square, got {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    if n_targets != k.rows() {
        return Err(Error::Dimension(format!("{n_targets} labels for a {}x{} kernel", k.rows(), k.cols())));
    }
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::Invalid(format!("lambda must be > 0, got {lambda}")));
    }
    Ok(())
}

fn factor<T: Scalar>(k: &GramMatrix<T>, lambda: T) -> Result<Cholesky<T>> {
    Cholesky::factor_with_jitter(&k.values.shifted(lambda))
}

fn model<T: Scalar>(k: &GramMatrix<T>, classes: Vec<String>, alphas: Vec<Vec<T>>, lambda: T, jitter: T) -> DualModel<T> {
    DualModel {
        classes,
        alphas,
        lambda,
        kernel_cfg: k.config,
        train_refs: k.row_refs.clone(),
        hash_seed: kernel::DEFAULT_HASH_SEED,
        corpus_checksum: None,
        jitter,
    }
}

/// Fits a binary model from ±1 targets. Class `"+1"` is the positive class.
pub fn fit_binary<T: Scalar>(k: &GramMatrix<T>, labels: &[T], lambda: T) -> Result<DualModel<T>> {
    check_system(k, labels.len(), lambda)?;
    if let Some(bad) = labels.iter().find(|&&y| y != T::one() && y != -T::one()) {
        return Err(Error::Invalid(format!("binary targets must be +1 or -1, got {bad}")));
    }
    let chol = factor(k, lambda)?;
    let alpha = chol.solve(labels)?;
    Ok(model(k, vec!["+1".into(), "-1".into()], vec![alpha], lambda, chol.jitter()))
}

/// One-vs-rest fit: class `c` gets targets +1 on its members and -1
/// elsewhere. `labels[i]` indexes into `classes`.
pub fn fit_multiclass<T: Scalar>(
    k: &GramMatrix<T>,
    labels: &[usize],
    classes: &[String],
    lambda: T,
) -> Result<DualModel<T>> {
    check_system(k, labels.len(), lambda)?;
    if classes.len() < 2 {
        return Err(Error::Invalid("need at least two classes".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
        return Err(Error::Invalid(format!("label index {bad} out of range")));
    }
    if let Some(absent) = (0..classes.len()).find(|c| !labels.contains(c)) {
        return Err(Error::Invalid(format!("class {} is absent from training", classes[absent])));
    }
    let chol = factor(k, lambda)?;
    let alphas = (0..classes.len())
        .map(|c| {
            let y: Vec<T> = labels.iter().map(|&l| if l == c { T::one() } else { -T::one() }).collect();
            chol.solve(&y)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(model(k, classes.to_vec(), alphas, lambda, chol.jitter()))
}

/// Binary fit when there are two classes (`classes[0]` positive), one-vs-rest
/// otherwise.
pub fn fit<T: Scalar>(k: &GramMatrix<T>, labels: &[usize], classes: &[String], lambda: T) -> Result<DualModel<T>> {
    if classes.len() == 2 {
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Invalid(format!("label index {bad} out of range")));
        }
        let y: Vec<T> = labels.iter().map(|&l| if l == 0 { T::one() } else { -T::one() }).collect();
        let mut m = fit_binary(k, &y, lambda)?;
        m.classes = classes.to_vec();
        Ok(m)
    } else {
        fit_multiclass(k, labels, classes, lambda)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    /// Index into the model's classes, per test row.
    pub labels: Vec<usize>,
    /// `rows x classes` scores.
    pub scores: Matrix<T>,
}

/// Index of the largest value; the first one wins ties.
pub fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub fn predict<T: Scalar>(model: &DualModel<T>, k_test: &GramMatrix<T>) -> Result<Prediction<T>> {
    if k_test.col_refs != model.train_refs {
        return Err(Error::Mismatch("test kernel columns do not match the model's training documents".into()));
    }
    let n_classes = model.classes.len();
    let mut scores = Matrix::zeros(k_test.rows(), n_classes);
    for (c, alpha) in model.alphas.iter().enumerate() {
        let f = k_test.values.mul_vec(alpha);
        for (i, v) in f.into_iter().enumerate() {
            scores[(i, c)] = v;
            if model.is_binary() {
                scores[(i, 1)] = -v;
            }
        }
    }
    let labels = (0..k_test.rows()).map(|i| argmax(scores.row(i))).collect();
    Ok(Prediction { labels, scores })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSpace {
    Raw,
    Normalized,
}

/// Explicit n-gram weights of one class scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalWeights<T> {
    pub class: String,
    pub weights: BTreeMap<u64, T>,
    pub feature_space: FeatureSpace,
    pub kernel_cfg: KernelConfig,
}

impl<T: Scalar> PrimalWeights<T> {
    /// Linear score of a document: `Σ_s w[s] φ_s(x)`.
    pub fn score(&self, doc: &DocProfiles) -> Result<T> {
        let scale = feature_scale(doc, &self.kernel_cfg, self.feature_space);
        let mut total = T::zero();
        for n in self.kernel_cfg.lengths() {
            let p = doc
                .presence_at(n)
                .ok_or_else(|| Error::Invalid(format!("document {} lacks length {n}", doc.doc_ref)))?;
            for fp in &p.grams {
                if let Some(&w) = self.weights.get(fp) {
                    total = total + w;
                }
            }
        }
        Ok(total * scale)
    }
}

fn feature_scale<T: Scalar>(doc: &DocProfiles, cfg: &KernelConfig, space: FeatureSpace) -> T {
    match space {
        FeatureSpace::Raw => T::one(),
        FeatureSpace::Normalized => match doc.self_value(cfg) {
            0 => T::zero(),
            v => T::one() / T::of_count(v).sqrt(),
        },
    }
}

/// Recovers `w_c[s] = Σ_i α_{c,i} φ_s(x_i)` for every class.
pub fn extract_primal_weights<T: Scalar>(
    model: &DualModel<T>,
    train_profiles: &[DocProfiles],
) -> Result<Vec<PrimalWeights<T>>> {
    let cfg = model.kernel_cfg;
    if cfg.kind != KernelKind::Presence {
        return Err(Error::Unsupported("primal weights are only defined for the presence kernel".into()));
    }
    let by_ref: BTreeMap<&str, &DocProfiles> = train_profiles.iter().map(|d| (d.doc_ref.as_str(), d)).collect();
    let docs = model
        .train_refs
        .iter()
        .map(|r| by_ref.get(r.as_str()).copied().ok_or_else(|| Error::Invalid(format!("no profile for training document {r}"))))
        .collect::<Result<Vec<_>>>()?;
    let space = if cfg.normalize { FeatureSpace::Normalized } else { FeatureSpace::Raw };
    let scales: Vec<T> = docs.iter().map(|d| feature_scale(d, &cfg, space)).collect();

    let mut base: BTreeMap<u64, T> = BTreeMap::new();
    let mut per_class = Vec::new();
    for alphas in &model.alphas {
        base.clear();
        for ((doc, &a), &scale) in docs.iter().zip(alphas).zip(&scales) {
            let coef = a * scale;
            for n in cfg.lengths() {
                let p = doc
                    .presence_at(n)
                    .ok_or_else(|| Error::Invalid(format!("document {} lacks length {n}", doc.doc_ref)))?;
                for &fp in &p.grams {
                    let w = base.entry(fp).or_insert_with(T::zero);
                    *w = *w + coef;
                }
            }
        }
        per_class.push(base.clone());
    }
    let weights = if model.is_binary() {
        let neg = per_class[0].iter().map(|(&k, &v)| (k, -v)).collect();
        vec![per_class.remove(0), neg]
    } else {
        per_class
    };
    Ok(model
        .classes
        .iter()
        .zip(weights)
        .map(|(class, weights)| PrimalWeights { class: class.clone(), weights, feature_space: space, kernel_cfg: cfg })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopFeatures<T> {
    pub items: Vec<(String, T)>,
    /// Set when fewer than `k` features had the requested sign.
    pub exhausted: bool,
}

/// The `k` largest (or most negative) weights, resolved to their n-gram
/// strings. Equal weights are ordered lexicographically.
pub fn top_features<T: Scalar>(
    weights: &PrimalWeights<T>,
    k: usize,
    direction: Direction,
    vocab: &Vocabulary,
) -> Result<TopFeatures<T>> {
    let mut items = Vec::new();
    for (&fp, &w) in &weights.weights {
        let keep = match direction {
            Direction::Positive => w > T::zero(),
            Direction::Negative => w < T::zero(),
        };
        if keep {
            let gram = vocab
                .get(fp)
                .ok_or_else(|| Error::Invalid(format!("fingerprint {fp:016x} missing from the vocabulary")))?;
            items.push((gram.to_string(), w));
        }
    }
    items.sort_by(|a, b| {
        let by_weight = match direction {
            Direction::Positive => b.1.partial_cmp(&a.1),
            Direction::Negative => a.1.partial_cmp(&b.1),
        };
        by_weight.unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.0.cmp(&b.0))
    });
    let exhausted = items.len() < k;
    items.truncate(k);
    Ok(TopFeatures { items, exhausted })
}

/// Makes whitespace visible: space becomes `␣`, tab and newline are escaped.
pub fn escape_visible(gram: &str) -> String {
    gram.chars()
        .map(|c| match c {
            ' ' => "␣".to_string(),
            '\t' => "\\t".to_string(),
            '\n' => "\\n".to_string(),
            c => c.to_string(),
        })
        .collect()
}

/// `class<TAB>rank<TAB>ngram<TAB>weight` lines, ranks starting at 1.
pub fn feature_report<T: Scalar>(rows: &[(String, TopFeatures<T>)]) -> String {
    let mut out = String::new();
    for (class, top) in rows {
        for (rank, (gram, w)) in top.items.iter().enumerate() {
            out.push_str(&format!("{class}\t{}\t{}\t{}\n", rank + 1, escape_visible(gram), w));
        }
    }
    out
}

/// A document with a class index, as consumed by [`tune`].
#[derive(Debug, Clone, Copy)]
pub struct Labeled<'a> {
    pub id: &'a str,
    pub text: &'a str,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunePoint {
    pub n: usize,
    pub lambda: f64,
    pub accuracy: Option<f64>,
    pub weighted_f1: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub grid: Vec<TunePoint>,
    pub best: (usize, f64),
}

/// Grid search over single n-gram lengths and λ values, scored by validation
/// accuracy. Ties prefer the smaller `n`, then the larger λ.
///
/// Profiles are built once for the whole length range and each Gram matrix
/// once per length.
pub fn tune<T: Scalar>(
    train: &[Labeled<'_>],
    validation: &[Labeled<'_>],
    classes: &[String],
    n_grid: &[usize],
    lambda_grid: &[f64],
    base: KernelConfig,
    hash_seed: u64,
) -> Result<TuneResult> {
    if n_grid.is_empty() || lambda_grid.is_empty() {
        return Err(Error::Invalid("tuning grids must be non-empty".into()));
    }
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Invalid("tuning needs training and validation documents".into()));
    }
    let train_ids: std::collections::HashSet<&str> = train.iter().map(|d| d.id).collect();
    if validation.iter().any(|d| train_ids.contains(d.id)) {
        return Err(Error::Invalid("validation documents overlap the training set".into()));
    }
    let lo = *n_grid.iter().min().unwrap();
    let hi = *n_grid.iter().max().unwrap();
    let range = base.with_range(lo, hi);
    let tp = kernel::profile_documents(train.iter().map(|d| (d.id, d.text)), &range, hash_seed)?;
    let vp = kernel::profile_documents(validation.iter().map(|d| (d.id, d.text)), &range, hash_seed)?;
    let labels: Vec<usize> = train.iter().map(|d| d.label).collect();
    let gold: Vec<usize> = validation.iter().map(|d| d.label).collect();

    let mut grid = Vec::new();
    for &n in n_grid {
        let cfg = base.with_range(n, n);
        let k: GramMatrix<T> = kernel::gram_matrix(&tp, &tp, &cfg)?;
        let kv: GramMatrix<T> = kernel::gram_matrix(&vp, &tp, &cfg)?;
        for &lambda in lambda_grid {
            let point = fit(&k, &labels, classes, T::of(lambda)).and_then(|m| predict(&m, &kv)).and_then(|p| {
                let conf = eval::confusion_indices(&gold, &p.labels, classes.len())?;
                eval::metrics::<f64>(&conf)
            });
            grid.push(match point {
                Ok(m) => TunePoint { n, lambda, accuracy: Some(m.accuracy), weighted_f1: Some(m.weighted_f1), error: None },
                Err(e) => TunePoint { n, lambda, accuracy: None, weighted_f1: None, error: Some(e.to_string()) },
            });
        }
    }
    let best = grid
        .iter()
        .filter_map(|p| p.accuracy.map(|a| (a, p)))
        .max_by(|(a, p), (b, q)| {
            a.partial_cmp(b)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(q.n.cmp(&p.n))
                .then(p.lambda.partial_cmp(&q.lambda).unwrap_or(std::cmp::Ordering::Equal))
        })
        .map(|(_, p)| (p.n, p.lambda))
        .ok_or_else(|| Error::Invalid("every grid point failed to fit".into()))?;
    Ok(TuneResult { grid, best })
}

pub const MODEL_FORMAT: &str = "dialect-bench-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    classes: Vec<String>,
    binary: bool,
    lambda: f64,
    kernel: KernelConfig,
    hash_seed: u64,
    jitter: f64,
    corpus_checksum: Option<String>,
    train_refs: Vec<String>,
    alphas: Vec<Vec<f64>>,
    meta: BTreeMap<String, String>,
}

/// Serializes the model (plus free-form metadata such as the task id) as a
/// versioned JSON document.
pub fn model_to_json<T: Scalar>(model: &DualModel<T>, meta: &BTreeMap<String, String>) -> String {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        classes: model.classes.clone(),
        binary: model.is_binary(),
        lambda: model.lambda.as_f64(),
        kernel: model.kernel_cfg,
        hash_seed: model.hash_seed,
        jitter: model.jitter.as_f64(),
        corpus_checksum: model.corpus_checksum.clone(),
        train_refs: model.train_refs.clone(),
        alphas: model.alphas.iter().map(|a| a.iter().map(|v| v.as_f64()).collect()).collect(),
        meta: meta.clone(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

pub fn model_from_json<T: Scalar>(text: &str) -> Result<(DualModel<T>, BTreeMap<String, String>)> {
    let f: ModelFile = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("model file: {e}")))?;
    if f.format != MODEL_FORMAT || f.version != MODEL_VERSION {
        return Err(Error::Invalid(format!("unsupported model format {} v{}", f.format, f.version)));
    }
    let expected = if f.binary { 1 } else { f.classes.len() };
    if f.alphas.len() != expected || f.alphas.iter().any(|a| a.len() != f.train_refs.len()) {
        return Err(Error::Invalid("model file: coefficient shape does not match classes/refs".into()));
    }
    let model = DualModel {
        classes: f.classes,
        alphas: f.alphas.into_iter().map(|a| a.into_iter().map(T::of).collect()).collect(),
        lambda: T::of(f.lambda),
        kernel_cfg: f.kernel,
        train_refs: f.train_refs,
        hash_seed: f.hash_seed,
        corpus_checksum: f.corpus_checksum,
        jitter: T::of(f.jitter),
    };
    Ok((model, f.meta))
}

pub fn save_model<T: Scalar>(model: &DualModel<T>, meta: &BTreeMap<String, String>, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model, meta)).map_err(|e| Error::io(path, e))
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<(DualModel<T>, BTreeMap<String, String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{gram_matrix, DEFAULT_HASH_SEED};

    fn gram(rows: &[Vec<f64>]) -> GramMatrix<f64> {
        GramMatrix::from_matrix(Matrix::from_rows(rows).unwrap(), None).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn identity_kernel() {
        let k = gram(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let m = fit_binary(&k, &[1.0, -1.0], 1e-12).unwrap();
        assert!(close(&m.alphas[0], &[1.0, -1.0], 1e-10));
        let m = fit_binary(&k, &[1.0, -1.0], 1.0).unwrap();
        assert!(close(&m.alphas[0], &[0.5, -0.5], 1e-15));
    }

    #[test]
    fn two_by_two_against_inverse() {
        // (K + 0.5 I) = [[2.5, 1], [1, 2.5]], inverse = [[2.5, -1], [-1, 2.5]] / 5.25
        let k = gram(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let m = fit_binary(&k, &[1.0, -1.0], 0.5).unwrap();
        let inv = [[2.5 / 5.25, -1.0 / 5.25], [-1.0 / 5.25, 2.5 / 5.25]];
        let oracle = [inv[0][0] - inv[0][1], inv[1][0] - inv[1][1]];
        assert!(close(&m.alphas[0], &oracle, 1e-12));
        assert!(close(&m.alphas[0], &[2.0 / 3.0, -2.0 / 3.0], 1e-12));
    }

    #[test]
    fn fit_errors() {
        let k = gram(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(fit_binary(&k, &[1.0], 1.0), Err(Error::Dimension(_))));
        assert!(fit_binary(&k, &[1.0, -1.0], 0.0).is_err());
        assert!(fit_binary(&k, &[1.0, 0.5], 1.0).is_err());
        let rect = GramMatrix::from_matrix(Matrix::<f64>::zeros(2, 3), None).unwrap();
        assert!(fit_binary(&rect, &[1.0, -1.0], 1.0).is_err());
        let indefinite = gram(&[vec![0.0, 5.0], vec![5.0, 0.0]]);
        assert!(matches!(fit_binary(&indefinite, &[1.0, -1.0], 1.0), Err(Error::Factorization { .. })));
    }

    #[test]
    fn multiclass_identity() {
        let k = gram(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let classes: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let m = fit_multiclass(&k, &[0, 1, 2], &classes, 1.0).unwrap();
        assert!(close(&m.alphas[0], &[0.5, -0.5, -0.5], 1e-15));
        assert!(close(&m.alphas[2], &[-0.5, -0.5, 0.5], 1e-15));
        assert!(fit_multiclass(&k, &[0, 0, 1], &classes, 1.0).unwrap_err().to_string().contains("absent"));
    }

    #[test]
    fn two_class_ovr_matches_binary() {
        let k = gram(&[vec![2.0, 1.0, 0.5], vec![1.0, 2.0, 0.2], vec![0.5, 0.2, 1.5]]);
        let classes: Vec<String> = ["p", "n"].map(String::from).to_vec();
        let ovr = fit_multiclass(&k, &[0, 1, 0], &classes, 0.3).unwrap();
        let bin = fit(&k, &[0, 1, 0], &classes, 0.3).unwrap();
        assert!(bin.is_binary());
        let a = predict(&ovr, &k).unwrap();
        let b = predict(&bin, &k).unwrap();
        for i in 0..3 {
            assert!((a.scores[(i, 0)] - b.scores[(i, 0)]).abs() < 1e-12);
            assert!((a.scores[(i, 1)] + b.scores[(i, 0)]).abs() < 1e-12);
        }
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn zero_row_ties_to_first_class() {
        let k = gram(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let m = fit_binary(&k, &[1.0, -1.0], 1.0).unwrap();
        let test = GramMatrix::from_matrix(
            Matrix::from_rows(&[vec![0.0, 0.0]]).unwrap(),
            Some((vec!["t".into()], vec!["0".into(), "1".into()])),
        )
        .unwrap();
        let p = predict(&m, &test).unwrap();
        assert_eq!(p.labels, vec![0]);
        assert_eq!(p.scores.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn predict_rejects_ref_mismatch() {
        let k = gram(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let m = fit_binary(&k, &[1.0, -1.0], 1.0).unwrap();
        let test = GramMatrix::from_matrix(
            Matrix::from_rows(&[vec![0.0, 0.0]]).unwrap(),
            Some((vec!["t".into()], vec!["x".into(), "y".into()])),
        )
        .unwrap();
        assert!(matches!(predict(&m, &test), Err(Error::Mismatch(_))));
    }

    fn docs(texts: &[&str], n: usize) -> Vec<DocProfiles> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| DocProfiles::build(&format!("d{i}"), t, n, n, DEFAULT_HASH_SEED))
            .collect()
    }

    fn vocab(texts: &[&str], n: usize) -> Vocabulary {
        let mut v = Vocabulary::new(DEFAULT_HASH_SEED);
        for t in texts {
            v.observe(t, n..=n);
        }
        v
    }

    #[test]
    fn primal_weights_single_doc() {
        let d = docs(&["ab"], 1);
        let cfg = KernelConfig::presence(1).with_normalize(false);
        let k: GramMatrix<f64> = gram_matrix(&d, &d, &cfg).unwrap();
        let mut m = fit_binary(&k, &[1.0], 1.0).unwrap();
        m.alphas[0] = vec![0.5];
        let w = extract_primal_weights(&m, &d).unwrap();
        let v = vocab(&["ab"], 1);
        let top = top_features(&w[0], 5, Direction::Positive, &v).unwrap();
        assert_eq!(top.items, vec![("a".to_string(), 0.5), ("b".to_string(), 0.5)]);
        assert!(top.exhausted);
    }

    #[test]
    fn primal_weights_disjoint_docs() {
        let texts = ["xy", "uv"];
        let d = docs(&texts, 1);
        let cfg = KernelConfig::presence(1).with_normalize(false);
        let k: GramMatrix<f64> = gram_matrix(&d, &d, &cfg).unwrap();
        let mut m = fit_binary(&k, &[1.0, -1.0], 1.0).unwrap();
        m.alphas[0] = vec![1.0, -1.0];
        let w = extract_primal_weights(&m, &d).unwrap();
        let v = vocab(&texts, 1);
        let pos = top_features(&w[0], 5, Direction::Positive, &v).unwrap();
        let neg = top_features(&w[0], 5, Direction::Negative, &v).unwrap();
        assert_eq!(pos.items, vec![("x".into(), 1.0), ("y".into(), 1.0)]);
        assert_eq!(neg.items, vec![("u".into(), -1.0), ("v".into(), -1.0)]);
        // the negative class scorer is the mirror image
        assert_eq!(top_features(&w[1], 5, Direction::Positive, &v).unwrap().items, neg.items.iter().map(|(g, x)| (g.clone(), -x)).collect::<Vec<_>>());
    }

    #[test]
    fn intersection_has_no_primal_weights() {
        let d = docs(&["ab", "cd"], 1);
        let cfg = KernelConfig::presence(1).with_kind(KernelKind::Intersection);
        let k: GramMatrix<f64> = gram_matrix(&d, &d, &cfg).unwrap();
        let m = fit_binary(&k, &[1.0, -1.0], 1.0).unwrap();
        assert!(matches!(extract_primal_weights(&m, &d), Err(Error::Unsupported(_))));
        assert!(extract_primal_weights(&fit_binary(&gram_matrix(&d, &d, &KernelConfig::presence(1)).unwrap(), &[1.0, -1.0], 1.0).unwrap(), &d[..1]).is_err());
    }

    #[test]
    fn top_features_ordering() {
        let mut v = Vocabulary::new(DEFAULT_HASH_SEED);
        v.observe("abc", 1..=1);
        let fp = |c: char| kernel::fingerprint(&[c], DEFAULT_HASH_SEED);
        let w = PrimalWeights {
            class: "x".into(),
            weights: [(fp('a'), 3.0), (fp('b'), -1.0), (fp('c'), 2.0)].into_iter().collect(),
            feature_space: FeatureSpace::Raw,
            kernel_cfg: KernelConfig::presence(1),
        };
        let pos = top_features(&w, 2, Direction::Positive, &v).unwrap();
        assert_eq!(pos.items, vec![("a".into(), 3.0), ("c".into(), 2.0)]);
        assert!(!pos.exhausted);
        let neg = top_features(&w, 2, Direction::Negative, &v).unwrap();
        assert_eq!(neg.items, vec![("b".into(), -1.0)]);
        assert!(neg.exhausted);
    }

    #[test]
    fn feature_report_escapes_whitespace() {
        let top = TopFeatures { items: vec![(" cînd ".to_string(), 0.25f64)], exhausted: false };
        assert_eq!(feature_report(&[("MD".into(), top)]), "MD\t1\t␣cînd␣\t0.25\n");
        assert_eq!(escape_visible("a\tb\n"), "a\\tb\\n");
    }

    #[test]
    fn tune_single_point_and_ties() {
        let texts = ["aaaa bbb", "aaab aa", "zzzz yyy", "zzy zzzz"];
        let train: Vec<Labeled> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Labeled { id: ["a", "b", "c", "d"][i], text: t, label: usize::from(i >= 2) })
            .collect();
        let val = vec![Labeled { id: "v0", text: "aaa ab", label: 0 }, Labeled { id: "v1", text: "zzz yz", label: 1 }];
        let classes = vec!["A".to_string(), "Z".to_string()];
        let r = tune::<f64>(&train, &val, &classes, &[2], &[1e-3], KernelConfig::presence(2), DEFAULT_HASH_SEED).unwrap();
        assert_eq!(r.best, (2, 1e-3));
        assert_eq!(r.grid.len(), 1);
        let r = tune::<f64>(&train, &val, &classes, &[3, 1, 2], &[1e-5, 1e-3], KernelConfig::presence(2), DEFAULT_HASH_SEED).unwrap();
        assert!(r.grid.iter().all(|p| p.accuracy == Some(1.0)));
        assert_eq!(r.best, (1, 1e-3));
        assert!(tune::<f64>(&train, &val, &classes, &[], &[1e-3], KernelConfig::presence(2), 0).is_err());
        assert!(tune::<f64>(&train, &train, &classes, &[2], &[1e-3], KernelConfig::presence(2), 0).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let k = gram(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut m = fit_binary(&k, &[1.0, -1.0], 0.5).unwrap();
        m.corpus_checksum = Some("abc".into());
        let meta: BTreeMap<String, String> = [("task".to_string(), "dialect_binary".to_string())].into();
        let json = model_to_json(&m, &meta);
        let (back, meta_back) = model_from_json::<f64>(&json).unwrap();
        assert_eq!(back, m);
        assert_eq!(meta_back, meta);
        assert!(model_from_json::<f64>(&json.replace("dialect-bench-model", "other")).is_err());
    }
}
