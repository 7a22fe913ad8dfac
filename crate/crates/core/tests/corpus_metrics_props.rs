use std::collections::{BTreeMap, HashSet};

use dialect_bench::corpus::{self, CorpusSplit, Dialect, Layout, Sample, Topic};
use dialect_bench::eval::{confusion_indices, metrics};
use proptest::prelude::*;

fn sample_text() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop::sample::select(vec!["sînt", "când", "a\tb", "x\ny", "\\", "$NE$", "ș", "  "]),
        1..6,
    )
    .prop_map(|w| w.join(" "))
    .prop_filter("non-empty after normalization", |t| !corpus::normalize_whitespace(t).is_empty())
}

fn samples(max: usize) -> impl Strategy<Value = Vec<Sample>> {
    proptest::collection::vec((0usize..2, 0usize..6, sample_text()), 1..max).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (d, t, text))| Sample::new(format!("s{i}"), Dialect::ALL[d], Topic::ALL[t], &text).unwrap())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_files_round_trip(all in samples(30)) {
        let mut split = CorpusSplit { train: vec![], validation: vec![], test: vec![], ner_masked: false };
        for (i, s) in all.into_iter().enumerate() {
            match i % 3 {
                0 => split.train.push(s),
                1 => split.validation.push(s),
                _ => split.test.push(s),
            }
        }
        let masked = split.iter().any(|s| s.text.contains(corpus::NE_TOKEN));
        split.ner_masked = masked;
        let dir = tempfile::tempdir().unwrap();
        corpus::write_corpus(&split, dir.path()).unwrap();
        let back = corpus::load_corpus(dir.path(), &Layout::Canonical).unwrap();
        prop_assert_eq!(&back, &split);
        prop_assert_eq!(back.checksum(), split.checksum());
    }

    #[test]
    fn stratified_split_partitions_every_stratum(per in proptest::collection::vec(3usize..12, 12), seed in any::<u64>()) {
        let mut all = Vec::new();
        for (k, &n) in per.iter().enumerate() {
            for i in 0..n {
                all.push(Sample::new(format!("{k}-{i}"), Dialect::ALL[k / 6], Topic::ALL[k % 6], "text").unwrap());
            }
        }
        let split = corpus::stratified_split(&all, [0.6, 0.2, 0.2], seed).unwrap();
        let ids: Vec<&str> = split.iter().map(|s| s.id.as_str()).collect();
        let unique: HashSet<&str> = ids.iter().copied().collect();
        prop_assert_eq!(ids.len(), all.len());
        prop_assert_eq!(unique.len(), all.len());
        let mut per_subset: BTreeMap<(usize, Dialect, Topic), usize> = BTreeMap::new();
        for (s, subset) in [&split.train, &split.validation, &split.test].into_iter().enumerate() {
            for x in subset {
                *per_subset.entry((s, x.dialect, x.topic)).or_default() += 1;
            }
        }
        for (k, &n) in per.iter().enumerate() {
            let (d, t) = (Dialect::ALL[k / 6], Topic::ALL[k % 6]);
            let counts: Vec<usize> = (0..3).map(|s| per_subset.get(&(s, d, t)).copied().unwrap_or(0)).collect();
            let ideal = [0.6 * n as f64, 0.2 * n as f64, 0.2 * n as f64];
            for s in 0..3 {
                prop_assert!((counts[s] as f64 - ideal[s]).abs() <= 1.0 + 1e-9);
            }
        }
        prop_assert_eq!(split, corpus::stratified_split(&all, [0.6, 0.2, 0.2], seed).unwrap());
    }

    #[test]
    fn metrics_are_bounded_and_label_permutation_invariant(
        pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..60),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let gold: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let m = metrics::<f64>(&confusion_indices(&gold, &pred, 4).unwrap()).unwrap();
        for v in [m.accuracy, m.weighted_f1, m.macro_f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let pg: Vec<usize> = gold.iter().map(|&g| perm[g]).collect();
        let pp: Vec<usize> = pred.iter().map(|&p| perm[p]).collect();
        let pm = metrics::<f64>(&confusion_indices(&pg, &pp, 4).unwrap()).unwrap();
        prop_assert!((pm.accuracy - m.accuracy).abs() < 1e-12);
        prop_assert!((pm.weighted_f1 - m.weighted_f1).abs() < 1e-12);
        prop_assert!((pm.macro_f1 - m.macro_f1).abs() < 1e-12);
        if gold == pred {
            prop_assert_eq!(m.accuracy, 1.0);
            prop_assert!((m.weighted_f1 - 1.0).abs() < 1e-12);
        }
    }
}
