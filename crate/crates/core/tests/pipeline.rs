use dialect_bench::corpus::{CorpusSplit, Dialect, NePolicy, Sample, Topic, NE_TOKEN};
use dialect_bench::eval::{self, KrrParams, ModelKind, TaskId, TaskSpec};
use dialect_bench::kernel::KernelConfig;
use dialect_bench::synthetic;
use dialect_bench::Error;

fn params(n: usize) -> KrrParams {
    KrrParams { kernel: KernelConfig::presence(n), lambda: 1e-5, ..KrrParams::default() }
}

#[test]
fn separable_corpus_is_solved_on_every_task() {
    let corpus = synthetic::separable_corpus([4, 2, 2], 1);
    for task in TaskId::ALL {
        if task.is_cross_dialect() {
            // classes use private letters per dialect, so nothing transfers
            continue;
        }
        let run = eval::run_task(&TaskSpec::new(task, NePolicy::Keep), &corpus, ModelKind::KrrPresence, &params(1)).unwrap();
        assert_eq!(run.test.accuracy, 1.0, "{task}");
        assert_eq!(run.validation.accuracy, 1.0, "{task}");
    }
}

/// Documents that differ only in which entity they mention.
fn entity_corpus(masked: bool) -> CorpusSplit {
    let filler = "este o zi obișnuită în oraș";
    let mut subsets: [Vec<Sample>; 3] = Default::default();
    let sizes = [8, 3, 3];
    for (s, subset) in subsets.iter_mut().enumerate() {
        for d in Dialect::ALL {
            let entity = if masked { NE_TOKEN } else if d == Dialect::MD { "Chișinău" } else { "București" };
            for t in Topic::ALL {
                for i in 0..sizes[s] {
                    let text = format!("{filler} {entity} {filler}");
                    subset.push(Sample::new(format!("{s}-{d}-{t}-{i}"), d, t, &text).unwrap());
                }
            }
        }
    }
    let [train, validation, test] = subsets;
    CorpusSplit { train, validation, test, ner_masked: masked }
}

#[test]
fn ablation_exposes_entity_only_signal() {
    let raw = entity_corpus(false);
    let masked = entity_corpus(true);
    let report = eval::ner_ablation(&[TaskId::DialectBinary], Some(&raw), &masked, &params(4)).unwrap();
    let row = &report.rows[0];
    assert!(!report.partial);
    assert_eq!(row.keep.as_ref().unwrap().test.accuracy, 1.0);
    // identical masked documents all receive the same label
    assert_eq!(row.mask.test.accuracy, 0.5);
    assert_eq!(row.delta.unwrap().accuracy, 0.5);
}

#[test]
fn variant_mismatch_is_rejected() {
    let masked = entity_corpus(true);
    let err = eval::run_task(&TaskSpec::new(TaskId::DialectBinary, NePolicy::Keep), &masked, ModelKind::KrrPresence, &params(3));
    assert!(matches!(err, Err(Error::Unsupported(_))));
}

#[test]
fn cross_dialect_tasks_train_on_one_dialect_only() {
    let corpus = synthetic::toy_corpus([4, 2, 2], 40, 0.15, true, 4);
    let spec = TaskSpec::new(TaskId::MdToRo, NePolicy::Mask);
    let data = eval::TaskData::new(&spec, &corpus).unwrap();
    assert!(data.train.iter().chain(&data.validation).all(|d| d.id.contains("-MD-")));
    assert!(data.test.iter().all(|d| d.id.contains("-RO-")));
    let run = eval::run_task(&spec, &corpus, ModelKind::KrrPresence, &params(4)).unwrap();
    assert_eq!(run.test.labels.len(), 6);
}

#[test]
fn evaluate_rejects_another_corpus() {
    let a = synthetic::toy_corpus([3, 1, 1], 30, 0.15, true, 1);
    let b = synthetic::toy_corpus([3, 1, 1], 30, 0.15, true, 2);
    let spec = TaskSpec::new(TaskId::DialectBinary, NePolicy::Mask);
    let model = eval::train_task(&spec, &a, &params(3)).unwrap();
    let err = eval::evaluate_task(&spec, &b, &model, &params(3)).unwrap_err();
    assert_eq!(err.exit_code(), 4);
}
