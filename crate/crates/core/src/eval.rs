//! Benchmark tasks, metrics and report emission.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cache::{self, ProfileCache};
use crate::corpus::{CorpusSplit, Dialect, NePolicy, Sample, Topic};
use crate::kernel::{self, GramMatrix, KernelConfig};
use crate::krr::{self, DualModel, Labeled};
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    DialectBinary,
    MdTopic,
    MdToRo,
    RoTopic,
    RoToMd,
}

impl TaskId {
    /// Row order of the results table.
    pub const ALL: [TaskId; 5] = [TaskId::DialectBinary, TaskId::MdTopic, TaskId::MdToRo, TaskId::RoTopic, TaskId::RoToMd];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskId::DialectBinary => "dialect_binary",
            TaskId::MdTopic => "md_topic",
            TaskId::MdToRo => "md_to_ro",
            TaskId::RoTopic => "ro_topic",
            TaskId::RoToMd => "ro_to_md",
        }
    }

    fn title(self) -> &'static str {
        match self {
            TaskId::DialectBinary => "Binary classification by dialect",
            TaskId::MdTopic => "MD categorization (by topic)",
            TaskId::MdToRo => "MD→RO categorization (by topic)",
            TaskId::RoTopic => "RO categorization (by topic)",
            TaskId::RoToMd => "RO→MD categorization (by topic)",
        }
    }

    pub fn is_cross_dialect(self) -> bool {
        matches!(self, TaskId::MdToRo | TaskId::RoToMd)
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown task {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelField {
    Dialect,
    Topic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskSpec {
    pub task_id: TaskId,
    pub ner_policy: NePolicy,
    pub label_field: LabelField,
    /// `None` keeps both dialects.
    pub train_filter: Option<Dialect>,
    pub validation_filter: Option<Dialect>,
    pub test_filter: Option<Dialect>,
}

impl TaskSpec {
    pub fn new(task_id: TaskId, ner_policy: NePolicy) -> Self {
        use Dialect::{MD, RO};
        let (label_field, train, test) = match task_id {
            TaskId::DialectBinary => (LabelField::Dialect, None, None),
            TaskId::MdTopic => (LabelField::Topic, Some(MD), Some(MD)),
            TaskId::MdToRo => (LabelField::Topic, Some(MD), Some(RO)),
            TaskId::RoTopic => (LabelField::Topic, Some(RO), Some(RO)),
            TaskId::RoToMd => (LabelField::Topic, Some(RO), Some(MD)),
        };
        // validation always comes from the training dialect
        Self { task_id, ner_policy, label_field, train_filter: train, validation_filter: train, test_filter: test }
    }

    pub fn classes(&self) -> Vec<String> {
        match self.label_field {
            LabelField::Dialect => Dialect::ALL.iter().map(|d| d.to_string()).collect(),
            LabelField::Topic => Topic::ALL.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn label(&self, s: &Sample) -> usize {
        match self.label_field {
            LabelField::Dialect => Dialect::ALL.iter().position(|&d| d == s.dialect).unwrap(),
            LabelField::Topic => Topic::ALL.iter().position(|&t| t == s.topic).unwrap(),
        }
    }
}

/// The filtered, labelled documents of one task.
#[derive(Debug, Clone)]
pub struct TaskData<'a> {
    pub classes: Vec<String>,
    pub train: Vec<Labeled<'a>>,
    pub validation: Vec<Labeled<'a>>,
    pub test: Vec<Labeled<'a>>,
}

impl<'a> TaskData<'a> {
    pub fn new(spec: &TaskSpec, corpus: &'a CorpusSplit) -> Result<Self> {
        let select = |samples: &'a [Sample], filter: Option<Dialect>, name: &str| -> Result<Vec<Labeled<'a>>> {
            let out: Vec<Labeled<'a>> = samples
                .iter()
                .filter(|s| filter.is_none_or(|d| s.dialect == d))
                .map(|s| Labeled { id: &s.id, text: &s.text, label: spec.label(s) })
                .collect();
            if out.is_empty() {
                return Err(Error::Invalid(format!("task {} has an empty {name} set", spec.task_id)));
            }
            Ok(out)
        };
        let data = Self {
            classes: spec.classes(),
            train: select(&corpus.train, spec.train_filter, "training")?,
            validation: select(&corpus.validation, spec.validation_filter, "validation")?,
            test: select(&corpus.test, spec.test_filter, "test")?,
        };
        if spec.task_id.is_cross_dialect() {
            data.check_leakage(corpus, spec.test_filter.unwrap())?;
        }
        Ok(data)
    }

    fn check_leakage(&self, corpus: &CorpusSplit, test_dialect: Dialect) -> Result<()> {
        let test_dialect_ids: HashSet<&str> =
            corpus.iter().filter(|s| s.dialect == test_dialect).map(|s| s.id.as_str()).collect();
        if let Some(leak) = self.train.iter().chain(&self.validation).find(|d| test_dialect_ids.contains(d.id)) {
            return Err(Error::Mismatch(format!("test-dialect sample {} leaked into training/validation", leak.id)));
        }
        Ok(())
    }
}

/// Confusion matrix over class indices: `entry[gold][pred]`.
pub fn confusion_indices(gold: &[usize], pred: &[usize], n_labels: usize) -> Result<Vec<Vec<u64>>> {
    if gold.len() != pred.len() {
        return Err(Error::Dimension(format!("{} gold vs {} predicted labels", gold.len(), pred.len())));
    }
    let mut m = vec![vec![0u64; n_labels]; n_labels];
    for (&g, &p) in gold.iter().zip(pred) {
        if g >= n_labels || p >= n_labels {
            return Err(Error::Invalid(format!("label index {} out of range", g.max(p))));
        }
        m[g][p] += 1;
    }
    Ok(m)
}

pub fn confusion<S: AsRef<str>>(gold: &[S], pred: &[S], labels: &[String]) -> Result<Vec<Vec<u64>>> {
    let index = |v: &S| {
        labels
            .iter()
            .position(|l| l == v.as_ref())
            .ok_or_else(|| Error::Invalid(format!("unknown label {:?}", v.as_ref())))
    };
    let g = gold.iter().map(index).collect::<Result<Vec<_>>>()?;
    let p = pred.iter().map(index).collect::<Result<Vec<_>>>()?;
    confusion_indices(&g, &p, labels.len())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics<T> {
    pub accuracy: T,
    pub weighted_f1: T,
    pub macro_f1: T,
}

/// Accuracy, support-weighted F1 and macro F1 from integer counts.
///
/// A class with `P + R = 0` has F1 0. It still counts in the macro mean;
/// the weighted mean gives classes without gold support weight 0.
pub fn metrics<T: Scalar>(confusion: &[Vec<u64>]) -> Result<Metrics<T>> {
    let k = confusion.len();
    if k == 0 || confusion.iter().any(|r| r.len() != k) {
        return Err(Error::Dimension("confusion matrix must be square and non-empty".into()));
    }
    let total: u64 = confusion.iter().flatten().sum();
    if total == 0 {
        return Err(Error::Invalid("confusion matrix has zero total".into()));
    }
    let correct: u64 = (0..k).map(|i| confusion[i][i]).sum();
    let ratio = |a: u64, b: u64| if b == 0 { T::zero() } else { T::of_count(a) / T::of_count(b) };
    let mut macro_sum = T::zero();
    let mut weighted_sum = T::zero();
    for c in 0..k {
        let tp = confusion[c][c];
        let support: u64 = confusion[c].iter().sum();
        let predicted: u64 = confusion.iter().map(|r| r[c]).sum();
        let (p, r) = (ratio(tp, predicted), ratio(tp, support));
        let f1 = if p + r == T::zero() { T::zero() } else { T::of(2.0) * p * r / (p + r) };
        macro_sum = macro_sum + f1;
        weighted_sum = weighted_sum + T::of_count(support) * f1;
    }
    Ok(Metrics {
        accuracy: ratio(correct, total),
        weighted_f1: weighted_sum / T::of_count(total),
        macro_f1: macro_sum / T::of_count(k as u64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "krr")]
    KrrPresence,
    #[serde(rename = "cnn")]
    Cnn,
    #[serde(rename = "cnn-se")]
    CnnSe,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::KrrPresence => "krr",
            ModelKind::Cnn => "cnn",
            ModelKind::CnnSe => "cnn-se",
        }
    }

    fn rank(name: &str) -> usize {
        match name {
            "krr" => 0,
            "cnn" => 1,
            "cnn-se" => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "krr" | "krr_presence" => Ok(ModelKind::KrrPresence),
            "cnn" => Ok(ModelKind::Cnn),
            "cnn-se" | "cnn_se" => Ok(ModelKind::CnnSe),
            other => Err(Error::Invalid(format!("unknown model {other:?}"))),
        }
    }
}

/// Kernel ridge regression hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct KrrParams {
    pub kernel: KernelConfig,
    pub lambda: f64,
    pub hash_seed: u64,
    pub seed: u64,
    pub cache: Option<ProfileCache>,
}

impl Default for KrrParams {
    fn default() -> Self {
        Self { kernel: KernelConfig::default(), lambda: 1e-5, hash_seed: kernel::DEFAULT_HASH_SEED, seed: 0, cache: None }
    }
}

impl KrrParams {
    pub fn config_echo(&self) -> BTreeMap<String, String> {
        let k = &self.kernel;
        [
            ("kernel", k.kind.to_string()),
            ("ngram_min", k.n_low.to_string()),
            ("ngram_max", k.n_high.to_string()),
            ("normalize", k.normalize.to_string()),
            ("lambda", format!("{:e}", self.lambda)),
            ("hash_seed", self.hash_seed.to_string()),
            ("multiclass", "one-vs-rest".to_string()),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b))
        .collect()
    }
}

/// One task run scored on one split. Field order is the JSON schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: String,
    pub model: String,
    pub split: String,
    pub ner: String,
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub macro_f1: f64,
    pub confusion: Vec<Vec<u64>>,
    pub labels: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub corpus_checksum: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskRun {
    pub validation: MetricsReport,
    pub test: MetricsReport,
}

fn check_variant(spec: &TaskSpec, corpus: &CorpusSplit) -> Result<()> {
    match (spec.ner_policy, corpus.ner_masked) {
        (NePolicy::Keep, true) => Err(Error::Unsupported("task asks for unmasked text but the corpus is entity-masked".into())),
        (NePolicy::Mask, false) => Err(Error::Unsupported("task asks for masked text but the corpus is not entity-masked".into())),
        _ => Ok(()),
    }
}

fn profiles(docs: &[Labeled<'_>], params: &KrrParams) -> Result<Vec<kernel::DocProfiles>> {
    let docs: Vec<(&str, &str)> = docs.iter().map(|d| (d.id, d.text)).collect();
    cache::profiles(params.cache.as_ref(), &docs, &params.kernel, params.hash_seed)
}

/// Fits the task's training set.
pub fn train_task(spec: &TaskSpec, corpus: &CorpusSplit, params: &KrrParams) -> Result<DualModel<f64>> {
    check_variant(spec, corpus)?;
    let data = TaskData::new(spec, corpus)?;
    let tp = profiles(&data.train, params)?;
    let k: GramMatrix<f64> = kernel::gram_matrix(&tp, &tp, &params.kernel)?;
    let labels: Vec<usize> = data.train.iter().map(|d| d.label).collect();
    let mut model = krr::fit(&k, &labels, &data.classes, params.lambda)?;
    model.hash_seed = params.hash_seed;
    model.corpus_checksum = Some(corpus.checksum());
    Ok(model)
}

/// Scores a fitted model on the task's validation and test sets.
pub fn evaluate_task(spec: &TaskSpec, corpus: &CorpusSplit, model: &DualModel<f64>, params: &KrrParams) -> Result<TaskRun> {
    check_variant(spec, corpus)?;
    let checksum = corpus.checksum();
    if let Some(expected) = &model.corpus_checksum {
        if *expected != checksum {
            return Err(Error::Mismatch(format!("model was trained on corpus {expected}, got {checksum}")));
        }
    }
    let data = TaskData::new(spec, corpus)?;
    if model.classes != data.classes {
        return Err(Error::Mismatch(format!("model classes {:?} do not match task {}", model.classes, spec.task_id)));
    }
    let seed = params.seed;
    let params = KrrParams {
        kernel: model.kernel_cfg,
        lambda: model.lambda,
        hash_seed: model.hash_seed,
        seed,
        cache: params.cache.clone(),
    };
    let by_id: BTreeMap<&str, &Sample> = corpus.train.iter().map(|s| (s.id.as_str(), s)).collect();
    let train_docs = model
        .train_refs
        .iter()
        .map(|r| by_id.get(r.as_str()).map(|s| (s.id.as_str(), s.text.as_str())))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Mismatch("model references training documents missing from the corpus".into()))?;
    let tp = cache::profiles(params.cache.as_ref(), &train_docs, &params.kernel, params.hash_seed)?;
    let report = |docs: &[Labeled<'_>], split: &str| -> Result<MetricsReport> {
        let xp = profiles(docs, &params)?;
        let kx: GramMatrix<f64> = kernel::gram_matrix(&xp, &tp, &params.kernel)?;
        let pred = krr::predict(model, &kx)?;
        let gold: Vec<usize> = docs.iter().map(|d| d.label).collect();
        let conf = confusion_indices(&gold, &pred.labels, data.classes.len())?;
        let m = metrics::<f64>(&conf)?;
        Ok(MetricsReport {
            task: spec.task_id.to_string(),
            model: ModelKind::KrrPresence.to_string(),
            split: split.to_string(),
            ner: spec.ner_policy.to_string(),
            accuracy: m.accuracy,
            weighted_f1: m.weighted_f1,
            macro_f1: m.macro_f1,
            confusion: conf,
            labels: data.classes.clone(),
            config: params.config_echo(),
            corpus_checksum: checksum.clone(),
            seed,
        })
    };
    Ok(TaskRun { validation: report(&data.validation, "validation")?, test: report(&data.test, "test")? })
}

/// Trains on the task's training set and reports validation and test metrics.
/// Only the kernel model runs here; CNN reports come from the separate
/// network trainer and are merged with [`read_reports`].
pub fn run_task(spec: &TaskSpec, corpus: &CorpusSplit, kind: ModelKind, params: &KrrParams) -> Result<TaskRun> {
    if kind != ModelKind::KrrPresence {
        return Err(Error::Unsupported(format!(
            "model {kind} is trained by the separate network trainer; merge its JSON reports instead"
        )));
    }
    let model = train_task(spec, corpus, params)?;
    evaluate_task(spec, corpus, &model, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricDeltas {
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub task: TaskId,
    pub keep: Option<TaskRun>,
    pub mask: TaskRun,
    /// Test-set `keep - mask`, when both variants ran.
    pub delta: Option<MetricDeltas>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    /// True when the raw corpus was unavailable and only masked runs exist.
    pub partial: bool,
}

/// Runs each task on the raw and the masked corpus with identical settings.
pub fn ner_ablation(
    tasks: &[TaskId],
    corpus_raw: Option<&CorpusSplit>,
    corpus_masked: &CorpusSplit,
    params: &KrrParams,
) -> Result<AblationReport> {
    let mut rows = Vec::new();
    for &task in tasks {
        let mask = run_task(&TaskSpec::new(task, NePolicy::Mask), corpus_masked, ModelKind::KrrPresence, params)?;
        let keep = corpus_raw
            .map(|raw| run_task(&TaskSpec::new(task, NePolicy::Keep), raw, ModelKind::KrrPresence, params))
            .transpose()?;
        let delta = keep.as_ref().map(|k| MetricDeltas {
            accuracy: k.test.accuracy - mask.test.accuracy,
            weighted_f1: k.test.weighted_f1 - mask.test.weighted_f1,
            macro_f1: k.test.macro_f1 - mask.test.macro_f1,
        });
        rows.push(AblationRow { task, keep, mask, delta });
    }
    Ok(AblationReport { rows, partial: corpus_raw.is_none() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Invalid(format!("unknown report format {other:?}"))),
        }
    }
}

pub fn reports_to_json(reports: &[MetricsReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

/// Reads a JSON array of reports, or a single report object.
pub fn read_reports(text: &str) -> Result<Vec<MetricsReport>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("report json: {e}")))?;
    let parsed = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|r| vec![r])
    };
    parsed.map_err(|e| Error::Invalid(format!("report json: {e}")))
}

pub fn reports_to_csv(reports: &[MetricsReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "task", "model", "split", "ner", "accuracy", "weighted_f1", "macro_f1", "confusion", "labels", "config",
        "corpus_checksum", "seed",
    ])
    .expect("in-memory write");
    for r in reports {
        let confusion: Vec<String> = r.confusion.iter().flatten().map(u64::to_string).collect();
        let config: Vec<String> = r.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
        w.write_record([
            r.task.clone(),
            r.model.clone(),
            r.split.clone(),
            r.ner.clone(),
            r.accuracy.to_string(),
            r.weighted_f1.to_string(),
            r.macro_f1.to_string(),
            confusion.join(" "),
            r.labels.join("|"),
            config.join(";"),
            r.corpus_checksum.clone(),
            r.seed.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Results grid: one row group per task, one row per (model, ner), columns
/// for validation and test accuracy / weighted F1 / macro F1 in percent.
pub fn reports_to_markdown(reports: &[MetricsReport]) -> String {
    type Key = (usize, String, usize, String, String);
    let mut rows: BTreeMap<Key, [Option<&MetricsReport>; 2]> = BTreeMap::new();
    for r in reports {
        let task_rank = r.task.parse::<TaskId>().map_or(TaskId::ALL.len(), |t| t as usize);
        let key = (task_rank, r.task.clone(), ModelKind::rank(&r.model), r.model.clone(), r.ner.clone());
        let slot = usize::from(r.split != "validation");
        rows.entry(key).or_default()[slot] = Some(r);
    }
    let show_ner = rows.keys().map(|k| &k.4).collect::<HashSet<_>>().len() > 1;
    let mut out = String::from(
        "| Task | Method | Val accuracy | Val weighted F1 | Val macro F1 | Test accuracy | Test weighted F1 | Test macro F1 |\n\
         |---|---|---:|---:|---:|---:|---:|---:|\n",
    );
    let mut last_task = None;
    for ((_, task, _, model, ner), cells) in rows {
        let task_cell = if last_task.as_ref() == Some(&task) {
            String::new()
        } else {
            task.parse::<TaskId>().map_or(task.clone(), |t| t.title().to_string())
        };
        last_task = Some(task);
        let method = if show_ner { format!("{model} (ner={ner})") } else { model };
        let mut line = format!("| {task_cell} | {method} |");
        for cell in cells {
            match cell {
                Some(r) => {
                    for v in [r.accuracy, r.weighted_f1, r.macro_f1] {
                        line.push_str(&format!(" {:.2} |", 100.0 * v));
                    }
                }
                None => line.push_str(" - | - | - |"),
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn render_reports(reports: &[MetricsReport], format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => reports_to_json(reports),
        ReportFormat::Csv => reports_to_csv(reports),
        ReportFormat::Markdown => reports_to_markdown(reports),
    }
}

pub fn emit_report(reports: &[MetricsReport], format: ReportFormat, path: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Invalid("no reports to emit".into()));
    }
    std::fs::write(path, render_reports(reports, format)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn confusion_examples() {
        let l = labels(&["A", "B"]);
        assert_eq!(confusion(&["A", "B"], &["A", "B"], &l).unwrap(), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(confusion(&["A"], &["B"], &l).unwrap(), vec![vec![0, 1], vec![0, 0]]);
        assert!(confusion(&["A"], &["C"], &l).is_err());
        assert!(confusion(&["A"], &[], &l).is_err());
    }

    #[test]
    fn metrics_examples() {
        let m = metrics::<f64>(&[vec![3, 0], vec![0, 2]]).unwrap();
        assert_eq!((m.accuracy, m.weighted_f1, m.macro_f1), (1.0, 1.0, 1.0));

        let conf = confusion(&["A", "A", "A", "B"], &["A", "A", "B", "B"], &labels(&["A", "B"])).unwrap();
        let m = metrics::<f64>(&conf).unwrap();
        assert_eq!(m.accuracy, 0.75);
        assert!((m.macro_f1 - (0.8 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        assert!((m.weighted_f1 - (3.0 * 0.8 + 2.0 / 3.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_support_class() {
        // C is never gold and never predicted
        let conf = confusion(&["A", "B"], &["A", "B"], &labels(&["A", "B", "C"])).unwrap();
        let m = metrics::<f64>(&conf).unwrap();
        assert_eq!(m.weighted_f1, 1.0);
        assert!((m.macro_f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!(metrics::<f64>(&[vec![0, 0], vec![0, 0]]).is_err());
        assert!(metrics::<f64>(&[]).is_err());
    }

    #[test]
    fn task_specs() {
        let s = TaskSpec::new(TaskId::MdToRo, NePolicy::Mask);
        assert_eq!(s.train_filter, Some(Dialect::MD));
        assert_eq!(s.validation_filter, Some(Dialect::MD));
        assert_eq!(s.test_filter, Some(Dialect::RO));
        let b = TaskSpec::new(TaskId::DialectBinary, NePolicy::Mask);
        assert_eq!(b.label_field, LabelField::Dialect);
        assert_eq!(b.classes(), labels(&["MD", "RO"]));
        assert_eq!(TaskSpec::new(TaskId::RoTopic, NePolicy::Keep).classes().len(), 6);
        for t in TaskId::ALL {
            assert_eq!(t.as_str().parse::<TaskId>().unwrap(), t);
        }
    }

    fn report(task: &str, model: &str, split: &str) -> MetricsReport {
        MetricsReport {
            task: task.into(),
            model: model.into(),
            split: split.into(),
            ner: "mask".into(),
            accuracy: 0.5,
            weighted_f1: 0.25,
            macro_f1: 0.125,
            confusion: vec![vec![1, 1], vec![0, 0]],
            labels: labels(&["MD", "RO"]),
            config: [("lambda".to_string(), "1e-5".to_string())].into(),
            corpus_checksum: "x".into(),
            seed: 1,
        }
    }

    #[test]
    fn json_round_trip_and_field_order() {
        let r = report("dialect_binary", "krr", "test");
        let json = reports_to_json(std::slice::from_ref(&r));
        assert_eq!(read_reports(&json).unwrap(), vec![r.clone()]);
        let single = serde_json::to_string(&r).unwrap();
        assert_eq!(read_reports(&single).unwrap(), vec![r]);
        let keys = ["task", "model", "split", "ner", "accuracy", "weighted_f1", "macro_f1", "confusion", "labels", "config", "corpus_checksum", "seed"];
        let pos: Vec<usize> = keys.iter().map(|k| single.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_has_one_row_per_report() {
        let csv = reports_to_csv(&[report("md_topic", "krr", "test"), report("md_topic", "cnn", "test")]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].contains("1 1 0 0"));
        assert!(lines[1].contains("MD|RO"));
    }

    #[test]
    fn markdown_grid_shape() {
        let mut reports = Vec::new();
        for t in TaskId::ALL {
            for m in ["cnn-se", "krr", "cnn"] {
                for split in ["validation", "test"] {
                    reports.push(report(t.as_str(), m, split));
                }
            }
        }
        let md = reports_to_markdown(&reports);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 2 + 15);
        assert!(lines[2].starts_with("| Binary classification by dialect | krr |"));
        assert!(lines[3].starts_with("|  | cnn |"));
        assert!(lines[4].starts_with("|  | cnn-se |"));
        for l in &lines[2..] {
            // two label cells plus six metric cells
            assert_eq!(l.matches('|').count(), 9, "{l}");
            assert_eq!(l.matches("50.00").count(), 2);
        }
    }

    #[test]
    fn emit_needs_reports() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_report(&[], ReportFormat::Json, &dir.path().join("r.json")).is_err());
        assert!(emit_report(&[report("md_topic", "krr", "test")], ReportFormat::Json, &dir.path().join("no/such/r.json")).is_err());
    }

    #[test]
    fn cnn_runs_are_not_local() {
        let corpus = CorpusSplit::default();
        let err = run_task(&TaskSpec::new(TaskId::MdTopic, NePolicy::Mask), &corpus, ModelKind::Cnn, &KrrParams::default());
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }
}
