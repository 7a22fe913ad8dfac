//! Command-line front end.
//!
//! Every option can also come from a flat `key = value` file passed with
//! `--config`; keys are the long flag names without dashes (`ngram-min`,
//! `lambda`, ...). Flags win over the file, the file wins over defaults.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cache::ProfileCache;
use crate::corpus::{self, CorpusSplit, Layout, LayoutConfig, NePolicy, Sample};
use crate::eval::{self, KrrParams, MetricsReport, ModelKind, ReportFormat, TaskId, TaskSpec};
use crate::kernel::{KernelConfig, KernelKind, Vocabulary};
use crate::krr::{self, Direction, TopFeatures};
use crate::synthetic;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "dialect-bench", version, about = "String-kernel dialect and topic identification benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus release and write it in the canonical TSV format.
    Ingest(Opts),
    /// Print corpus statistics as JSON.
    Stats(Opts),
    /// Stratified train/validation/test split of a pooled sample file.
    Split(SplitOpts),
    /// Fit a kernel ridge regression model for one task.
    Train(Opts),
    /// Score a saved model, or train and score every requested task.
    Evaluate(EvalOpts),
    /// Grid search over n-gram length and lambda on the validation set.
    Tune(TuneOpts),
    /// Print the most discriminative n-grams of a saved model.
    Features(FeatureOpts),
    /// Compare runs with and without named entities.
    Ablation(Opts),
    /// Merge JSON reports (kernel and network runs) into one table.
    Report(ReportOpts),
    /// Write a generated toy corpus in the canonical format.
    Synth(SynthOpts),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Flat key = value file with defaults for any option below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus directory (entity-masked variant).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Corpus directory with named entities left in place.
    #[arg(long)]
    pub corpus_raw: Option<PathBuf>,
    /// Layout config describing a non-canonical corpus release.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// dialect_binary | md_topic | md_to_ro | ro_topic | ro_to_md | all
    #[arg(long)]
    pub task: Option<String>,
    /// krr | cnn | cnn-se
    #[arg(long)]
    pub model: Option<String>,
    /// presence | intersection
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub ngram_min: Option<usize>,
    #[arg(long)]
    pub ngram_max: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// on | off
    #[arg(long)]
    pub normalize: Option<String>,
    /// keep | mask
    #[arg(long)]
    pub ner: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Upper bound on worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Keep this many training samples per dialect (stratified by topic).
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Output file or directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated report formats: json, csv, markdown.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalOpts {
    #[command(flatten)]
    pub opts: Opts,
    /// Saved model; when absent the task is trained first.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneOpts {
    #[command(flatten)]
    pub opts: Opts,
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct FeatureOpts {
    #[command(flatten)]
    pub opts: Opts,
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct SplitOpts {
    /// Canonical TSV file with every sample.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.6471,0.1764,0.1765")]
    pub ratios: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportOpts {
    /// JSON report files to merge.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "markdown")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthOpts {
    #[arg(long)]
    pub out: PathBuf,
    /// Documents per (dialect, topic) in train, validation, test.
    #[arg(long, value_delimiter = ',', default_value = "10,3,3")]
    pub per_stratum: Vec<usize>,
    #[arg(long, default_value_t = 60)]
    pub tokens: usize,
    #[arg(long, default_value_t = 0.1)]
    pub signal: f64,
    /// Write entity names instead of the placeholder.
    #[arg(long)]
    pub raw: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Fully resolved options shared by the modelling commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub corpus_raw: Option<PathBuf>,
    pub layout: Option<PathBuf>,
    pub tasks: Vec<TaskId>,
    pub model: ModelKind,
    pub kernel: KernelConfig,
    pub lambda: f64,
    pub ner: NePolicy,
    pub seed: u64,
    pub workers: Option<usize>,
    pub subsample: Option<usize>,
    pub out: Option<PathBuf>,
    pub formats: Vec<ReportFormat>,
}

fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|_| Error::Invalid(format!("config key {key}: cannot parse {v:?}"))))
        .transpose()
}

fn parse_list<T: FromStr<Err = Error>>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(T::from_str).collect()
}

impl RunConfig {
    pub fn resolve(o: &Opts) -> Result<Self> {
        let file = match &o.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                corpus::parse_key_values(&text)?
            }
            None => BTreeMap::new(),
        };
        let task = pick(o.task.clone(), &file, "task")?.unwrap_or_else(|| "dialect_binary".into());
        let tasks = if task == "all" { TaskId::ALL.to_vec() } else { parse_list(&task)? };
        let model = pick(o.model.clone(), &file, "model")?.unwrap_or_else(|| "krr".into()).parse()?;
        let kind: KernelKind = pick(o.kernel.clone(), &file, "kernel")?.unwrap_or_else(|| "presence".into()).parse()?;
        let n_low = pick(o.ngram_min, &file, "ngram-min")?.unwrap_or(6);
        let n_high = pick(o.ngram_max, &file, "ngram-max")?.unwrap_or(n_low);
        let normalize = match pick(o.normalize.clone(), &file, "normalize")?.as_deref() {
            None | Some("on") => true,
            Some("off") => false,
            Some(other) => return Err(Error::Invalid(format!("--normalize must be on|off, got {other:?}"))),
        };
        let kernel = KernelConfig { kind, n_low, n_high, normalize };
        kernel.validate()?;
        let lambda = pick(o.lambda, &file, "lambda")?.unwrap_or(1e-5);
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Invalid(format!("lambda must be > 0, got {lambda}")));
        }
        let workers = pick(o.workers, &file, "workers")?;
        if workers == Some(0) {
            return Err(Error::Invalid("--workers must be at least 1".into()));
        }
        Ok(Self {
            corpus: pick(o.corpus.clone(), &file, "corpus")?,
            corpus_raw: pick(o.corpus_raw.clone(), &file, "corpus-raw")?,
            layout: pick(o.layout.clone(), &file, "layout")?,
            tasks,
            model,
            kernel,
            lambda,
            ner: pick(o.ner.clone(), &file, "ner")?.unwrap_or_else(|| "mask".into()).parse()?,
            seed: pick(o.seed, &file, "seed")?.unwrap_or(0),
            workers,
            subsample: pick(o.subsample, &file, "subsample")?,
            out: pick(o.out.clone(), &file, "out")?,
            formats: parse_list(&pick(o.format.clone(), &file, "format")?.unwrap_or_else(|| "json".into()))?,
        })
    }

    fn params(&self) -> KrrParams {
        KrrParams {
            kernel: self.kernel,
            lambda: self.lambda,
            seed: self.seed,
            cache: ProfileCache::from_env(),
            ..KrrParams::default()
        }
    }

    fn layout(&self) -> Result<Layout> {
        Ok(match &self.layout {
            Some(p) => Layout::Config(LayoutConfig::from_file(p)?),
            None => Layout::Canonical,
        })
    }

    fn corpus_path(&self, policy: NePolicy) -> Result<&Path> {
        let path = match policy {
            NePolicy::Keep => self.corpus_raw.as_deref().or(self.corpus.as_deref()),
            NePolicy::Mask => self.corpus.as_deref(),
        };
        path.ok_or_else(|| Error::Invalid("--corpus is required".into()))
    }

    /// Loads the corpus variant for `policy`, applying `--subsample`.
    fn load(&self, policy: NePolicy) -> Result<CorpusSplit> {
        let path = self.corpus_path(policy)?;
        let mut split = corpus::load_corpus(path, &self.layout()?)?;
        if let Some(n) = self.subsample {
            split.train = corpus::subsample_per_dialect(&split.train, n, self.seed);
        }
        Ok(split)
    }

    fn out_dir(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| Error::Invalid("--out is required".into()))
    }

    fn single_task(&self) -> Result<TaskId> {
        match self.tasks.as_slice() {
            [t] => Ok(*t),
            _ => Err(Error::Invalid("this command takes exactly one --task".into())),
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn write_reports(reports: &[MetricsReport], formats: &[ReportFormat], dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for &f in formats {
        let path = dir.join(format!("{stem}.{}", f.extension()));
        eval::emit_report(reports, f, &path)?;
        say(&format!("{}\n", path.display()));
    }
    Ok(())
}

/// Writes to stdout; a closed pipe is not an error.
fn say(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn cmd_ingest(o: &Opts) -> Result<()> {
    let cfg = RunConfig::resolve(o)?;
    let path = cfg.corpus.as_deref().ok_or_else(|| Error::Invalid("--corpus is required".into()))?;
    let split = corpus::load_corpus(path, &cfg.layout()?)?;
    corpus::write_corpus(&split, cfg.out_dir()?)?;
    say(&format!("{}\n", json_line(&corpus::corpus_stats(&split))));
    Ok(())
}

fn cmd_stats(o: &Opts) -> Result<()> {
    let cfg = RunConfig::resolve(o)?;
    let split = cfg.load(cfg.ner)?;
    say(&format!("{}\n", json_line(&corpus::corpus_stats(&split))));
    Ok(())
}

fn cmd_split(o: &SplitOpts) -> Result<()> {
    let [a, b, c] = o.ratios[..] else {
        return Err(Error::Invalid("--ratios needs three values".into()));
    };
    let samples = read_pooled(&o.input)?;
    let split = corpus::stratified_split(&samples, [a, b, c], o.seed)?;
    corpus::write_corpus(&split, &o.out)?;
    say(&format!("{}\n", json_line(&corpus::corpus_stats(&split))));
    Ok(())
}

/// Reads one canonical TSV file as a flat sample list.
fn read_pooled(input: &Path) -> Result<Vec<Sample>> {
    let body = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let mut out = Vec::new();
    for (i, line) in body.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
        let row_err = |m: String| Error::Row { file: input.display().to_string(), row: i + 1, message: m };
        let cols: Vec<&str> = line.splitn(4, '\t').collect();
        if cols.len() != 4 {
            return Err(row_err(format!("expected 4 columns, found {}", cols.len())));
        }
        let parse = || -> Result<Sample> {
            Sample::new(cols[0], cols[1].parse()?, cols[2].parse()?, &corpus::unescape_text(cols[3]))
        };
        out.push(parse().map_err(|e| row_err(e.to_string()))?);
    }
    Ok(out)
}

fn model_meta(cfg: &RunConfig, task: TaskId) -> BTreeMap<String, String> {
    let mut meta: BTreeMap<String, String> = [
        ("task".to_string(), task.to_string()),
        ("ner".to_string(), cfg.ner.to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
    ]
    .into();
    if let Some(n) = cfg.subsample {
        meta.insert("subsample".into(), n.to_string());
    }
    meta
}

fn cmd_train(o: &Opts) -> Result<()> {
    let cfg = RunConfig::resolve(o)?;
    if cfg.model != ModelKind::KrrPresence {
        return Err(Error::Unsupported(format!("model {} is trained by the separate network trainer", cfg.model)));
    }
    let task = cfg.single_task()?;
    let out = cfg.out.clone().ok_or_else(|| Error::Invalid("--out is required".into()))?;
    let started = Instant::now();
    let split = cfg.load(cfg.ner)?;
    let model = eval::train_task(&TaskSpec::new(task, cfg.ner), &split, &cfg.params())?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    krr::save_model(&model, &model_meta(&cfg, task), &out)?;
    let m = model.train_refs.len();
    eprintln!(
        "trained {task} on {m} documents in {:.2}s (gram matrix {:.1} MiB, jitter {:e})",
        started.elapsed().as_secs_f64(),
        (m * m * 8) as f64 / (1024.0 * 1024.0),
        model.jitter
    );
    say(&format!("{}\n", out.display()));
    Ok(())
}

fn cmd_evaluate(o: &EvalOpts) -> Result<()> {
    let mut cfg = RunConfig::resolve(&o.opts)?;
    let out = cfg.out_dir()?.to_path_buf();
    let mut reports = Vec::new();
    match &o.model_file {
        Some(path) => {
            let (model, meta) = krr::load_model::<f64>(path)?;
            // settings the model was trained with, unless overridden
            if o.opts.task.is_none() {
                if let Some(t) = meta.get("task") {
                    cfg.tasks = vec![t.parse()?];
                }
            }
            if o.opts.ner.is_none() {
                if let Some(n) = meta.get("ner") {
                    cfg.ner = n.parse()?;
                }
            }
            if o.opts.subsample.is_none() && cfg.subsample.is_none() {
                cfg.subsample = meta.get("subsample").map(|s| s.parse()).transpose().map_err(|_| Error::Invalid("bad subsample in model metadata".into()))?;
            }
            if o.opts.seed.is_none() {
                if let Some(s) = meta.get("seed") {
                    cfg.seed = s.parse().map_err(|_| Error::Invalid("bad seed in model metadata".into()))?;
                }
            }
            let task = cfg.single_task()?;
            let split = cfg.load(cfg.ner)?;
            let run = eval::evaluate_task(&TaskSpec::new(task, cfg.ner), &split, &model, &cfg.params())?;
            reports.extend([run.validation, run.test]);
        }
        None => {
            let split = cfg.load(cfg.ner)?;
            for &task in &cfg.tasks {
                let run = eval::run_task(&TaskSpec::new(task, cfg.ner), &split, cfg.model, &cfg.params())?;
                reports.extend([run.validation, run.test]);
            }
        }
    }
    write_reports(&reports, &cfg.formats, &out, "reports")
}

fn cmd_tune(o: &TuneOpts) -> Result<()> {
    let cfg = RunConfig::resolve(&o.opts)?;
    let task = cfg.single_task()?;
    let n_grid = o.n_grid.clone().unwrap_or_else(|| vec![5, 6, 7, 8]);
    let lambda_grid = o.lambda_grid.clone().unwrap_or_else(|| vec![1e-3, 1e-4, 1e-5, 1e-6]);
    let split = cfg.load(cfg.ner)?;
    let data = eval::TaskData::new(&TaskSpec::new(task, cfg.ner), &split)?;
    let params = cfg.params();
    let result = krr::tune::<f64>(&data.train, &data.validation, &data.classes, &n_grid, &lambda_grid, cfg.kernel, params.hash_seed)?;
    let body = json_line(&result) + "\n";
    match &cfg.out {
        Some(dir) => {
            let path = dir.join("tune.json");
            write_file(&path, &body)?;
            say(&format!("{}\n", path.display()));
        }
        None => say(&body),
    }
    Ok(())
}

fn cmd_features(o: &FeatureOpts) -> Result<()> {
    let mut cfg = RunConfig::resolve(&o.opts)?;
    let (model, meta) = krr::load_model::<f64>(&o.model_file)?;
    if o.opts.ner.is_none() {
        if let Some(n) = meta.get("ner") {
            cfg.ner = n.parse()?;
        }
    }
    if cfg.subsample.is_none() {
        cfg.subsample = meta.get("subsample").and_then(|s| s.parse().ok());
    }
    if o.opts.seed.is_none() {
        cfg.seed = meta.get("seed").and_then(|s| s.parse().ok()).unwrap_or(cfg.seed);
    }
    let split = cfg.load(cfg.ner)?;
    if model.corpus_checksum.as_deref().is_some_and(|c| c != split.checksum()) {
        return Err(Error::Mismatch("model was trained on a different corpus".into()));
    }
    let by_id: BTreeMap<&str, &Sample> = split.train.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut docs = Vec::with_capacity(model.train_refs.len());
    for r in &model.train_refs {
        let s = by_id.get(r.as_str()).ok_or_else(|| Error::Mismatch(format!("training document {r} not in corpus")))?;
        docs.push((s.id.as_str(), s.text.as_str()));
    }
    let kcfg = model.kernel_cfg;
    let profiles = crate::cache::profiles(ProfileCache::from_env().as_ref(), &docs, &kcfg, model.hash_seed)?;
    let mut vocab = Vocabulary::new(model.hash_seed);
    for (_, text) in &docs {
        vocab.observe(text, kcfg.lengths());
    }
    vocab.audit()?;
    let weights = krr::extract_primal_weights(&model, &profiles)?;
    let rows: Vec<(String, TopFeatures<f64>)> = if model.is_binary() {
        vec![
            (model.classes[0].clone(), krr::top_features(&weights[0], o.k, Direction::Positive, &vocab)?),
            (model.classes[1].clone(), krr::top_features(&weights[0], o.k, Direction::Negative, &vocab)?),
        ]
    } else {
        weights
            .iter()
            .map(|w| Ok((w.class.clone(), krr::top_features(w, o.k, Direction::Positive, &vocab)?)))
            .collect::<Result<_>>()?
    };
    for (class, top) in &rows {
        if top.exhausted {
            eprintln!("class {class}: only {} features available", top.items.len());
        }
    }
    let body = krr::feature_report(&rows);
    match &cfg.out {
        Some(path) => write_file(path, &body)?,
        None => say(&body),
    }
    Ok(())
}

fn cmd_ablation(o: &Opts) -> Result<()> {
    let cfg = RunConfig::resolve(o)?;
    let masked = cfg.load(NePolicy::Mask)?;
    let raw = match &cfg.corpus_raw {
        Some(_) => Some(cfg.load(NePolicy::Keep)?),
        None => {
            eprintln!("no --corpus-raw given: reporting masked runs only");
            None
        }
    };
    let report = eval::ner_ablation(&cfg.tasks, raw.as_ref(), &masked, &cfg.params())?;
    let mut reports = Vec::new();
    for row in &report.rows {
        if let Some(k) = &row.keep {
            reports.extend([k.validation.clone(), k.test.clone()]);
        }
        reports.extend([row.mask.validation.clone(), row.mask.test.clone()]);
        if let Some(d) = row.delta {
            eprintln!(
                "{}: keep - mask = {:+.2} acc, {:+.2} wF1, {:+.2} mF1 (points)",
                row.task,
                100.0 * d.accuracy,
                100.0 * d.weighted_f1,
                100.0 * d.macro_f1
            );
        }
    }
    write_reports(&reports, &cfg.formats, cfg.out_dir()?, "ablation")
}

fn cmd_report(o: &ReportOpts) -> Result<()> {
    let mut reports = Vec::new();
    for p in &o.inputs {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        reports.extend(eval::read_reports(&text)?);
    }
    let format: ReportFormat = o.format.parse()?;
    let body = eval::render_reports(&reports, format);
    match &o.out {
        Some(path) => write_file(path, &body)?,
        None => say(&body),
    }
    Ok(())
}

fn cmd_synth(o: &SynthOpts) -> Result<()> {
    let [a, b, c] = o.per_stratum[..] else {
        return Err(Error::Invalid("--per-stratum needs three values".into()));
    };
    let split = synthetic::toy_corpus([a, b, c], o.tokens, o.signal, !o.raw, o.seed);
    corpus::write_corpus(&split, &o.out)?;
    say(&format!("{}\n", o.out.display()));
    Ok(())
}

fn workers_of(command: &Command) -> Option<usize> {
    let opts = match command {
        Command::Ingest(o) | Command::Stats(o) | Command::Train(o) | Command::Ablation(o) => o,
        Command::Evaluate(e) => &e.opts,
        Command::Tune(t) => &t.opts,
        Command::Features(f) => &f.opts,
        Command::Split(_) | Command::Report(_) | Command::Synth(_) => return None,
    };
    RunConfig::resolve(opts).ok().and_then(|c| c.workers)
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Ingest(o) => cmd_ingest(o),
        Command::Stats(o) => cmd_stats(o),
        Command::Split(o) => cmd_split(o),
        Command::Train(o) => cmd_train(o),
        Command::Evaluate(o) => cmd_evaluate(o),
        Command::Tune(o) => cmd_tune(o),
        Command::Features(o) => cmd_features(o),
        Command::Ablation(o) => cmd_ablation(o),
        Command::Report(o) => cmd_report(o),
        Command::Synth(o) => cmd_synth(o),
    }
}

/// Runs a parsed command inside a thread pool bounded by `--workers`.
pub fn execute(cli: &Cli) -> Result<()> {
    match workers_of(&cli.command) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}

/// Entry point: parses `args`, runs, and returns the process exit code.
/// Failures are written to stderr as one JSON object.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code });
            let _ = writeln!(std::io::stderr(), "{body}");
            code
        }
    }
}
