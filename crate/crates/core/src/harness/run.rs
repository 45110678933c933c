use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{build_learner, BuiltLearner, ExperimentConfig, TargetSpec};
use crate::active::run_active;
use crate::concepts::{exact_error, label_with, ConceptClass, LabeledExample};
use crate::error::{Error, Result};
use crate::learners::{LearnerOutput, PrivacyStage};
use crate::mechanisms::{utility_bound, PrivacyParams};
use crate::rng::{derive_seed, rng_from_seed};

pub const TRIALS_SCHEMA: &str = "pssl.trials.v1";
pub const CURVE_SCHEMA: &str = "pssl.curve.v1";

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sweep_value: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub target: usize,
    pub hypothesis: usize,
    pub error: f64,
    pub failed: bool,
    pub proper: bool,
    pub labeled_used: usize,
    pub configured_m: usize,
    pub unlabeled_used: usize,
    pub iterations: usize,
    #[serde(skip)]
    pub wall_ms: f64,
}

/// Per sweep value (or once, without a sweep).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sweep_value: Option<f64>,
    pub learner: String,
    pub alpha: f64,
    pub beta: f64,
    pub error_threshold: f64,
    pub trials: usize,
    pub failures: usize,
    pub failure_fraction: f64,
    /// Binomial standard deviation of the failure fraction at rate `beta`.
    pub failure_sigma: f64,
    pub mean_error: f64,
    pub max_error: f64,
    pub mean_labeled_used: f64,
    pub max_labeled_used: usize,
    pub configured_m: usize,
    pub mean_unlabeled_used: f64,
    pub max_iterations: usize,
    pub all_proper: bool,
    /// `|H| exp(-eps alpha m / 2)` for learners ending in one selection over the class.
    pub bound: Option<f64>,
    pub declared: Option<PrivacyParams>,
    pub privacy_fold: Vec<PrivacyStage>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub schema: String,
    pub class: String,
    pub root_seed: u64,
    pub sweep_axis: Option<String>,
    pub aggregates: Vec<Aggregate>,
    #[serde(skip)]
    pub trials: Vec<TrialRecord>,
    pub wall_time_s: f64,
}

/// A row of the sample-complexity table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub value: f64,
    pub failure_fraction: f64,
    pub failure_sigma: f64,
    pub mean_error: f64,
    pub mean_labeled_used: f64,
    pub configured_m: usize,
    pub bound: Option<f64>,
}

impl TrialReport {
    pub fn curve(&self) -> Vec<CurveRow> {
        self.aggregates
            .iter()
            .filter_map(|a| {
                Some(CurveRow {
                    value: a.sweep_value?,
                    failure_fraction: a.failure_fraction,
                    failure_sigma: a.failure_sigma,
                    mean_error: a.mean_error,
                    mean_labeled_used: a.mean_labeled_used,
                    configured_m: a.configured_m,
                    bound: a.bound,
                })
            })
            .collect()
    }
}

/// Runs every trial of `cfg` (each sweep value in turn) and writes the
/// configured outputs. Trial `j` uses seed `derive_seed(root_seed, j)` at
/// every sweep value.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TrialReport> {
    cfg.validate()?;
    let start = Instant::now();
    let class = cfg.class.build()?;
    cfg.distribution.validate(class.domain())?;
    if let TargetSpec::Fixed(t) = cfg.target {
        if t >= class.len() {
            return Err(Error::Config(format!("target {t} outside a class of {}", class.len())));
        }
    }
    let points: Vec<(Option<f64>, ExperimentConfig)> = match &cfg.sweep {
        None => vec![(None, cfg.clone())],
        Some(s) => s
            .values
            .iter()
            .map(|&v| Ok((Some(v), cfg.at(s.axis, v)?)))
            .collect::<Result<_>>()?,
    };
    let mut aggregates = Vec::new();
    let mut trials = Vec::new();
    for (value, point) in &points {
        point.validate()?;
        let (agg, rows) = run_point(point, &class, *value)?;
        aggregates.push(agg);
        trials.extend(rows);
    }
    let report = TrialReport {
        schema: TRIALS_SCHEMA.into(),
        class: class.id().to_string(),
        root_seed: cfg.root_seed,
        sweep_axis: cfg.sweep.as_ref().map(|s| s.axis.name().to_string()),
        aggregates,
        trials,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = &cfg.output.dir {
        write_outputs(&report, dir, cfg)?;
    }
    Ok(report)
}

/// The per-value table of a swept experiment.
pub fn sample_complexity_curve(cfg: &ExperimentConfig) -> Result<Vec<CurveRow>> {
    if cfg.sweep.is_none() {
        return Err(Error::Config("sample-complexity curve needs a sweep".into()));
    }
    Ok(run_experiment(cfg)?.curve())
}

fn run_point(
    cfg: &ExperimentConfig,
    class: &std::sync::Arc<ConceptClass>,
    value: Option<f64>,
) -> Result<(Aggregate, Vec<TrialRecord>)> {
    let built = build_learner(&cfg.learner, class, cfg.alpha, cfg.beta)?;
    let threshold = cfg.fail_factor * cfg.alpha;
    let outcomes: Vec<Result<(TrialRecord, LearnerOutput)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|j| run_trial(cfg, class, &built, value, threshold, j).map_err(|e| e.in_trial(j)))
        .collect();
    let mut rows = Vec::with_capacity(cfg.trials);
    let mut first = None;
    for o in outcomes {
        let (row, out) = o?;
        first.get_or_insert(out);
        rows.push(row);
    }
    let first = first.expect("trials >= 1");
    let n = rows.len() as f64;
    let failures = rows.iter().filter(|r| r.failed).count();
    let configured_m = built.configured_m();
    let (declared, bound) = match &built {
        BuiltLearner::Passive { learner, selection, .. } => (
            learner.declared_privacy(),
            selection.map(|(h, eps)| utility_bound(h, eps, configured_m, cfg.alpha)),
        ),
        BuiltLearner::Active { learner } => (learner.declared_privacy(), None),
    };
    let agg = Aggregate {
        sweep_value: value,
        learner: built.name(),
        alpha: cfg.alpha,
        beta: cfg.beta,
        error_threshold: threshold,
        trials: rows.len(),
        failures,
        failure_fraction: failures as f64 / n,
        failure_sigma: (cfg.beta * (1.0 - cfg.beta) / n).sqrt(),
        mean_error: rows.iter().map(|r| r.error).sum::<f64>() / n,
        max_error: rows.iter().map(|r| r.error).fold(0.0, f64::max),
        mean_labeled_used: rows.iter().map(|r| r.labeled_used as f64).sum::<f64>() / n,
        max_labeled_used: rows.iter().map(|r| r.labeled_used).max().unwrap_or(0),
        configured_m,
        mean_unlabeled_used: rows.iter().map(|r| r.unlabeled_used as f64).sum::<f64>() / n,
        max_iterations: rows.iter().map(|r| r.iterations).max().unwrap_or(0),
        all_proper: rows.iter().all(|r| r.proper),
        bound,
        declared,
        privacy_fold: first.transcript.privacy.clone(),
        notes: first.transcript.notes.clone(),
    };
    Ok((agg, rows))
}

fn run_trial(
    cfg: &ExperimentConfig,
    class: &ConceptClass,
    built: &BuiltLearner,
    value: Option<f64>,
    threshold: f64,
    j: usize,
) -> Result<(TrialRecord, LearnerOutput)> {
    let start = Instant::now();
    let seed = derive_seed(cfg.root_seed, j as u64);
    let mut rng = rng_from_seed(seed);
    let target = match cfg.target {
        TargetSpec::Fixed(t) => t,
        TargetSpec::Random => rng.random_range(0..class.len()),
    };
    let sampler = cfg.distribution.sampler(class.domain())?;
    let label = |p| class.eval(target, p);
    let out = match built {
        BuiltLearner::Passive { learner, sizes, .. } => {
            let s = label_with(&sampler.sample_n(sizes.labeled, &mut rng), label);
            let d = sampler.sample_n(sizes.unlabeled, &mut rng);
            learner.learn(&s, &d, &mut rng)?
        }
        BuiltLearner::Active { learner } => {
            let pool: Vec<LabeledExample> = label_with(&sampler.sample_n(learner.pool_size(), &mut rng), label);
            run_active(learner.as_ref(), &pool, learner.budget(), &mut rng)?.output
        }
    };
    let configured_m = built.configured_m();
    if out.labeled_used > configured_m {
        return Err(Error::Protocol(format!(
            "learner read {} labels with a budget of {configured_m}",
            out.labeled_used
        )));
    }
    let proper = out.hypothesis < class.len();
    let error = if proper {
        exact_error(class.table(out.hypothesis), class.table(target), &cfg.distribution, class.domain())?
    } else {
        1.0
    };
    let row = TrialRecord {
        sweep_value: value,
        trial: j,
        seed,
        target,
        hypothesis: out.hypothesis,
        error,
        failed: error > threshold,
        proper,
        labeled_used: out.labeled_used,
        configured_m,
        unlabeled_used: out.unlabeled_used,
        iterations: out.transcript.iterations.len(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((row, out))
}

fn csv_with_schema<W: Write, T: Serialize>(mut w: W, schema: &str, rows: &[T]) -> Result<()> {
    writeln!(w, "# schema={schema}")?;
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// Per-trial CSV: a `# schema=` line, a header row, then rows in trial order.
pub fn write_trials_csv<W: Write>(w: W, report: &TrialReport) -> Result<()> {
    if report.trials.is_empty() {
        let mut w = w;
        writeln!(w, "# schema={TRIALS_SCHEMA}")?;
        return Ok(());
    }
    csv_with_schema(w, TRIALS_SCHEMA, &report.trials)
}

pub fn write_curve_csv<W: Write>(w: W, rows: &[CurveRow]) -> Result<()> {
    if rows.is_empty() {
        let mut w = w;
        writeln!(w, "# schema={CURVE_SCHEMA}")?;
        writeln!(w, "value,failure_fraction,failure_sigma,mean_error,mean_labeled_used,configured_m,bound")?;
        return Ok(());
    }
    csv_with_schema(w, CURVE_SCHEMA, rows)
}

/// Writes the trials CSV, the JSON aggregate and (for sweeps) the curve CSV
/// under `dir`. Returns the paths written.
pub fn write_outputs(report: &TrialReport, dir: &Path, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join(&cfg.output.trials_csv);
    write_trials_csv(std::io::BufWriter::new(std::fs::File::create(&path)?), report)?;
    written.push(path);
    let path = dir.join(&cfg.output.summary_json);
    std::fs::write(&path, serde_json::to_string_pretty(report)? + "\n")?;
    written.push(path);
    if report.sweep_axis.is_some() {
        let path = dir.join(&cfg.output.curve_csv);
        write_curve_csv(std::io::BufWriter::new(std::fs::File::create(&path)?), &report.curve())?;
        written.push(path);
    }
    Ok(written)
}

/// Aligned text table of the aggregates.
pub fn summary_table(report: &TrialReport) -> String {
    let header = ["value", "trials", "fail", "fail_frac", "mean_err", "labeled", "m", "bound"];
    let rows: Vec<[String; 8]> = report
        .aggregates
        .iter()
        .map(|a| {
            [
                a.sweep_value.map_or("-".into(), |v| v.to_string()),
                a.trials.to_string(),
                a.failures.to_string(),
                format!("{:.4}", a.failure_fraction),
                format!("{:.4}", a.mean_error),
                format!("{:.1}", a.mean_labeled_used),
                a.configured_m.to_string(),
                a.bound.map_or("-".into(), |b| format!("{b:.3e}")),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = String::new();
    if let Some(a) = report.aggregates.first() {
        out.push_str(&format!("{} on {}\n", a.learner, report.class));
    }
    out.push_str(&line(header.to_vec()));
    out.push('\n');
    for r in &rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}
