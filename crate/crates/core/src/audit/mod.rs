//! Empirical privacy auditing on discrete outcome spaces.
//!
//! A mechanism is run many times on both databases of a neighbouring pair and
//! the two outcome histograms are compared event by event. The reported
//! `epsilon_hat` uses Clopper-Pearson bounds (lower on the numerator, upper
//! on the denominator), so it is a lower-bound witness for the true privacy
//! loss, never a proof of privacy.

mod stats;

use std::collections::BTreeMap;
use std::fmt::Debug;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{Mechanism, PrivacyParams};
use crate::rng::derive_seed;

pub use stats::{chi_square_test, clopper_pearson, ChiSquareResult};

/// Two equal-length databases differing at most at `diff_index`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborPair<R> {
    pub d1: Vec<R>,
    pub d2: Vec<R>,
    pub diff_index: usize,
}

impl<R: Clone> NeighborPair<R> {
    pub fn swapped(&self) -> Self {
        NeighborPair {
            d1: self.d2.clone(),
            d2: self.d1.clone(),
            diff_index: self.diff_index,
        }
    }
}

/// `(d, d with record index replaced)`.
pub fn neighbors<R: Clone>(d: &[R], index: usize, replacement: R) -> Result<NeighborPair<R>> {
    if index >= d.len() {
        return Err(Error::domain(format!(
            "neighbor index {index} out of range for {} records",
            d.len()
        )));
    }
    let mut d2 = d.to_vec();
    d2[index] = replacement;
    Ok(NeighborPair {
        d1: d.to_vec(),
        d2,
        diff_index: index,
    })
}

/// Which events the estimator scans.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventScan {
    #[default]
    Singletons,
    /// Every nonempty proper subset of the observed outcomes (at most 12 outcomes).
    Subsets,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditConfig {
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Two-sided Clopper-Pearson level.
    pub confidence: f64,
    pub events: EventScan,
    /// Distinct outcomes allowed before the audit gives up.
    pub max_outcomes: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            delta: 0.0,
            trials: 100_000,
            seed: 0,
            confidence: 0.95,
            events: EventScan::Singletons,
            max_outcomes: 1 << 16,
        }
    }
}

impl AuditConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        AuditConfig {
            trials,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCount {
    pub outcome: String,
    pub count1: u64,
    pub count2: u64,
}

/// The event and direction that produced an estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub event: Vec<String>,
    /// `true` for `Pr[M(D1) in F]` over `Pr[M(D2) in F]`.
    pub forward: bool,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub mechanism: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub declared: Option<PrivacyParams>,
    /// Confidence-adjusted estimate, clamped at 0.
    pub epsilon_hat: f64,
    pub witness: Option<Witness>,
    /// Same scan on raw frequencies; infinite when an event never occurs on one side.
    pub epsilon_point: f64,
    pub point_witness: Option<Witness>,
    pub delta_used: f64,
    pub trials: usize,
    pub seed: u64,
    pub confidence_method: String,
    pub confidence_level: f64,
    pub histogram: Vec<OutcomeCount>,
}

impl AuditReport {
    /// Whether `epsilon_hat <= epsilon + slack`.
    pub fn within(&self, epsilon: f64, slack: f64) -> bool {
        self.epsilon_hat <= epsilon + slack
    }
}

/// Runs `mechanism` `cfg.trials` times on each side of `pair` and estimates
/// epsilon. Trial `j` uses the same derived seed on both sides, so swapping
/// the pair swaps the histograms and leaves the estimate unchanged.
pub fn estimate_epsilon<R: Sync, M: Mechanism<R>>(
    mechanism: &M,
    pair: &NeighborPair<R>,
    cfg: &AuditConfig,
) -> Result<AuditReport> {
    let (o1, o2) = run_pair(mechanism, pair, cfg.trials, cfg.seed)?;
    let mut report = estimate_from_outcomes(&o1, &o2, cfg)?;
    report.mechanism = mechanism.name();
    report.declared = Some(mechanism.declared_privacy());
    Ok(report)
}

/// Outcomes of `trials` seed-coupled runs on each side of `pair`.
pub fn run_pair<R: Sync, M: Mechanism<R>>(
    mechanism: &M,
    pair: &NeighborPair<R>,
    trials: usize,
    seed: u64,
) -> Result<(Vec<M::Outcome>, Vec<M::Outcome>)> {
    if pair.d1.len() != pair.d2.len() {
        return Err(Error::domain("neighboring databases must have equal length"));
    }
    let runs: Vec<(M::Outcome, M::Outcome)> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let s = derive_seed(seed, j as u64);
            let a = mechanism.run_seeded(&pair.d1, s).map_err(|e| e.in_trial(j))?;
            let b = mechanism.run_seeded(&pair.d2, s).map_err(|e| e.in_trial(j))?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    Ok(runs.into_iter().unzip())
}

/// Whether every seed-coupled run gives the same outcome on both sides.
pub fn coupled_identical<R: Sync, M: Mechanism<R>>(
    mechanism: &M,
    pair: &NeighborPair<R>,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    let (a, b) = run_pair(mechanism, pair, trials, seed)?;
    Ok(a == b)
}

/// Epsilon estimate from two outcome samples of equal size.
pub fn estimate_from_outcomes<O: Ord + Debug>(o1: &[O], o2: &[O], cfg: &AuditConfig) -> Result<AuditReport> {
    if o1.len() != o2.len() || o1.is_empty() {
        return Err(Error::domain("audit needs two nonempty samples of equal size"));
    }
    let n = o1.len() as u64;
    let mut hist: BTreeMap<&O, (u64, u64)> = BTreeMap::new();
    for o in o1 {
        hist.entry(o).or_default().0 += 1;
    }
    for o in o2 {
        hist.entry(o).or_default().1 += 1;
    }
    if hist.len() > cfg.max_outcomes {
        return Err(Error::resource(format!(
            "{} distinct outcomes exceed the audit limit of {}; coarsen the outcome space",
            hist.len(),
            cfg.max_outcomes
        )));
    }
    let labels: Vec<String> = hist.keys().map(|o| format!("{o:?}")).collect();
    let counts: Vec<(u64, u64)> = hist.values().copied().collect();

    let events: Vec<Vec<usize>> = match cfg.events {
        EventScan::Singletons => (0..counts.len()).map(|i| vec![i]).collect(),
        EventScan::Subsets => {
            let k = counts.len();
            if k > 12 {
                return Err(Error::resource(format!(
                    "subset scan over {k} outcomes; at most 12 are supported"
                )));
            }
            (1..(1u32 << k) - 1)
                .map(|mask| (0..k).filter(|&i| mask >> i & 1 == 1).collect())
                .collect()
        }
    };

    let mut best: Option<Witness> = None;
    let mut best_point: Option<Witness> = None;
    for ev in &events {
        let c1: u64 = ev.iter().map(|&i| counts[i].0).sum();
        let c2: u64 = ev.iter().map(|&i| counts[i].1).sum();
        for (forward, num, den) in [(true, c1, c2), (false, c2, c1)] {
            let (lo, _) = clopper_pearson(num, n, cfg.confidence);
            let (_, hi) = clopper_pearson(den, n, cfg.confidence);
            let adj = lo - cfg.delta;
            if adj > 0.0 {
                let v = (adj / hi).ln();
                if best.as_ref().is_none_or(|w| v > w.value) {
                    best = Some(witness(ev, &labels, forward, v));
                }
            }
            let p_num = num as f64 / n as f64 - cfg.delta;
            if p_num > 0.0 {
                let v = (p_num / (den as f64 / n as f64)).ln();
                if best_point.as_ref().is_none_or(|w| v > w.value) {
                    best_point = Some(witness(ev, &labels, forward, v));
                }
            }
        }
    }
    let clamp = |w: &Option<Witness>| w.as_ref().map_or(0.0, |w| w.value.max(0.0));
    Ok(AuditReport {
        mechanism: String::new(),
        declared: None,
        epsilon_hat: clamp(&best),
        witness: best,
        epsilon_point: clamp(&best_point),
        point_witness: best_point,
        delta_used: cfg.delta,
        trials: o1.len(),
        seed: cfg.seed,
        confidence_method: "clopper-pearson".into(),
        confidence_level: cfg.confidence,
        histogram: labels
            .into_iter()
            .zip(counts)
            .map(|(outcome, (count1, count2))| OutcomeCount {
                outcome,
                count1,
                count2,
            })
            .collect(),
    })
}

fn witness(ev: &[usize], labels: &[String], forward: bool, value: f64) -> Witness {
    Witness {
        event: ev.iter().map(|&i| labels[i].clone()).collect(),
        forward,
        value,
    }
}
