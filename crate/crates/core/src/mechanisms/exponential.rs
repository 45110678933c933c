use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concepts::{agreements, ConceptClass, LabeledExample};
use crate::error::{Error, Result};

/// How a candidate is drawn from the softmax distribution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Argmax of `log-weight + Gumbel(0, 1)` noise, one uniform per candidate.
    #[default]
    GumbelMax,
    /// Inverse-CDF draw over max-shifted weights, one uniform per draw.
    Cumulative,
}

/// Exponential mechanism over integer scores.
///
/// Candidate `i` is chosen with probability proportional to
/// `exp(epsilon * score_i / (2 * sensitivity))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponential {
    pub epsilon: f64,
    pub sensitivity: u64,
    pub sampler: Sampler,
}

impl Exponential {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!("epsilon must be finite and > 0, got {epsilon}")));
        }
        Ok(Exponential {
            epsilon,
            sensitivity: 1,
            sampler: Sampler::GumbelMax,
        })
    }

    pub fn with_sensitivity(mut self, sensitivity: u64) -> Self {
        self.sensitivity = sensitivity.max(1);
        self
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = sampler;
        self
    }

    #[inline]
    pub fn log_weight(&self, score: i64) -> f64 {
        self.epsilon * score as f64 / (2.0 * self.sensitivity as f64)
    }

    /// Exact selection probabilities (softmax of the log-weights).
    pub fn probabilities(&self, scores: &[i64]) -> Result<Vec<f64>> {
        let top = *scores
            .iter()
            .max()
            .ok_or_else(|| Error::domain("exponential mechanism over an empty candidate set"))?;
        let w: Vec<f64> = scores
            .iter()
            .map(|&s| (self.log_weight(s) - self.log_weight(top)).exp())
            .collect();
        let total: f64 = w.iter().sum();
        Ok(w.into_iter().map(|x| x / total).collect())
    }

    /// Index of the chosen candidate.
    pub fn select<R: Rng + ?Sized>(&self, scores: &[i64], rng: &mut R) -> Result<usize> {
        if scores.is_empty() {
            return Err(Error::domain("exponential mechanism over an empty candidate set"));
        }
        match self.sampler {
            Sampler::GumbelMax => {
                let mut best = GumbelArgmax::new();
                for (i, &s) in scores.iter().enumerate() {
                    best.offer(i, self.log_weight(s), rng);
                }
                Ok(best.index().expect("nonempty"))
            }
            Sampler::Cumulative => {
                let top = self.log_weight(*scores.iter().max().expect("nonempty"));
                let w: Vec<f64> = scores.iter().map(|&s| (self.log_weight(s) - top).exp()).collect();
                let total: f64 = w.iter().sum();
                let mut u = rng.random::<f64>() * total;
                for (i, x) in w.iter().enumerate() {
                    if u < *x {
                        return Ok(i);
                    }
                    u -= x;
                }
                // Rounding left `u` just above the last weight.
                Ok(w.iter().rposition(|&x| x > 0.0).expect("max weight is 1"))
            }
        }
    }
}

/// Streaming Gumbel-max: offer `(index, log-weight)` pairs one at a time.
#[derive(Clone, Debug, Default)]
pub struct GumbelArgmax {
    best: Option<(usize, f64)>,
}

impl GumbelArgmax {
    pub fn new() -> Self {
        GumbelArgmax { best: None }
    }

    /// Returns whether the offered candidate became the current leader.
    #[inline]
    pub fn offer<R: Rng + ?Sized>(&mut self, index: usize, log_weight: f64, rng: &mut R) -> bool {
        let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
        let key = log_weight - (-u.ln()).ln();
        match self.best {
            Some((_, k)) if k >= key => false,
            _ => {
                self.best = Some((index, key));
                true
            }
        }
    }

    pub fn index(&self) -> Option<usize> {
        self.best.map(|(i, _)| i)
    }
}

/// `q(S, h)` for every candidate: the number of records of `S` that `h` labels correctly.
pub fn agreement_scores(class: &ConceptClass, candidates: &[usize], sample: &[LabeledExample]) -> Vec<i64> {
    candidates
        .iter()
        .map(|&i| agreements(class.table(i), sample) as i64)
        .collect()
}

/// Picks a member of `class` from `candidates` by the exponential mechanism
/// with the agreement score. Returns the member's class index.
pub fn select_hypothesis<R: Rng + ?Sized>(
    mechanism: &Exponential,
    class: &ConceptClass,
    candidates: &[usize],
    sample: &[LabeledExample],
    rng: &mut R,
) -> Result<usize> {
    crate::concepts::require_labeled(sample)?;
    let scores = agreement_scores(class, candidates, sample);
    Ok(candidates[mechanism.select(&scores, rng)?])
}

/// `min(1, |H| exp(-epsilon * gap * m / 2))`: the chance the mechanism picks a
/// candidate whose empirical error exceeds the best one's by more than `gap`.
pub fn utility_bound(candidates: usize, epsilon: f64, m: usize, gap: f64) -> f64 {
    (candidates as f64 * (-epsilon * gap * m as f64 / 2.0).exp()).min(1.0)
}
