//! Desk-scale private synthetic data for counting queries.
//!
//! The synthetic database is a multiset of `m_hat` domain points chosen by the
//! exponential mechanism. Small candidate spaces are enumerated exactly;
//! larger ones fall back to a Metropolis-Hastings walk over the same target
//! distribution, and the result is then flagged `approximate`.

mod search;

use std::collections::BTreeSet;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concepts::{ConceptClass, Domain, Point, Predicate};
use crate::error::{Error, Result};
use crate::mechanisms::{Exponential, PrivacyParams};

pub use search::{exhaustive_scores, QueryIndex};

/// `Q_c(D)`: the fraction of `D` that satisfies `c`.
pub fn query_value(c: &impl Predicate, d: &[Point]) -> Result<Ratio<u64>> {
    if d.is_empty() {
        return Err(Error::domain("query value of an empty database"));
    }
    let hits = d.iter().filter(|&&p| c.eval(p)).count();
    Ok(Ratio::new(hits as u64, d.len() as u64))
}

/// How candidate synthetic databases are searched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateMode {
    /// Exhaustive when the multiset count fits the budget, Metropolis otherwise.
    #[default]
    Auto,
    /// Exhaustive or a resource error.
    Exhaustive,
    Metropolis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SanitizerConfig {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Constant in `m_hat = ceil(kappa * VC / alpha^2 * ln(1 / alpha))`.
    pub kappa: f64,
    /// Overrides the size formula.
    pub target_size: Option<usize>,
    pub max_candidates: u64,
    pub mode: CandidateMode,
    pub metropolis_steps: usize,
}

impl Default for SanitizerConfig {
    fn default() -> Self {
        SanitizerConfig {
            alpha: 0.25,
            beta: 0.2,
            epsilon: 1.0,
            kappa: 1.0,
            target_size: None,
            max_candidates: 1_000_000,
            mode: CandidateMode::Auto,
            metropolis_steps: 20_000,
        }
    }
}

impl SanitizerConfig {
    pub fn new(alpha: f64, beta: f64, epsilon: f64) -> Self {
        SanitizerConfig {
            alpha,
            beta,
            epsilon,
            ..Default::default()
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_target_size(mut self, m_hat: usize) -> Self {
        self.target_size = Some(m_hat);
        self
    }

    fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        if !(self.kappa > 0.0) {
            return Err(Error::domain(format!("kappa must be > 0, got {}", self.kappa)));
        }
        Exponential::new(self.epsilon).map(|_| ())
    }

    /// Synthetic database size for a query class of VC dimension `vc`.
    pub fn size_for(&self, vc: usize) -> usize {
        self.target_size
            .unwrap_or_else(|| target_size(vc, self.alpha, self.kappa))
    }
}

/// `ceil(kappa * vc / alpha^2 * ln(1 / alpha))`, at least 1.
pub fn target_size(vc: usize, alpha: f64, kappa: f64) -> usize {
    let raw = kappa * vc as f64 / (alpha * alpha) * (1.0 / alpha).ln();
    crate::mechanisms::ceil_tolerant(raw).max(1)
}

/// Number of size-`m_hat` multisets over `domain_size` points, saturating.
pub fn multiset_count(m_hat: usize, domain_size: usize) -> u64 {
    if domain_size == 0 {
        return u64::from(m_hat == 0);
    }
    // C(m_hat + k - 1, k - 1) with the smaller of the two as the loop bound.
    let n = (m_hat + domain_size - 1) as u128;
    let r = m_hat.min(domain_size - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) / (i + 1);
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Rough input size below which the accuracy guarantee is not expected:
/// `(VC log2|X| / alpha^3 + ln(1/beta) / alpha) / eps`, constant 1.
pub fn recommended_input_size(vc: usize, domain: Domain, cfg: &SanitizerConfig) -> f64 {
    let log_x = (domain.cardinality() as f64).log2();
    (vc as f64 * log_x / cfg.alpha.powi(3) + (1.0 / cfg.beta).ln() / cfg.alpha) / cfg.epsilon
}

/// A private synthetic database.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDatabase {
    /// Sorted multiset of exactly `target_size` points.
    pub points: Vec<Point>,
    pub target_size: usize,
    /// Set when the Metropolis sampler produced the output.
    pub approximate: bool,
    /// Candidates enumerated, when exhaustive.
    pub candidates: Option<u64>,
    pub declared: PrivacyParams,
    /// The input was smaller than [`recommended_input_size`].
    pub undersized_input: bool,
}

impl SyntheticDatabase {
    /// Distinct points, ascending.
    pub fn support(&self) -> Vec<Point> {
        self.points
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

/// `max_c |Q_c(D) - Q_c(D_hat)|` over every member of `queries`, exactly.
pub fn max_query_error(queries: &ConceptClass, d: &[Point], d_hat: &[Point]) -> Result<f64> {
    let mut worst = Ratio::new(0u64, 1);
    for i in 0..queries.len() {
        let t = queries.table(i);
        let a = query_value(t, d)?;
        let b = query_value(t, d_hat)?;
        let gap = if a > b { a - b } else { b - a };
        worst = worst.max(gap);
    }
    Ok(*worst.numer() as f64 / *worst.denom() as f64)
}

/// Private synthetic database for the counting queries of `queries`.
///
/// The score of a candidate `D_hat` is
/// `-max_c |m_hat * #c(D) - |D| * #c(D_hat)|`, which is
/// `-m_hat * |D| * max_c |Q_c(D) - Q_c(D_hat)|`. Replacing one record of `D`
/// moves `#c(D)` by at most one, so the score has sensitivity `m_hat`, and the
/// mechanism uses weight `exp(eps * score / (2 m_hat))`.
pub fn blr_sanitize<R: Rng + ?Sized>(
    d: &[Point],
    queries: &ConceptClass,
    cfg: &SanitizerConfig,
    rng: &mut R,
) -> Result<SyntheticDatabase> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(Error::domain("cannot sanitize an empty database"));
    }
    queries.check_points(d)?;
    let vc = match cfg.target_size {
        Some(_) => 0,
        None => queries.vc_dimension()?,
    };
    let m_hat = cfg.size_for(vc);
    let domain = queries.domain();
    let index = QueryIndex::new(queries, d);
    let mechanism = Exponential::new(cfg.epsilon)?.with_sensitivity(m_hat as u64);
    let count = multiset_count(m_hat, domain.cardinality());

    let exhaustive = match cfg.mode {
        CandidateMode::Metropolis => false,
        CandidateMode::Exhaustive | CandidateMode::Auto if count <= cfg.max_candidates => true,
        CandidateMode::Exhaustive => {
            return Err(Error::resource(format!(
                "{count} candidate synthetic databases of size {m_hat} over {} points exceed the \
                 budget of {}; lower m_hat (kappa) or use a smaller domain",
                domain.cardinality(),
                cfg.max_candidates
            )))
        }
        CandidateMode::Auto => false,
    };
    let hist = if exhaustive {
        search::exhaustive_select(&index, m_hat, &mechanism, rng)
    } else {
        search::metropolis_select(&index, m_hat, &mechanism, cfg.metropolis_steps, rng)
    };
    let points = search::expand(&hist);
    debug_assert_eq!(points.len(), m_hat);
    Ok(SyntheticDatabase {
        points,
        target_size: m_hat,
        approximate: !exhaustive,
        candidates: exhaustive.then_some(count),
        declared: PrivacyParams::pure(cfg.epsilon),
        undersized_input: (d.len() as f64) < recommended_input_size(vc, domain, cfg),
    })
}

/// Sanitization with respect to `class`'s XOR class, plus the support of the
/// synthetic database.
pub fn sanitize_for_learner<R: Rng + ?Sized>(
    d: &[Point],
    class: &ConceptClass,
    cfg: &SanitizerConfig,
    rng: &mut R,
) -> Result<(SyntheticDatabase, Vec<Point>)> {
    let xor = class.xor_class()?;
    let synthetic = blr_sanitize(d, &xor, cfg, rng)?;
    let support = synthetic.support();
    Ok((synthetic, support))
}
