use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::domain::{Domain, Point};
use super::measure::Predicate;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// A distribution over domain points: `{"type":"uniform"}` or
/// `{"type":"table","weights":[...]}` with one weight per point in linear order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Distribution {
    Uniform,
    Table { weights: Vec<f64> },
}

impl Distribution {
    pub fn validate(&self, domain: Domain) -> Result<()> {
        let Distribution::Table { weights } = self else {
            return Ok(());
        };
        if weights.len() != domain.cardinality() {
            return Err(Error::domain(format!(
                "table has {} weights, domain has {} points",
                weights.len(),
                domain.cardinality()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::domain("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(())
    }

    /// Probability mass of point `p`.
    pub fn mass(&self, domain: Domain, p: Point) -> f64 {
        match self {
            Distribution::Uniform => 1.0 / domain.cardinality() as f64,
            Distribution::Table { weights } => weights[p.index()],
        }
    }

    pub fn sampler(&self, domain: Domain) -> Result<PointSampler> {
        self.validate(domain)?;
        let inner = match self {
            Distribution::Uniform => SamplerKind::Uniform(domain.cardinality() as u32),
            Distribution::Table { weights } => SamplerKind::Weighted(
                WeightedIndex::new(weights).map_err(|e| Error::domain(e.to_string()))?,
            ),
        };
        Ok(PointSampler { inner })
    }
}

#[derive(Clone, Debug)]
enum SamplerKind {
    Uniform(u32),
    Weighted(WeightedIndex<f64>),
}

/// Draws i.i.d. points from a validated distribution.
#[derive(Clone, Debug)]
pub struct PointSampler {
    inner: SamplerKind,
}

impl PointSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match &self.inner {
            SamplerKind::Uniform(n) => Point(rng.random_range(0..*n)),
            SamplerKind::Weighted(w) => Point(w.sample(rng) as u32),
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Point> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// `err_mu(c, h)` summed exactly over the domain.
pub fn exact_error(h: &impl Predicate, c: &impl Predicate, mu: &Distribution, domain: Domain) -> Result<f64> {
    mu.validate(domain)?;
    Ok(domain
        .points()
        .filter(|&p| h.eval(p) != c.eval(p))
        .map(|p| mu.mass(domain, p))
        .sum())
}

/// Monte Carlo or exact generalization error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub estimate: f64,
    /// Two-sided Hoeffding half-width at 95% confidence; zero when exact.
    pub half_width: f64,
    pub exact: bool,
}

/// Estimates `err_mu(c, h)` from `trials` i.i.d. draws.
pub fn generalization_error(
    h: &impl Predicate,
    c: &impl Predicate,
    mu: &Distribution,
    domain: Domain,
    trials: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::domain("need at least one Monte Carlo trial"));
    }
    let sampler = mu.sampler(domain)?;
    let mut rng = rng_from_seed(seed);
    let wrong = (0..trials)
        .filter(|_| {
            let p = sampler.sample(&mut rng);
            h.eval(p) != c.eval(p)
        })
        .count();
    Ok(ErrorEstimate {
        estimate: wrong as f64 / trials as f64,
        half_width: ((2.0f64 / 0.05).ln() / (2.0 * trials as f64)).sqrt(),
        exact: false,
    })
}
