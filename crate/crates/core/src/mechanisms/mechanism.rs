use std::fmt::Debug;
use std::sync::Arc;

use rand::Rng;

use super::exponential::{select_hypothesis, Exponential};
use super::privacy::PrivacyParams;
use crate::concepts::{ConceptClass, LabeledExample};
use crate::error::Result;
use crate::rng::{rng_from_seed, PrivRng};

/// A randomized map from databases of `R` records to a discrete outcome.
///
/// `declared_privacy` is the claim made about the mechanism. Nothing here
/// enforces it; the audit module is how it gets checked.
pub trait Mechanism<R>: Send + Sync {
    type Outcome: Clone + Ord + Debug + Send;

    fn name(&self) -> String;

    fn declared_privacy(&self) -> PrivacyParams;

    fn run(&self, db: &[R], rng: &mut PrivRng) -> Result<Self::Outcome>;

    fn run_seeded(&self, db: &[R], seed: u64) -> Result<Self::Outcome> {
        self.run(db, &mut rng_from_seed(seed))
    }
}

impl<R, M: Mechanism<R> + ?Sized> Mechanism<R> for Arc<M> {
    type Outcome = M::Outcome;

    fn name(&self) -> String {
        (**self).name()
    }

    fn declared_privacy(&self) -> PrivacyParams {
        (**self).declared_privacy()
    }

    fn run(&self, db: &[R], rng: &mut PrivRng) -> Result<Self::Outcome> {
        (**self).run(db, rng)
    }
}

/// Randomized response: each bit is reported truthfully with probability
/// `e^eps / (1 + e^eps)` and flipped otherwise.
#[derive(Clone, Copy, Debug)]
pub struct RandomizedResponse {
    pub epsilon: f64,
}

impl RandomizedResponse {
    pub fn flip_probability(&self) -> f64 {
        1.0 / (1.0 + self.epsilon.exp())
    }
}

impl Mechanism<bool> for RandomizedResponse {
    type Outcome = Vec<bool>;

    fn name(&self) -> String {
        format!("randomized_response(eps={})", self.epsilon)
    }

    fn declared_privacy(&self) -> PrivacyParams {
        PrivacyParams::pure(self.epsilon)
    }

    fn run(&self, db: &[bool], rng: &mut PrivRng) -> Result<Vec<bool>> {
        let q = self.flip_probability();
        Ok(db.iter().map(|&b| b ^ rng.random_bool(q)).collect())
    }
}

/// Ignores its input.
#[derive(Clone, Debug)]
pub struct Constant<O>(pub O);

impl<R, O: Clone + Ord + Debug + Send + Sync> Mechanism<R> for Constant<O> {
    type Outcome = O;

    fn name(&self) -> String {
        format!("constant({:?})", self.0)
    }

    fn declared_privacy(&self) -> PrivacyParams {
        PrivacyParams::pure(0.0)
    }

    fn run(&self, _db: &[R], _rng: &mut PrivRng) -> Result<O> {
        Ok(self.0.clone())
    }
}

/// Exponential mechanism over a fixed list of class members, scored by
/// agreement with a labeled sample. Outcome is the chosen class index.
#[derive(Clone, Debug)]
pub struct HypothesisSelection {
    pub class: Arc<ConceptClass>,
    pub candidates: Vec<usize>,
    pub mechanism: Exponential,
}

impl HypothesisSelection {
    /// Selection over the whole class.
    pub fn over_class(class: Arc<ConceptClass>, mechanism: Exponential) -> Self {
        let candidates = (0..class.len()).collect();
        HypothesisSelection {
            class,
            candidates,
            mechanism,
        }
    }
}

impl Mechanism<LabeledExample> for HypothesisSelection {
    type Outcome = usize;

    fn name(&self) -> String {
        format!(
            "exponential(eps={}, |H|={})",
            self.mechanism.epsilon,
            self.candidates.len()
        )
    }

    fn declared_privacy(&self) -> PrivacyParams {
        PrivacyParams::pure(self.mechanism.epsilon)
    }

    fn run(&self, db: &[LabeledExample], rng: &mut PrivRng) -> Result<usize> {
        select_hypothesis(&self.mechanism, &self.class, &self.candidates, db, rng)
    }
}
