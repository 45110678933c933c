//! Learners: non-private ERM, the exponential-mechanism private learner, the
//! sanitizer-based semi-supervised learner, and the label-boosting
//! transformation with its privacy-boosting wrapper.

mod basic;
mod boost;
mod generic;
mod privacy_boost;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::concepts::{ConceptClass, LabeledExample, PartiallyLabeledDatabase, Point};
use crate::error::{Error, Result};
use crate::mechanisms::{Mechanism, PrivacyParams};
use crate::rng::PrivRng;

pub use basic::{generic_private_size, ErmLearner, GenericPrivateLearner};
pub use boost::{
    growth_lower_bound, label_boost_procedure, labeled_threshold, plan_label_boost, ProcedureThen,
    unlabeled_requirement, BoostPlan, BoostSchedule, LabelBoost, LabelBoostConfig,
    PlannedIteration, ProcedureOutput,
};
pub use generic::{generic_labeled_size, generic_unlabeled_size, GenericLearner};
pub use privacy_boost::PrivacyBoost;

/// Labeled and unlabeled record counts a learner expects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSizes {
    pub labeled: usize,
    pub unlabeled: usize,
}

impl SampleSizes {
    pub fn total(&self) -> usize {
        self.labeled + self.unlabeled
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyStage {
    pub stage: String,
    pub epsilon: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SanitizerSummary {
    pub target_size: usize,
    pub support_size: usize,
    pub approximate: bool,
    pub candidates: Option<u64>,
}

/// One pass of the label-boosting loop as executed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostIteration {
    pub i: usize,
    pub alpha_i: f64,
    pub beta_i: f64,
    pub s_before: usize,
    pub v: usize,
    pub t_kept: usize,
    pub s_kept: usize,
    pub s_after: usize,
    pub candidates: usize,
    pub hypothesis: usize,
}

/// Audit metadata attached to every learner output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub learner: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sanitizer: Option<SanitizerSummary>,
    /// Size of the candidate set the final selection ran over.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub iterations: Vec<BoostIteration>,
    /// Records handed to the base learner after the boosting loop.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_input: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<Transcript>>,
    /// Indices queried from a label oracle, in order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub queries: Vec<usize>,
    /// Declared privacy after each construction step, innermost first.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub privacy: Vec<PrivacyStage>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Transcript {
    pub fn new(learner: impl Into<String>) -> Self {
        Transcript {
            learner: learner.into(),
            ..Default::default()
        }
    }

    pub(crate) fn stage(&mut self, stage: impl Into<String>, p: PrivacyParams) {
        self.privacy.push(PrivacyStage {
            stage: stage.into(),
            epsilon: p.epsilon,
            delta: p.delta,
        });
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerOutput {
    /// Index of the output hypothesis in the learner's class.
    pub hypothesis: usize,
    pub labeled_used: usize,
    pub unlabeled_used: usize,
    pub transcript: Transcript,
}

/// A (possibly private) semi-supervised learner for a fixed class.
///
/// Input is a labeled sample `S` and unlabeled points `D`. Every learner here
/// is proper: the output indexes a member of [`Learner::class`].
pub trait Learner: Send + Sync {
    fn name(&self) -> String;

    fn class(&self) -> &Arc<ConceptClass>;

    /// `None` for non-private learners.
    fn declared_privacy(&self) -> Option<PrivacyParams>;

    fn sample_sizes(&self) -> SampleSizes;

    fn learn(&self, s: &[LabeledExample], d: &[Point], rng: &mut PrivRng) -> Result<LearnerOutput>;

    /// Runs on a database whose labeled records form a prefix.
    fn learn_database(&self, db: &PartiallyLabeledDatabase, rng: &mut PrivRng) -> Result<LearnerOutput> {
        let (s, d) = split_prefix(db.records())?;
        self.learn(s, &d, rng)
    }
}

impl<L: Learner + ?Sized> Learner for Arc<L> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn class(&self) -> &Arc<ConceptClass> {
        (**self).class()
    }

    fn declared_privacy(&self) -> Option<PrivacyParams> {
        (**self).declared_privacy()
    }

    fn sample_sizes(&self) -> SampleSizes {
        (**self).sample_sizes()
    }

    fn learn(&self, s: &[LabeledExample], d: &[Point], rng: &mut PrivRng) -> Result<LearnerOutput> {
        (**self).learn(s, d, rng)
    }
}

impl<L: Learner + ?Sized> Learner for Box<L> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn class(&self) -> &Arc<ConceptClass> {
        (**self).class()
    }

    fn declared_privacy(&self) -> Option<PrivacyParams> {
        (**self).declared_privacy()
    }

    fn sample_sizes(&self) -> SampleSizes {
        (**self).sample_sizes()
    }

    fn learn(&self, s: &[LabeledExample], d: &[Point], rng: &mut PrivRng) -> Result<LearnerOutput> {
        (**self).learn(s, d, rng)
    }
}

/// Splits records into the labeled prefix and the points of the unlabeled rest.
pub fn split_prefix(records: &[LabeledExample]) -> Result<(&[LabeledExample], Vec<Point>)> {
    let k = records.iter().take_while(|r| r.is_labeled()).count();
    let (s, rest) = records.split_at(k);
    if let Some(i) = rest.iter().position(|r| r.is_labeled()) {
        return Err(Error::domain(format!(
            "labeled record at position {} follows unlabeled ones",
            k + i
        )));
    }
    Ok((s, rest.iter().map(|r| r.point).collect()))
}

/// A learner viewed as a mechanism over its whole (prefix-labeled) input,
/// with the hypothesis index as outcome.
#[derive(Clone, Debug)]
pub struct LearnerMechanism<L>(pub L);

impl<L: Learner> Mechanism<LabeledExample> for LearnerMechanism<L> {
    type Outcome = usize;

    fn name(&self) -> String {
        self.0.name()
    }

    fn declared_privacy(&self) -> PrivacyParams {
        self.0
            .declared_privacy()
            .unwrap_or(PrivacyParams { epsilon: f64::INFINITY, delta: 0.0 })
    }

    fn run(&self, db: &[LabeledExample], rng: &mut PrivRng) -> Result<usize> {
        let (s, d) = split_prefix(db)?;
        Ok(self.0.learn(s, &d, rng)?.hypothesis)
    }
}

pub(crate) fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

#[cfg(test)]
mod tests;
