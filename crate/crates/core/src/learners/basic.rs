use std::sync::Arc;

use super::{LearnerOutput, Learner, SampleSizes, Transcript};
use crate::concepts::{mistakes, require_labeled, ConceptClass, LabeledExample, Point};
use crate::error::Result;
use crate::mechanisms::{select_hypothesis, Exponential, PrivacyParams};
use crate::rng::PrivRng;

/// Non-private empirical risk minimiser: the lowest-index member with the
/// fewest mistakes on `S`.
#[derive(Clone, Debug)]
pub struct ErmLearner {
    class: Arc<ConceptClass>,
    m: usize,
}

impl ErmLearner {
    pub fn new(class: Arc<ConceptClass>, m: usize) -> Self {
        ErmLearner { class, m }
    }

    pub fn minimize(class: &ConceptClass, s: &[LabeledExample]) -> Result<usize> {
        require_labeled(s)?;
        Ok((0..class.len())
            .min_by_key(|&i| mistakes(class.table(i), s))
            .expect("classes are nonempty"))
    }
}

impl Learner for ErmLearner {
    fn name(&self) -> String {
        "erm".into()
    }

    fn class(&self) -> &Arc<ConceptClass> {
        &self.class
    }

    fn declared_privacy(&self) -> Option<PrivacyParams> {
        None
    }

    fn sample_sizes(&self) -> SampleSizes {
        SampleSizes { labeled: self.m, unlabeled: 0 }
    }

    fn learn(&self, s: &[LabeledExample], _d: &[Point], _rng: &mut PrivRng) -> Result<LearnerOutput> {
        let hypothesis = Self::minimize(&self.class, s)?;
        let mut transcript = Transcript::new(self.name());
        transcript.candidates = Some(self.class.len());
        Ok(LearnerOutput {
            hypothesis,
            labeled_used: s.len(),
            unlabeled_used: 0,
            transcript,
        })
    }
}

/// `ceil((2 / (eps alpha)) (ln|C| + ln(1/beta)))`: labeled records for the
/// exponential-mechanism learner to be `(alpha, beta)`-accurate on its sample.
pub fn generic_private_size(class_size: usize, alpha: f64, beta: f64, epsilon: f64) -> usize {
    let raw = 2.0 / (epsilon * alpha) * ((class_size as f64).ln() + (1.0 / beta).ln());
    crate::mechanisms::ceil_tolerant(raw).max(1)
}

/// Exponential mechanism over the whole class with the agreement score.
/// Pure `eps`-private and proper.
#[derive(Clone, Debug)]
pub struct GenericPrivateLearner {
    class: Arc<ConceptClass>,
    mechanism: Exponential,
    m: usize,
}

impl GenericPrivateLearner {
    pub fn new(class: Arc<ConceptClass>, epsilon: f64, m: usize) -> Result<Self> {
        Ok(GenericPrivateLearner {
            class,
            mechanism: Exponential::new(epsilon)?,
            m,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.mechanism.epsilon
    }
}

impl Learner for GenericPrivateLearner {
    fn name(&self) -> String {
        format!("generic_private(eps={})", self.mechanism.epsilon)
    }

    fn class(&self) -> &Arc<ConceptClass> {
        &self.class
    }

    fn declared_privacy(&self) -> Option<PrivacyParams> {
        Some(PrivacyParams::pure(self.mechanism.epsilon))
    }

    fn sample_sizes(&self) -> SampleSizes {
        SampleSizes { labeled: self.m, unlabeled: 0 }
    }

    fn learn(&self, s: &[LabeledExample], _d: &[Point], rng: &mut PrivRng) -> Result<LearnerOutput> {
        let all: Vec<usize> = (0..self.class.len()).collect();
        let hypothesis = select_hypothesis(&self.mechanism, &self.class, &all, s, rng)?;
        let mut transcript = Transcript::new(self.name());
        transcript.candidates = Some(all.len());
        transcript.stage("exponential", PrivacyParams::pure(self.mechanism.epsilon));
        Ok(LearnerOutput {
            hypothesis,
            labeled_used: s.len(),
            unlabeled_used: 0,
            transcript,
        })
    }
}
