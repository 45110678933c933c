use std::sync::Arc;

use super::{check_unit, Learner, LearnerOutput, SampleSizes, SanitizerSummary, Transcript};
use crate::concepts::{require_labeled, ConceptClass, LabeledExample, Point};
use crate::error::{Error, Result};
use crate::mechanisms::{ceil_tolerant, select_hypothesis, Exponential, PrivacyParams};
use crate::rng::PrivRng;
use crate::sanitizer::{sanitize_for_learner, SanitizerConfig};

/// `ceil(k (VC / (alpha^3 eps) ln(1/alpha) + ln(1/beta) / (alpha eps)))`.
pub fn generic_labeled_size(vc: usize, alpha: f64, beta: f64, epsilon: f64, k: f64) -> usize {
    let raw = vc as f64 / (alpha.powi(3) * epsilon) * (1.0 / alpha).ln()
        + (1.0 / beta).ln() / (alpha * epsilon);
    ceil_tolerant(k * raw).max(1)
}

/// `ceil(k (d VC ln(1/alpha) / (alpha^3 eps) + ln(1/beta) / (eps alpha)))`,
/// with `d` the bit length of a domain point.
pub fn generic_unlabeled_size(bits: u32, vc: usize, alpha: f64, beta: f64, epsilon: f64, k: f64) -> usize {
    let raw = f64::from(bits) * vc as f64 * (1.0 / alpha).ln() / (alpha.powi(3) * epsilon)
        + (1.0 / beta).ln() / (epsilon * alpha);
    ceil_tolerant(k * raw).max(1)
}

/// Sanitize the unlabeled points with respect to the XOR class, keep one
/// canonical member per dichotomy of the synthetic support, then pick among
/// those by the exponential mechanism on the labeled sample.
#[derive(Clone, Debug)]
pub struct GenericLearner {
    class: Arc<ConceptClass>,
    sanitizer: SanitizerConfig,
    mechanism: Exponential,
    sizes: SampleSizes,
}

impl GenericLearner {
    /// The sanitizer's `alpha`, `beta` and `epsilon` are the learner's. Its
    /// synthetic size is fixed here from the XOR class's VC dimension unless
    /// `sanitizer.target_size` is already set.
    pub fn new(class: Arc<ConceptClass>, mut sanitizer: SanitizerConfig, sizes: SampleSizes) -> Result<Self> {
        check_unit("alpha", sanitizer.alpha)?;
        check_unit("beta", sanitizer.beta)?;
        let mechanism = Exponential::new(sanitizer.epsilon)?;
        if sanitizer.target_size.is_none() {
            let vc = class.xor_class()?.vc_dimension()?;
            sanitizer.target_size = Some(sanitizer.size_for(vc));
        }
        Ok(GenericLearner {
            class,
            sanitizer,
            mechanism,
            sizes,
        })
    }

    pub fn sanitizer(&self) -> &SanitizerConfig {
        &self.sanitizer
    }

    /// `2 eps`: sanitizer and selection each spend `eps` on the joint input.
    pub fn conservative_privacy(&self) -> PrivacyParams {
        PrivacyParams::pure(2.0 * self.mechanism.epsilon)
    }

    /// `eps`: a single record lies in either `D` or `S`, never both.
    pub fn disjoint_privacy(&self) -> PrivacyParams {
        PrivacyParams::pure(self.mechanism.epsilon)
    }
}

impl Learner for GenericLearner {
    fn name(&self) -> String {
        format!("generic(eps={})", self.mechanism.epsilon)
    }

    fn class(&self) -> &Arc<ConceptClass> {
        &self.class
    }

    fn declared_privacy(&self) -> Option<PrivacyParams> {
        Some(self.conservative_privacy())
    }

    fn sample_sizes(&self) -> SampleSizes {
        self.sizes
    }

    fn learn(&self, s: &[LabeledExample], d: &[Point], rng: &mut PrivRng) -> Result<LearnerOutput> {
        require_labeled(s)?;
        if d.is_empty() {
            return Err(Error::domain("generic learner needs unlabeled points"));
        }
        let (synthetic, support) = sanitize_for_learner(d, &self.class, &self.sanitizer, rng)?;
        let candidates = self.class.canonical_hypotheses(&support);
        let hypothesis = select_hypothesis(&self.mechanism, &self.class, &candidates, s, rng)?;

        let mut transcript = Transcript::new(self.name());
        transcript.sanitizer = Some(SanitizerSummary {
            target_size: synthetic.target_size,
            support_size: support.len(),
            approximate: synthetic.approximate,
            candidates: synthetic.candidates,
        });
        transcript.candidates = Some(candidates.len());
        transcript.stage("sanitizer", synthetic.declared);
        transcript.stage("exponential (2 eps total)", self.conservative_privacy());
        transcript.stage("disjoint-input accounting", self.disjoint_privacy());
        if synthetic.approximate {
            transcript.notes.push("approximate sanitizer sampler".into());
        }
        Ok(LearnerOutput {
            hypothesis,
            labeled_used: s.len(),
            unlabeled_used: d.len(),
            transcript,
        })
    }
}
