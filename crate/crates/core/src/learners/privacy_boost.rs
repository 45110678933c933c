use std::sync::Arc;

use super::{Learner, LearnerOutput, SampleSizes};
use crate::concepts::{ConceptClass, LabeledExample, Point};
use crate::error::{Error, Result};
use crate::mechanisms::{subsample_input_size, subsample_indices, PrivacyParams, PrivacyTransform};
use crate::rng::PrivRng;

/// Runs `inner` on random subsets of the labeled and the unlabeled input,
/// each `ceil((size / eps)(3 + e^{eps*}))` records long, to reach `eps`.
///
/// A neighbouring record sits in exactly one of the two segments, and the
/// subset taken from the other segment does not depend on the data.
#[derive(Clone, Debug)]
pub struct PrivacyBoost<L> {
    inner: L,
    epsilon: f64,
    inner_privacy: PrivacyParams,
}

impl<L: Learner> PrivacyBoost<L> {
    pub fn new(inner: L, epsilon: f64) -> Result<Self> {
        let inner_privacy = inner
            .declared_privacy()
            .ok_or_else(|| Error::domain("privacy boosting needs a private inner learner"))?;
        PrivacyTransform::Subsample { epsilon }.apply(inner_privacy)?;
        Ok(PrivacyBoost {
            inner,
            epsilon,
            inner_privacy,
        })
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }

    fn outer(&self, n: usize) -> usize {
        if n == 0 {
            0
        } else {
            subsample_input_size(n, self.inner_privacy.epsilon, self.epsilon)
        }
    }
}

impl<L: Learner> Learner for PrivacyBoost<L> {
    fn name(&self) -> String {
        format!("privacy_boost[eps={}]({})", self.epsilon, self.inner.name())
    }

    fn class(&self) -> &Arc<ConceptClass> {
        self.inner.class()
    }

    fn declared_privacy(&self) -> Option<PrivacyParams> {
        PrivacyTransform::Subsample { epsilon: self.epsilon }
            .apply(self.inner_privacy)
            .ok()
    }

    fn sample_sizes(&self) -> SampleSizes {
        let inner = self.inner.sample_sizes();
        SampleSizes {
            labeled: self.outer(inner.labeled),
            unlabeled: self.outer(inner.unlabeled),
        }
    }

    fn learn(&self, s: &[LabeledExample], d: &[Point], rng: &mut PrivRng) -> Result<LearnerOutput> {
        let inner = self.inner.sample_sizes();
        let need = self.sample_sizes();
        if s.len() < need.labeled || d.len() < need.unlabeled {
            return Err(Error::domain(format!(
                "privacy boosting needs {} labeled and {} unlabeled records, got {} and {}",
                need.labeled,
                need.unlabeled,
                s.len(),
                d.len()
            )));
        }
        let s_sub: Vec<LabeledExample> = subsample_indices(s.len(), inner.labeled, rng)?
            .into_iter()
            .map(|i| s[i])
            .collect();
        let d_sub: Vec<Point> = subsample_indices(d.len(), inner.unlabeled, rng)?
            .into_iter()
            .map(|i| d[i])
            .collect();
        let mut out = self.inner.learn(&s_sub, &d_sub, rng)?;
        out.labeled_used = s.len();
        out.unlabeled_used = d.len();
        if let Some(p) = self.declared_privacy() {
            out.transcript.stage(format!("subsample to eps={}", self.epsilon), p);
        }
        Ok(out)
    }
}
