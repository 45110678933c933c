use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::active::{ActiveLearner, SubSamplingActive};
use crate::concepts::{ClassSpec, ConceptClass, Distribution};
use crate::error::{Error, Result};
use crate::learners::{
    generic_labeled_size, generic_private_size, generic_unlabeled_size, ErmLearner, GenericLearner,
    GenericPrivateLearner, LabelBoost, LabelBoostConfig, Learner, PrivacyBoost, SampleSizes,
};
use crate::mechanisms::ceil_tolerant;
use crate::sanitizer::{CandidateMode, SanitizerConfig};

/// A concept class given as shorthand (`"thresh:3"`) or as a full spec object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassRef {
    Short(String),
    Spec(ClassSpec),
}

impl ClassRef {
    pub fn spec(&self) -> Result<ClassSpec> {
        match self {
            ClassRef::Short(s) => s.parse(),
            ClassRef::Spec(s) => Ok(s.clone()),
        }
    }

    pub fn build(&self) -> Result<Arc<ConceptClass>> {
        Ok(Arc::new(self.spec()?.build()?))
    }
}

impl From<ClassSpec> for ClassRef {
    fn from(s: ClassSpec) -> Self {
        ClassRef::Spec(s)
    }
}

fn one() -> f64 {
    1.0
}

/// Which learner a trial runs. Sizes left out are derived from `alpha`,
/// `beta` and the class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    Erm {
        m: usize,
    },
    GenericPrivate {
        epsilon: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
    },
    Generic {
        epsilon: f64,
        /// Constant multiplying both sample-size formulas.
        #[serde(default = "one")]
        k: f64,
        /// Constant in the synthetic database size.
        #[serde(default = "one")]
        kappa: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labeled: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unlabeled: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_size: Option<usize>,
        #[serde(default)]
        mode: CandidateMode,
    },
    LabelBoost {
        base: Box<LearnerSpec>,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unlabeled: Option<usize>,
        #[serde(default)]
        agnostic: bool,
    },
    PrivacyBoost {
        inner: Box<LearnerSpec>,
        epsilon: f64,
    },
    SubsamplingActive {
        inner: Box<LearnerSpec>,
        epsilon: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    Fixed(usize),
    /// Uniform over the class, drawn per trial.
    #[default]
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    M,
    N,
    Alpha,
    Epsilon,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::M => "m",
            SweepAxis::N => "n",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Epsilon => "epsilon",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// File names are joined onto `dir`; nothing is written while `dir` is unset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub trials_csv: String,
    pub summary_json: String,
    pub curve_csv: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            trials_csv: "trials.csv".into(),
            summary_json: "summary.json".into(),
            curve_csv: "curve.csv".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub learner: LearnerSpec,
    pub class: ClassRef,
    #[serde(default = "uniform")]
    pub distribution: Distribution,
    #[serde(default)]
    pub target: TargetSpec,
    pub alpha: f64,
    pub beta: f64,
    /// A trial fails when its error exceeds `fail_factor * alpha`.
    #[serde(default = "one")]
    pub fail_factor: f64,
    pub trials: usize,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn uniform() -> Distribution {
    Distribution::Uniform
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("experiment config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be in (0, 1), got {v}")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.fail_factor > 0.0) {
            return Err(Error::Config("fail_factor must be positive".into()));
        }
        Ok(())
    }

    /// This config with one sweep value substituted and the sweep removed.
    pub fn at(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.sweep = None;
        match axis {
            SweepAxis::Alpha => cfg.alpha = value,
            SweepAxis::M => set_count(&mut cfg.learner, axis, count(value)?)?,
            SweepAxis::N => set_count(&mut cfg.learner, axis, count(value)?)?,
            SweepAxis::Epsilon => set_epsilon(&mut cfg.learner, value),
        }
        Ok(cfg)
    }
}

fn count(v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::Config(format!("sweep value {v} is not a record count")))
    }
}

fn set_count(spec: &mut LearnerSpec, axis: SweepAxis, v: usize) -> Result<()> {
    let labeled = axis == SweepAxis::M;
    match spec {
        LearnerSpec::Erm { m } if labeled => *m = v,
        LearnerSpec::GenericPrivate { m, .. } if labeled => *m = Some(v),
        LearnerSpec::Generic { labeled: l, unlabeled: u, .. } => {
            if labeled {
                *l = Some(v)
            } else {
                *u = Some(v)
            }
        }
        LearnerSpec::LabelBoost { m, unlabeled, .. } => {
            if labeled {
                *m = Some(v)
            } else {
                *unlabeled = Some(v)
            }
        }
        LearnerSpec::PrivacyBoost { inner, .. } | LearnerSpec::SubsamplingActive { inner, .. } => {
            set_count(inner, axis, v)?
        }
        _ => {
            return Err(Error::Config(format!(
                "learner takes no unlabeled records; cannot sweep `{}`",
                axis.name()
            )))
        }
    }
    Ok(())
}

fn set_epsilon(spec: &mut LearnerSpec, v: f64) {
    match spec {
        LearnerSpec::Erm { .. } => {}
        LearnerSpec::GenericPrivate { epsilon, .. }
        | LearnerSpec::Generic { epsilon, .. }
        | LearnerSpec::PrivacyBoost { epsilon, .. }
        | LearnerSpec::SubsamplingActive { epsilon, .. } => *epsilon = v,
        LearnerSpec::LabelBoost { base, .. } => set_epsilon(base, v),
    }
}

/// A learner ready to run, with the sizes the harness should draw.
pub enum BuiltLearner {
    Passive {
        learner: Box<dyn Learner>,
        sizes: SampleSizes,
        /// Candidate count of the final selection step, when known up front.
        selection: Option<(usize, f64)>,
    },
    Active {
        learner: Box<dyn ActiveLearner>,
    },
}

impl BuiltLearner {
    pub fn name(&self) -> String {
        match self {
            BuiltLearner::Passive { learner, .. } => learner.name(),
            BuiltLearner::Active { learner } => learner.name(),
        }
    }

    /// Labeled records the learner may read.
    pub fn configured_m(&self) -> usize {
        match self {
            BuiltLearner::Passive { sizes, .. } => sizes.labeled,
            BuiltLearner::Active { learner } => learner.budget(),
        }
    }
}

impl std::fmt::Debug for BuiltLearner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BuiltLearner").field("name", &self.name()).finish()
    }
}

/// Builds the learner for `spec` over `class`.
pub fn build_learner(spec: &LearnerSpec, class: &Arc<ConceptClass>, alpha: f64, beta: f64) -> Result<BuiltLearner> {
    if let LearnerSpec::SubsamplingActive { inner, epsilon } = spec {
        let BuiltLearner::Passive { learner, sizes, .. } = build_learner(inner, class, alpha, beta)? else {
            return Err(Error::Config("subsampling_active needs a passive inner learner".into()));
        };
        if learner.sample_sizes() != sizes {
            return Err(Error::Config(
                "subsampling_active inner learner must use its own derived sizes".into(),
            ));
        }
        return Ok(BuiltLearner::Active {
            learner: Box::new(SubSamplingActive::new(learner, *epsilon)?),
        });
    }
    let (learner, sizes, selection): (Box<dyn Learner>, SampleSizes, _) = match spec {
        LearnerSpec::Erm { m } => {
            let l = ErmLearner::new(class.clone(), *m);
            (Box::new(l), SampleSizes { labeled: *m, unlabeled: 0 }, None)
        }
        LearnerSpec::GenericPrivate { epsilon, m } => {
            let m = m.unwrap_or_else(|| generic_private_size(class.len(), alpha, beta, *epsilon));
            let l = GenericPrivateLearner::new(class.clone(), *epsilon, m)?;
            (Box::new(l), SampleSizes { labeled: m, unlabeled: 0 }, Some((class.len(), *epsilon)))
        }
        LearnerSpec::Generic {
            epsilon,
            k,
            kappa,
            labeled,
            unlabeled,
            target_size,
            mode,
        } => {
            let vc = class_vc(class)?;
            let bits = class.domain().bits() * class.domain().axes();
            let sizes = SampleSizes {
                labeled: labeled.unwrap_or_else(|| generic_labeled_size(vc, alpha, beta, *epsilon, *k)),
                unlabeled: unlabeled
                    .unwrap_or_else(|| generic_unlabeled_size(bits, vc, alpha, beta, *epsilon, *k)),
            };
            let mut san = SanitizerConfig::new(alpha, beta, *epsilon).with_kappa(*kappa);
            san.mode = *mode;
            if let Some(t) = target_size {
                san = san.with_target_size(*t);
            }
            let l = GenericLearner::new(class.clone(), san, sizes)?;
            (Box::new(l), sizes, Some((class.len(), *epsilon)))
        }
        LearnerSpec::LabelBoost {
            base,
            scale,
            m,
            unlabeled,
            agnostic,
        } => {
            let BuiltLearner::Passive { learner: base, .. } = build_learner(base, class, alpha, beta)? else {
                return Err(Error::Config("label_boost needs a passive base learner".into()));
            };
            let cfg = LabelBoostConfig {
                alpha,
                beta,
                n: ceil_tolerant(base.sample_sizes().total() as f64 / scale).max(1),
                scale: *scale,
                vc: class_vc(class)?,
                agnostic: *agnostic,
            };
            let derived = cfg.sample_sizes();
            let sizes = SampleSizes {
                labeled: m.unwrap_or(derived.labeled),
                unlabeled: unlabeled.unwrap_or(derived.unlabeled),
            };
            (Box::new(LabelBoost::new(base, cfg)?), sizes, None)
        }
        LearnerSpec::PrivacyBoost { inner, epsilon } => {
            let BuiltLearner::Passive { learner, .. } = build_learner(inner, class, alpha, beta)? else {
                return Err(Error::Config("privacy_boost needs a passive inner learner".into()));
            };
            let l = PrivacyBoost::new(learner, *epsilon)?;
            let sizes = l.sample_sizes();
            (Box::new(l), sizes, None)
        }
        LearnerSpec::SubsamplingActive { .. } => unreachable!(),
    };
    Ok(BuiltLearner::Passive {
        learner,
        sizes,
        selection,
    })
}

fn class_vc(class: &ConceptClass) -> Result<usize> {
    match class.known_vc() {
        Some(vc) => Ok(vc),
        None => class.vc_dimension(),
    }
}
