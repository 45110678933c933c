use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::ClassRef;
use crate::audit::{estimate_epsilon, neighbors, AuditConfig, AuditReport};
use crate::concepts::{LabeledExample, Point};
use crate::error::{Error, Result};
use crate::learners::{GenericPrivateLearner, LearnerMechanism, ProcedureThen};
use crate::mechanisms::{Constant, Exponential, HypothesisSelection, RandomizedResponse};

/// Base mechanism run after the relabeling procedure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcedureBase {
    Constant,
    GenericPrivate { epsilon: f64 },
}

/// The mechanism and neighbouring pair an audit runs on. The second database
/// is the first with record `index` replaced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AuditTarget {
    RandomizedResponse {
        epsilon: f64,
        database: Vec<bool>,
        index: usize,
        replacement: bool,
    },
    Exponential {
        class: ClassRef,
        epsilon: f64,
        /// Class indices to select among; the whole class when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        candidates: Option<Vec<usize>>,
        sample: Vec<LabeledExample>,
        index: usize,
        replacement: LabeledExample,
    },
    LabelBoostProcedure {
        class: ClassRef,
        base: ProcedureBase,
        s: Vec<LabeledExample>,
        t: Vec<Point>,
        d: Vec<Point>,
        index: usize,
        replacement: LabeledExample,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditExperiment {
    pub mechanism: AuditTarget,
    #[serde(flatten)]
    pub audit: AuditConfig,
}

impl AuditExperiment {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("audit config: {e}")))
    }

    pub fn index(&self) -> usize {
        match &self.mechanism {
            AuditTarget::RandomizedResponse { index, .. }
            | AuditTarget::Exponential { index, .. }
            | AuditTarget::LabelBoostProcedure { index, .. } => *index,
        }
    }
}

pub fn run_audit(exp: &AuditExperiment) -> Result<AuditReport> {
    let cfg = &exp.audit;
    if cfg.trials == 0 {
        return Err(Error::Config("audit needs at least one trial".into()));
    }
    match &exp.mechanism {
        AuditTarget::RandomizedResponse {
            epsilon,
            database,
            index,
            replacement,
        } => {
            let pair = neighbors(database, *index, *replacement)?;
            estimate_epsilon(&RandomizedResponse { epsilon: *epsilon }, &pair, cfg)
        }
        AuditTarget::Exponential {
            class,
            epsilon,
            candidates,
            sample,
            index,
            replacement,
        } => {
            let class = class.build()?;
            let mut mech = HypothesisSelection::over_class(class, Exponential::new(*epsilon)?);
            if let Some(c) = candidates {
                mech.candidates = c.clone();
            }
            let pair = neighbors(sample, *index, *replacement)?;
            estimate_epsilon(&mech, &pair, cfg)
        }
        AuditTarget::LabelBoostProcedure {
            class,
            base,
            s,
            t,
            d,
            index,
            replacement,
        } => {
            let class = class.build()?;
            let mut db = s.clone();
            db.extend(t.iter().chain(d).map(|&p| LabeledExample::unlabeled(p)));
            let pair = neighbors(&db, *index, *replacement)?;
            let (s_len, t_len) = (s.len(), t.len());
            match base {
                ProcedureBase::Constant => {
                    let mech = ProcedureThen { class, base: Constant(0usize), s_len, t_len };
                    estimate_epsilon(&mech, &pair, cfg)
                }
                ProcedureBase::GenericPrivate { epsilon } => {
                    let learner = GenericPrivateLearner::new(Arc::clone(&class), *epsilon, s_len + t_len)?;
                    let mech = ProcedureThen { class, base: LearnerMechanism(learner), s_len, t_len };
                    estimate_epsilon(&mech, &pair, cfg)
                }
            }
        }
    }
}

/// `# schema=pssl.audit.v1` then one row per report.
pub fn write_audit_csv<W: Write>(mut w: W, rows: &[(usize, &AuditReport)]) -> Result<()> {
    writeln!(w, "# schema=pssl.audit.v1")?;
    writeln!(w, "mechanism,pair_index,epsilon_hat,epsilon_point,confidence_level,delta,trials,seed")?;
    for (idx, r) in rows {
        writeln!(
            w,
            "\"{}\",{},{},{},{},{},{},{}",
            r.mechanism.replace('"', "\"\""),
            idx,
            r.epsilon_hat,
            r.epsilon_point,
            r.confidence_level,
            r.delta_used,
            r.trials,
            r.seed
        )?;
    }
    Ok(())
}
