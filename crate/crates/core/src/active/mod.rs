//! Pool-based active learning: a label oracle that answers index queries
//! under a budget, adapters from semi-supervised learners, the subsampling
//! wrapper that makes the labeled cost independent of epsilon, and a probe
//! for transcript leakage.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::audit::{estimate_from_outcomes, run_pair, AuditConfig, AuditReport, NeighborPair};
use crate::concepts::{require_labeled, ConceptClass, LabeledExample, Point};
use crate::error::{Error, Result};
use crate::learners::{ErmLearner, Learner, LearnerOutput};
use crate::mechanisms::{
    active_pool_size, subsample_indices, Mechanism, PrivacyParams, PrivacyTransform,
};
use crate::rng::PrivRng;

/// Answers label queries by pool index (0-based) and records every query.
#[derive(Debug)]
pub struct LabelOracle<'a> {
    pool: &'a [LabeledExample],
    budget: usize,
    transcript: Vec<usize>,
}

impl<'a> LabelOracle<'a> {
    /// `pool` must be fully labeled; the labels stay hidden behind [`Self::query`].
    pub fn new(pool: &'a [LabeledExample], budget: usize) -> Result<Self> {
        require_labeled(pool)?;
        Ok(LabelOracle {
            pool,
            budget,
            transcript: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.pool.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn points(&self) -> Vec<Point> {
        self.pool.iter().map(|r| r.point).collect()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.transcript.len()
    }

    /// Label of record `index`. Repeated queries are answered and counted.
    pub fn query(&mut self, index: usize) -> Result<bool> {
        if self.transcript.len() >= self.budget {
            return Err(Error::Protocol(format!(
                "query {} exceeds the label budget of {}",
                self.transcript.len() + 1,
                self.budget
            )));
        }
        let record = self.pool.get(index).ok_or_else(|| {
            Error::Protocol(format!("query index {index} outside a pool of {}", self.pool.len()))
        })?;
        self.transcript.push(index);
        Ok(record.label.expect("pool is fully labeled"))
    }

    pub fn queries(&self) -> usize {
        self.transcript.len()
    }

    pub fn transcript(&self) -> &[usize] {
        &self.transcript
    }

    pub fn into_transcript(self) -> Vec<usize> {
        self.transcript
    }
}

/// A learner that sees pool points and buys labels from an oracle.
pub trait ActiveLearner: Send + Sync {
    fn name(&self) -> String;

    fn class(&self) -> &Arc<ConceptClass>;

    fn declared_privacy(&self) -> Option<PrivacyParams>;

    /// Labels the learner asks for.
    fn budget(&self) -> usize;

    /// Smallest pool the learner accepts.
    fn pool_size(&self) -> usize;

    fn learn(&self, points: &[Point], oracle: &mut LabelOracle<'_>, rng: &mut PrivRng) -> Result<LearnerOutput>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveRun {
    pub output: LearnerOutput,
    /// Queried indices, in order.
    pub transcript: Vec<usize>,
}

/// Runs `learner` against an oracle over `pool` with label budget `budget`.
pub fn run_active<L: ActiveLearner + ?Sized>(
    learner: &L,
    pool: &[LabeledExample],
    budget: usize,
    rng: &mut PrivRng,
) -> Result<ActiveRun> {
    if pool.is_empty() {
        return Err(Error::domain("active learning needs a nonempty pool"));
    }
    let mut oracle = LabelOracle::new(pool, budget)?;
    let points = oracle.points();
    let mut output = learner.learn(&points, &mut oracle, rng)?;
    let transcript = oracle.into_transcript();
    output.labeled_used = transcript.len();
    output.transcript.queries = transcript.clone();
    Ok(ActiveRun { output, transcript })
}

/// A semi-supervised learner run actively: it labels the first `m` pool
/// entries and treats the rest as unlabeled.
#[derive(Clone, Debug)]
pub struct SemiSupervisedAsActive<L>(pub L);

impl<L: Learner> ActiveLearner for SemiSupervisedAsActive<L> {
    fn name(&self) -> String {
        format!("prefix({})", self.0.name())
    }

    fn class(&self) -> &Arc<ConceptClass> {
        self.0.class()
    }

    fn declared_privacy(&self) -> Option<PrivacyParams> {
        self.0.declared_privacy()
    }

    fn budget(&self) -> usize {
        self.0.sample_sizes().labeled
    }

    fn pool_size(&self) -> usize {
        self.0.sample_sizes().total()
    }

    fn learn(&self, points: &[Point], oracle: &mut LabelOracle<'_>, rng: &mut PrivRng) -> Result<LearnerOutput> {
        let m = self.budget().min(points.len());
        let s = (0..m)
            .map(|i| Ok(LabeledExample::labeled(points[i], oracle.query(i)?)))
            .collect::<Result<Vec<_>>>()?;
        self.0.learn(&s, &points[m..], rng)
    }
}

/// Picks a uniform `n`-subset `J` of the pool, labels only its `m` smallest
/// indices `K`, and runs the inner learner on `K` labeled and `J \ K`
/// unlabeled. The query pattern depends on the random `J` alone.
#[derive(Clone, Debug)]
pub struct SubSamplingActive<L> {
    inner: L,
    epsilon: f64,
    inner_privacy: PrivacyParams,
}

impl<L: Learner> SubSamplingActive<L> {
    pub fn new(inner: L, epsilon: f64) -> Result<Self> {
        let inner_privacy = inner
            .declared_privacy()
            .ok_or_else(|| Error::domain("subsampling wrapper needs a private inner learner"))?;
        PrivacyTransform::ActiveSubsample { epsilon }.apply(inner_privacy)?;
        Ok(SubSamplingActive {
            inner,
            epsilon,
            inner_privacy,
        })
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }

    /// The `(J, K)` index sets for a pool of `t` points.
    pub fn choose_indices(&self, t: usize, rng: &mut PrivRng) -> Result<(Vec<usize>, Vec<usize>)> {
        let sizes = self.inner.sample_sizes();
        let mut j = subsample_indices(t, sizes.total(), rng)?;
        j.sort_unstable();
        let k = j[..sizes.labeled].to_vec();
        Ok((j, k))
    }
}

impl<L: Learner> ActiveLearner for SubSamplingActive<L> {
    fn name(&self) -> String {
        format!("subsampling_active[eps={}]({})", self.epsilon, self.inner.name())
    }

    fn class(&self) -> &Arc<ConceptClass> {
        self.inner.class()
    }

    fn declared_privacy(&self) -> Option<PrivacyParams> {
        PrivacyTransform::ActiveSubsample { epsilon: self.epsilon }
            .apply(self.inner_privacy)
            .ok()
    }

    fn budget(&self) -> usize {
        self.inner.sample_sizes().labeled
    }

    fn pool_size(&self) -> usize {
        active_pool_size(self.inner.sample_sizes().total(), self.inner_privacy.epsilon, self.epsilon)
    }

    fn learn(&self, points: &[Point], oracle: &mut LabelOracle<'_>, rng: &mut PrivRng) -> Result<LearnerOutput> {
        let t = self.pool_size();
        if points.len() < t {
            return Err(Error::domain(format!(
                "subsampling wrapper needs a pool of at least {t} points, got {}",
                points.len()
            )));
        }
        let (j, k) = self.choose_indices(points.len(), rng)?;
        let s = k
            .iter()
            .map(|&i| Ok(LabeledExample::labeled(points[i], oracle.query(i)?)))
            .collect::<Result<Vec<_>>>()?;
        let d: Vec<Point> = j[k.len()..].iter().map(|&i| points[i]).collect();
        let mut out = self.inner.learn(&s, &d, rng)?;
        if let Some(p) = self.declared_privacy() {
            out.transcript.stage(format!("active subsample to eps={}", self.epsilon), p);
        }
        Ok(out)
    }
}

/// Queries pool entries in order until it sees a positive label or runs out
/// of budget, then returns the ERM hypothesis on what it saw. Its transcript
/// length reveals the position of the first positive record.
#[derive(Clone, Debug)]
pub struct FirstPositiveLearner {
    pub class: Arc<ConceptClass>,
    pub budget: usize,
}

impl ActiveLearner for FirstPositiveLearner {
    fn name(&self) -> String {
        "first_positive".into()
    }

    fn class(&self) -> &Arc<ConceptClass> {
        &self.class
    }

    fn declared_privacy(&self) -> Option<PrivacyParams> {
        None
    }

    fn budget(&self) -> usize {
        self.budget
    }

    fn pool_size(&self) -> usize {
        1
    }

    fn learn(&self, points: &[Point], oracle: &mut LabelOracle<'_>, _rng: &mut PrivRng) -> Result<LearnerOutput> {
        let mut seen = Vec::new();
        for (i, &p) in points.iter().enumerate().take(self.budget) {
            let y = oracle.query(i)?;
            seen.push(LabeledExample::labeled(p, y));
            if y {
                break;
            }
        }
        let hypothesis = if seen.is_empty() { 0 } else { ErmLearner::minimize(&self.class, &seen)? };
        Ok(LearnerOutput {
            hypothesis,
            labeled_used: seen.len(),
            unlabeled_used: points.len() - seen.len(),
            transcript: crate::learners::Transcript::new(self.name()),
        })
    }
}

/// An active learner as a mechanism over a fully labeled pool, with
/// `(hypothesis, transcript)` as the outcome.
#[derive(Clone, Debug)]
pub struct ActiveMechanism<L> {
    pub learner: L,
    pub budget: usize,
}

impl<L: ActiveLearner> Mechanism<LabeledExample> for ActiveMechanism<L> {
    type Outcome = (usize, Vec<usize>);

    fn name(&self) -> String {
        self.learner.name()
    }

    fn declared_privacy(&self) -> PrivacyParams {
        self.learner
            .declared_privacy()
            .unwrap_or(PrivacyParams { epsilon: f64::INFINITY, delta: 0.0 })
    }

    fn run(&self, db: &[LabeledExample], rng: &mut PrivRng) -> Result<Self::Outcome> {
        let run = run_active(&self.learner, db, self.budget, rng)?;
        Ok((run.output.hypothesis, run.transcript))
    }
}

/// Estimates over the joint `(output, transcript)` outcome and its two marginals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakReport {
    pub joint: AuditReport,
    pub output: AuditReport,
    pub transcript: AuditReport,
    /// Every seed-coupled run produced the same transcript on both pools.
    pub transcripts_coupled_equal: bool,
}

pub fn transcript_leak_probe<L: ActiveLearner>(
    learner: L,
    pair: &NeighborPair<LabeledExample>,
    budget: usize,
    cfg: &AuditConfig,
) -> Result<LeakReport> {
    let mech = ActiveMechanism { learner, budget };
    let (o1, o2) = run_pair(&mech, pair, cfg.trials, cfg.seed)?;
    let name = mech.name();
    let project = |v: &[(usize, Vec<usize>)], f: fn(&(usize, Vec<usize>)) -> String| -> Vec<String> {
        v.iter().map(f).collect()
    };
    let label = |mut r: AuditReport, what: &str| {
        r.mechanism = format!("{name} [{what}]");
        r.declared = Some(mech.declared_privacy());
        r
    };
    let joint = label(estimate_from_outcomes(&o1, &o2, cfg)?, "joint");
    let output = label(
        estimate_from_outcomes(&project(&o1, |o| o.0.to_string()), &project(&o2, |o| o.0.to_string()), cfg)?,
        "output",
    );
    let transcript = label(
        estimate_from_outcomes(
            &project(&o1, |o| format!("{:?}", o.1)),
            &project(&o2, |o| format!("{:?}", o.1)),
            cfg,
        )?,
        "transcript",
    );
    let transcripts_coupled_equal = o1.iter().zip(&o2).all(|(a, b)| a.1 == b.1);
    Ok(LeakReport {
        joint,
        output,
        transcript,
        transcripts_coupled_equal,
    })
}

#[cfg(test)]
mod tests;
