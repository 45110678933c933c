use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{check_unit, BoostIteration, Learner, LearnerOutput, SampleSizes, Transcript};
use crate::concepts::{
    dedup_points, ConceptClass, LabeledExample, PartiallyLabeledDatabase, Point, Segments,
};
use crate::error::{Error, Result};
use crate::mechanisms::{
    resample_indices, select_hypothesis, subsample_indices, Exponential, Mechanism, PrivacyParams,
    PrivacyTransform,
};
use crate::rng::PrivRng;

/// Per-iteration accuracy and confidence: `alpha / (10 * 2^i)`, `beta / (4 * 2^i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostSchedule {
    pub alpha: f64,
    pub beta: f64,
}

impl BoostSchedule {
    pub fn alpha_i(&self, i: usize) -> f64 {
        self.alpha / (10.0 * 2f64.powi(i as i32))
    }

    pub fn beta_i(&self, i: usize) -> f64 {
        self.beta / (4.0 * 2f64.powi(i as i32))
    }
}

/// Parameters of the label-boosting loop.
///
/// `scale` multiplies the loop's absolute constants (`90000n`, `30000n`,
/// `300n`, the exponent denominator `200` and the labeled threshold
/// constant). The retention fractions `1/100` and `1/300` are not scaled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelBoostConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Sample complexity of the base learner as the loop sees it.
    pub n: usize,
    pub scale: f64,
    /// VC dimension of the class (treated as at least 1).
    pub vc: usize,
    /// Use the `1 / alpha^2` labeled threshold.
    pub agnostic: bool,
}

impl LabelBoostConfig {
    pub fn validate(&self) -> Result<()> {
        check_unit("alpha", self.alpha)?;
        check_unit("beta", self.beta)?;
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::domain(format!("scale must be finite and > 0, got {}", self.scale)));
        }
        if self.n == 0 {
            return Err(Error::domain("base sample complexity must be positive"));
        }
        Ok(())
    }

    pub fn schedule(&self) -> BoostSchedule {
        BoostSchedule {
            alpha: self.alpha,
            beta: self.beta,
        }
    }

    /// Labeled records the loop should be given.
    pub fn labeled_target(&self) -> usize {
        labeled_threshold(self.alpha, self.beta, self.vc, self.scale, self.agnostic).ceil() as usize
    }

    pub fn sample_sizes(&self) -> SampleSizes {
        SampleSizes {
            labeled: self.labeled_target(),
            unlabeled: unlabeled_requirement(self.n, self.scale),
        }
    }
}

/// `(96000 s / alpha) VC ln(2240 / (alpha beta))`, with `alpha^2` in the
/// agnostic case.
pub fn labeled_threshold(alpha: f64, beta: f64, vc: usize, scale: f64, agnostic: bool) -> f64 {
    let a = if agnostic { alpha * alpha } else { alpha };
    96000.0 * scale / a * vc.max(1) as f64 * (2240.0 / (alpha * beta)).ln()
}

/// `ceil(90000 n s)`.
pub fn unlabeled_requirement(n: usize, scale: f64) -> usize {
    crate::mechanisms::ceil_tolerant(90000.0 * n as f64 * scale)
}

/// `(4800 / alpha_i) VC ln(14 / (alpha_i beta_i))`, the size `S` is shown to
/// keep at the start of every iteration.
pub fn growth_lower_bound(alpha_i: f64, beta_i: f64, vc: usize) -> f64 {
    4800.0 / alpha_i * vc.max(1) as f64 * (14.0 / (alpha_i * beta_i)).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedIteration {
    pub i: usize,
    pub alpha_i: f64,
    pub beta_i: f64,
    pub s_before: usize,
    pub v: usize,
    pub t_kept: usize,
    pub s_kept: usize,
    pub s_after: usize,
}

/// Every database size along the loop. A function of the configuration and
/// the input sizes only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostPlan {
    pub iterations: Vec<PlannedIteration>,
    /// `|S|` when the loop exits.
    pub loop_output: usize,
    /// `|S|` after the final deletion, which is also the base learner's input size.
    pub base_input: usize,
    pub unlabeled_consumed: usize,
}

const MAX_ITERATIONS: usize = 64;

fn kept_after_deleting(len: usize, num: usize, den: usize) -> usize {
    len - num * len / den
}

/// Sizes of the loop for `m` labeled and `d_len` unlabeled input records.
pub fn plan_label_boost(cfg: &LabelBoostConfig, m: usize, d_len: usize) -> Result<BoostPlan> {
    cfg.validate()?;
    let sched = cfg.schedule();
    let s_scale = cfg.scale;
    let vc = cfg.vc.max(1) as f64;
    let stop = 300.0 * cfg.n as f64 * s_scale;
    let cap = (30000.0 * cfg.n as f64 * s_scale).floor();
    let mut s = m;
    let mut consumed = 0usize;
    let mut iterations = Vec::new();
    let mut i = 1;
    while (s as f64) < stop {
        if i > MAX_ITERATIONS {
            return Err(Error::Failure(format!(
                "loop did not reach |S| >= {stop} within {MAX_ITERATIONS} iterations"
            )));
        }
        let (a_i, b_i) = (sched.alpha_i(i), sched.beta_i(i));
        let grown = b_i * vc * (a_i * s as f64 / (200.0 * s_scale * vc)).exp() - s as f64;
        let v = cap.min(grown).max(0.0).floor() as usize;
        if v == 0 {
            return Err(Error::Failure(format!(
                "iteration {i}: no unlabeled records to add (v = 0) while |S| = {s} < {stop}"
            )));
        }
        if consumed + v > d_len {
            return Err(Error::Failure(format!(
                "iteration {i}: needs {v} unlabeled records, only {} left",
                d_len - consumed
            )));
        }
        consumed += v;
        let t_kept = kept_after_deleting(v, 99, 100);
        let s_kept = kept_after_deleting(s, 99, 100);
        let s_after = s_kept + t_kept;
        iterations.push(PlannedIteration {
            i,
            alpha_i: a_i,
            beta_i: b_i,
            s_before: s,
            v,
            t_kept,
            s_kept,
            s_after,
        });
        s = s_after;
        i += 1;
    }
    Ok(BoostPlan {
        iterations,
        loop_output: s,
        base_input: kept_after_deleting(s, 299, 300),
        unlabeled_consumed: consumed,
    })
}

/// Result of one relabeling step.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcedureOutput {
    /// `(S ∘ T)^h ∘ D`, with `S` now covering the relabeled prefix.
    pub database: PartiallyLabeledDatabase,
    pub hypothesis: usize,
    pub candidates: usize,
}

/// Picks `h` among one canonical member per dichotomy of the points of
/// `S ∘ T` (exponential mechanism, `eps = 1`, scored on `S`) and returns
/// `(S ∘ T)` relabeled by `h`.
fn relabel(
    class: &ConceptClass,
    s: &[LabeledExample],
    t: &[Point],
    rng: &mut PrivRng,
) -> Result<(Vec<LabeledExample>, usize, usize)> {
    let mut points: Vec<Point> = s.iter().map(|r| r.point).collect();
    points.extend_from_slice(t);
    class.check_points(&points)?;
    let candidates = class.canonical_hypotheses(&dedup_points(&points));
    let mechanism = Exponential::new(1.0)?;
    let h = select_hypothesis(&mechanism, class, &candidates, s, rng)?;
    let table = class.table(h);
    let relabeled = points
        .into_iter()
        .map(|p| LabeledExample::labeled(p, table.get(p.index())))
        .collect();
    Ok((relabeled, h, candidates.len()))
}

/// One relabeling step on a segmented `S ∘ T ∘ D`. `D` is returned untouched
/// and the `S | T` boundary moves to the end of `T`.
pub fn label_boost_procedure(
    db: &PartiallyLabeledDatabase,
    class: &ConceptClass,
    rng: &mut PrivRng,
) -> Result<ProcedureOutput> {
    let s = db.s()?;
    let t: Vec<Point> = db.t()?.iter().map(|r| r.point).collect();
    let d = db.d()?;
    let (mut records, hypothesis, candidates) = relabel(class, s, &t, rng)?;
    let end = records.len();
    records.extend_from_slice(d);
    Ok(ProcedureOutput {
        database: PartiallyLabeledDatabase::with_segments(records, Segments { s_end: end, t_end: end })?,
        hypothesis,
        candidates,
    })
}

/// The relabeling procedure followed by `base` on its whole output, over
/// inputs laid out as `s_len` labeled, `t_len` middle and the rest unlabeled.
#[derive(Clone, Debug)]
pub struct ProcedureThen<M> {
    pub class: Arc<ConceptClass>,
    pub base: M,
    pub s_len: usize,
    pub t_len: usize,
}

impl<M: Mechanism<LabeledExample>> Mechanism<LabeledExample> for ProcedureThen<M> {
    type Outcome = M::Outcome;

    fn name(&self) -> String {
        format!("label_boost_procedure then {}", self.base.name())
    }

    fn declared_privacy(&self) -> PrivacyParams {
        PrivacyTransform::LabelBoostProcedure
            .apply(self.base.declared_privacy())
            .expect("procedure rule accepts any base")
    }

    fn run(&self, db: &[LabeledExample], rng: &mut PrivRng) -> Result<M::Outcome> {
        let seg = Segments {
            s_end: self.s_len,
            t_end: self.s_len + self.t_len,
        };
        let mut records = db.to_vec();
        for r in &mut records[seg.s_end..seg.t_end.min(db.len())] {
            r.label = None;
        }
        let input = PartiallyLabeledDatabase::with_segments(records, seg)?;
        let out = label_boost_procedure(&input, &self.class, rng)?;
        self.base.run(out.database.records(), rng)
    }
}

/// Self-training wrapper that cuts a private learner's labeled sample
/// complexity to about `VC / alpha`.
#[derive(Clone, Debug)]
pub struct LabelBoost<A> {
    base: A,
    config: LabelBoostConfig,
}

impl<A: Learner> LabelBoost<A> {
    pub fn new(base: A, config: LabelBoostConfig) -> Result<Self> {
        config.validate()?;
        Ok(LabelBoost { base, config })
    }

    pub fn config(&self) -> &LabelBoostConfig {
        &self.config
    }

    pub fn base(&self) -> &A {
        &self.base
    }

    /// Declared privacy after each step of the construction, base first:
    /// i.i.d. resampling, the final `299/300` deletion, then per iteration
    /// (last to first) the relabeling step and the `99/100` deletion.
    pub fn privacy_fold(&self, iterations: usize) -> Result<Vec<(String, PrivacyParams)>> {
        let Some(mut p) = self.base.declared_privacy() else {
            return Err(Error::domain("base learner declares no privacy"));
        };
        let mut out = vec![("base".to_string(), p)];
        let mut push = |name: &str, rule: PrivacyTransform, p: &mut PrivacyParams| -> Result<()> {
            *p = rule.apply(*p)?;
            out.push((name.to_string(), *p));
            Ok(())
        };
        push("iid_resample", PrivacyTransform::IidResample, &mut p)?;
        push("subsample 1/300", PrivacyTransform::Subsample { epsilon: 1.0 }, &mut p)?;
        for k in (1..=iterations).rev() {
            push(&format!("procedure #{k}"), PrivacyTransform::LabelBoostProcedure, &mut p)?;
            push(&format!("subsample 1/100 #{k}"), PrivacyTransform::Subsample { epsilon: 1.0 }, &mut p)?;
        }
        Ok(out)
    }
}

impl<A: Learner> Learner for LabelBoost<A> {
    fn name(&self) -> String {
        let kind = if self.config.agnostic { "label_boost_agnostic" } else { "label_boost" };
        format!("{kind}({})", self.base.name())
    }

    fn class(&self) -> &Arc<ConceptClass> {
        self.base.class()
    }

    /// `(1, 41 delta)` for a base that is `(eps <= 1, delta)`-private.
    fn declared_privacy(&self) -> Option<PrivacyParams> {
        let p = self.base.declared_privacy()?;
        (p.epsilon <= 1.0).then_some(PrivacyParams {
            epsilon: 1.0,
            delta: 41.0 * p.delta,
        })
    }

    fn sample_sizes(&self) -> SampleSizes {
        self.config.sample_sizes()
    }

    fn learn(&self, s: &[LabeledExample], d: &[Point], rng: &mut PrivRng) -> Result<LearnerOutput> {
        crate::concepts::require_labeled(s)?;
        let class = self.base.class().clone();
        let need = unlabeled_requirement(self.config.n, self.config.scale);
        if d.len() < need {
            return Err(Error::domain(format!(
                "label boosting needs at least {need} unlabeled records, got {}",
                d.len()
            )));
        }
        let plan = plan_label_boost(&self.config, s.len(), d.len())?;
        let mut transcript = Transcript::new(self.name());
        if (s.len() as f64) < labeled_threshold(
            self.config.alpha,
            self.config.beta,
            self.config.vc,
            self.config.scale,
            self.config.agnostic,
        ) {
            transcript.notes.push("labeled input below the growth threshold".into());
        }
        if self.config.scale != 1.0 {
            transcript
                .notes
                .push(format!("scale = {}: declared privacy constants assume scale 1", self.config.scale));
        }

        let mut labeled = s.to_vec();
        let mut pos = 0;
        for it in &plan.iterations {
            let t = &d[pos..pos + it.v];
            pos += it.v;
            let t_kept = keep_random(t, it.t_kept, rng)?;
            let s_kept = keep_random(&labeled, it.s_kept, rng)?;
            let (relabeled, h, candidates) = relabel(&class, &s_kept, &t_kept, rng)?;
            debug_assert_eq!(relabeled.len(), it.s_after);
            labeled = relabeled;
            transcript.iterations.push(BoostIteration {
                i: it.i,
                alpha_i: it.alpha_i,
                beta_i: it.beta_i,
                s_before: it.s_before,
                v: it.v,
                t_kept: it.t_kept,
                s_kept: it.s_kept,
                s_after: it.s_after,
                candidates,
                hypothesis: h,
            });
        }
        let kept = keep_random(&labeled, plan.base_input, rng)?;
        let resampled: Vec<LabeledExample> = resample_indices(kept.len(), kept.len(), rng)?
            .into_iter()
            .map(|i| kept[i])
            .collect();
        let base_out = self.base.learn(&resampled, &[], rng)?;

        transcript.base_input = Some(resampled.len());
        if let Ok(fold) = self.privacy_fold(plan.iterations.len()) {
            for (name, p) in fold {
                transcript.stage(name, p);
            }
        }
        transcript.base = Some(Box::new(base_out.transcript));
        Ok(LearnerOutput {
            hypothesis: base_out.hypothesis,
            labeled_used: s.len(),
            unlabeled_used: d.len(),
            transcript,
        })
    }
}

/// A uniformly random `keep`-subset of `items`, in original order.
fn keep_random<T: Copy>(items: &[T], keep: usize, rng: &mut PrivRng) -> Result<Vec<T>> {
    let mut idx = subsample_indices(items.len(), keep, rng)?;
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| items[i]).collect())
}
