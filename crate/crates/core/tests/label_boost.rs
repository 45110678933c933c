use std::sync::Arc;

use pssl_core::concepts::{label_with, ClassSpec, Distribution, LabeledExample, Point};
use pssl_core::learners::{
    GenericPrivateLearner, LabelBoost, LabelBoostConfig, Learner, LearnerOutput, PrivacyBoost,
};
use pssl_core::rng::rng_from_seed;

fn boost() -> LabelBoost<GenericPrivateLearner> {
    let class = Arc::new(ClassSpec::thresh(3).build().unwrap());
    let base = GenericPrivateLearner::new(class, 1.0, 3).unwrap();
    let cfg = LabelBoostConfig { alpha: 0.3, beta: 0.1, n: 30_000, scale: 1e-4, vc: 1, agnostic: false };
    LabelBoost::new(base, cfg).unwrap()
}

fn sizes(out: &LearnerOutput) -> Vec<(usize, usize, usize, usize)> {
    out.transcript.iterations.iter().map(|i| (i.v, i.t_kept, i.s_kept, i.s_after)).collect()
}

#[test]
fn iteration_sizes_do_not_depend_on_record_contents() {
    let lb = boost();
    let need = lb.sample_sizes();
    let class = lb.class().clone();
    let mut rng = rng_from_seed(1);
    let sampler = Distribution::Uniform.sampler(class.domain()).unwrap();
    let pts = sampler.sample_n(need.labeled, &mut rng);
    let d1 = sampler.sample_n(need.unlabeled, &mut rng);
    let s1 = label_with(&pts, |p| class.eval(2, p));
    let s2: Vec<LabeledExample> = pts.iter().map(|&p| LabeledExample::labeled(Point(7 - p.0), p.0 % 2 == 0)).collect();
    let d2: Vec<Point> = d1.iter().map(|p| Point(p.0 / 2)).collect();
    let a = lb.learn(&s1, &d1, &mut rng_from_seed(2)).unwrap();
    let b = lb.learn(&s2, &d2, &mut rng_from_seed(3)).unwrap();
    assert!(!a.transcript.iterations.is_empty());
    assert_eq!(sizes(&a), sizes(&b));
    assert_eq!(a.transcript.base_input, b.transcript.base_input);
    assert_eq!((a.labeled_used, b.labeled_used), (need.labeled, need.labeled));
}

#[test]
fn privacy_boost_at_unit_target_multiplies_sizes_by_about_5_72() {
    let class = Arc::new(ClassSpec::thresh(3).build().unwrap());
    let inner = GenericPrivateLearner::new(class, 1.0, 100).unwrap();
    let pb = PrivacyBoost::new(inner, 1.0).unwrap();
    // (3 + e) = 5.718...
    assert_eq!(pb.sample_sizes().labeled, 572);
    let p = pb.declared_privacy().unwrap();
    assert_eq!(p.epsilon, 1.0);
    assert_eq!(p.delta, 0.0);
}
