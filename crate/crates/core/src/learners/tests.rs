use std::sync::Arc;

use rand::Rng;

use super::*;
use crate::concepts::{
    empirical_error, label_with, ClassSpec, Domain, Member, PointSampler, Distribution,
};
use crate::mechanisms::{utility_bound, HypothesisSelection, Exponential};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sanitizer::SanitizerConfig;

fn thresh(bits: u32) -> Arc<ConceptClass> {
    Arc::new(ClassSpec::thresh(bits).build().unwrap())
}

fn uniform(class: &ConceptClass) -> PointSampler {
    Distribution::Uniform.sampler(class.domain()).unwrap()
}

fn sample(class: &ConceptClass, target: usize, m: usize, rng: &mut PrivRng) -> Vec<LabeledExample> {
    let pts = uniform(class).sample_n(m, rng);
    label_with(&pts, |p| class.eval(target, p))
}

#[test]
fn erm_realizable_and_agnostic() {
    let class = thresh(3);
    let mut rng = rng_from_seed(1);
    for target in 0..class.len() {
        let s = sample(&class, target, 20, &mut rng);
        let h = ErmLearner::minimize(&class, &s).unwrap();
        assert_eq!(empirical_error(class.table(h), &s).unwrap(), 0.into());
    }
    // Conflicting duplicates: x = 2 labelled 1 twice and 0 once.
    let s = vec![
        LabeledExample::labeled(Point(2), true),
        LabeledExample::labeled(Point(2), true),
        LabeledExample::labeled(Point(2), false),
        LabeledExample::labeled(Point(5), false),
    ];
    let h = ErmLearner::minimize(&class, &s).unwrap();
    let best = (0..class.len())
        .map(|i| crate::concepts::mistakes(class.table(i), &s))
        .min()
        .unwrap();
    assert_eq!(crate::concepts::mistakes(class.table(h), &s), best);
    assert_eq!(best, 1);
}

#[test]
fn erm_single_positive_example_picks_lowest_index() {
    let class = thresh(3);
    let s = [LabeledExample::labeled(Point(4), true)];
    let h = ErmLearner::minimize(&class, &s).unwrap();
    assert_eq!(class.member(h), &Member::Thresh(5));
}

#[test]
fn generic_private_two_point_softmax() {
    let spec = ClassSpec::Explicit {
        domain: Domain::bitline(1),
        truth_tables: vec![vec![0, 1], vec![1, 0]],
    };
    let class = Arc::new(spec.build().unwrap());
    let m = 4;
    // Member 0 labels every record correctly, member 1 none.
    let s: Vec<_> = (0..m).map(|_| LabeledExample::labeled(Point(1), true)).collect();
    let eps = 0.5;
    let learner = GenericPrivateLearner::new(class.clone(), eps, m).unwrap();
    let trials = 20_000;
    let mut rng = rng_from_seed(2);
    let hits = (0..trials)
        .filter(|_| learner.learn(&s, &[], &mut rng).unwrap().hypothesis == 0)
        .count();
    let e = (eps * m as f64 / 2.0).exp();
    let p = e / (e + 1.0);
    let sd = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((hits as f64 / trials as f64 - p).abs() < 4.0 * sd);
}

#[test]
fn generic_private_meets_its_size_formula() {
    let class = thresh(3);
    let (alpha, beta, eps) = (0.2, 0.1, 1.0);
    let m = generic_private_size(class.len(), alpha, beta, eps);
    let learner = GenericPrivateLearner::new(class.clone(), eps, m).unwrap();
    let trials = 300;
    let mut bad = 0;
    for t in 0..trials {
        let mut rng = rng_from_seed(derive_seed(77, t));
        let target = rng.random_range(0..class.len());
        let s = sample(&class, target, m, &mut rng);
        let out = learner.learn(&s, &[], &mut rng).unwrap();
        let err = empirical_error(class.table(out.hypothesis), &s).unwrap();
        if err > num_rational::Ratio::new(1, 5) {
            bad += 1;
        }
        assert_eq!(out.labeled_used, m);
    }
    let rate = bad as f64 / trials as f64;
    let sd = (beta * (1.0 - beta) / trials as f64).sqrt();
    assert!(rate <= beta + 2.0 * sd, "{rate}");
    assert!(utility_bound(class.len(), eps, m, alpha) <= beta);
}

#[test]
fn generic_private_at_large_epsilon_is_erm() {
    let class = thresh(3);
    let learner = GenericPrivateLearner::new(class.clone(), 100.0, 12).unwrap();
    let mut rng = rng_from_seed(3);
    for _ in 0..50 {
        let target = rng.random_range(0..class.len());
        let s = sample(&class, target, 12, &mut rng);
        let h = learner.learn(&s, &[], &mut rng).unwrap().hypothesis;
        assert_eq!(crate::concepts::mistakes(class.table(h), &s), 0);
    }
}

#[test]
fn generic_learner_is_proper_and_bounded() {
    let class = thresh(3);
    let cfg = SanitizerConfig::new(0.2, 0.2, 1.0).with_kappa(0.2);
    let sizes = SampleSizes { labeled: 30, unlabeled: 200 };
    let learner = GenericLearner::new(class.clone(), cfg, sizes).unwrap();
    let mut rng = rng_from_seed(4);
    for _ in 0..20 {
        let s = sample(&class, 3, 30, &mut rng);
        let d = uniform(&class).sample_n(200, &mut rng);
        let out = learner.learn(&s, &d, &mut rng).unwrap();
        assert!(out.hypothesis < class.len());
        let san = out.transcript.sanitizer.clone().unwrap();
        let h = out.transcript.candidates.unwrap();
        assert!((h as f64).log2() <= san.support_size as f64);
        assert!(san.support_size <= san.target_size);
        assert!(!san.approximate);
    }
    assert_eq!(learner.conservative_privacy().epsilon, 2.0);
    assert_eq!(learner.disjoint_privacy().epsilon, 1.0);
}

#[test]
fn generic_learner_on_single_concept_class() {
    let spec = ClassSpec::Explicit {
        domain: Domain::bitline(2),
        truth_tables: vec![vec![0, 1, 1, 0]],
    };
    let class = Arc::new(spec.build().unwrap());
    let cfg = SanitizerConfig::new(0.25, 0.2, 1.0).with_target_size(3);
    let learner = GenericLearner::new(class.clone(), cfg, SampleSizes { labeled: 3, unlabeled: 5 }).unwrap();
    let mut rng = rng_from_seed(5);
    for _ in 0..10 {
        let s = sample(&class, 0, 3, &mut rng);
        let d = uniform(&class).sample_n(5, &mut rng);
        assert_eq!(learner.learn(&s, &d, &mut rng).unwrap().hypothesis, 0);
    }
}

#[test]
fn split_prefix_rules() {
    let l = LabeledExample::labeled(Point(0), true);
    let u = LabeledExample::unlabeled(Point(1));
    let recs = [l, l, u];
    let (s, d) = split_prefix(&recs).unwrap();
    assert_eq!((s.len(), d.len()), (2, 1));
    assert!(split_prefix(&[l, u, l]).is_err());
}

fn segmented(class: &ConceptClass, target: usize, s: usize, t: usize, d: usize, seed: u64) -> PartiallyLabeledDatabase {
    let mut rng = rng_from_seed(seed);
    let sampler = uniform(class);
    let s_pts = sampler.sample_n(s, &mut rng);
    let s = label_with(&s_pts, |p| class.eval(target, p));
    let t = sampler.sample_n(t, &mut rng).into_iter().map(LabeledExample::unlabeled).collect();
    let d = sampler.sample_n(d, &mut rng).into_iter().map(LabeledExample::unlabeled).collect();
    PartiallyLabeledDatabase::segmented(s, t, d).unwrap()
}

#[test]
fn procedure_is_structural() {
    let class = thresh(3);
    let db = segmented(&class, 4, 6, 5, 7, 9);
    let out = label_boost_procedure(&db, &class, &mut rng_from_seed(1)).unwrap();
    assert_eq!(out.database.len(), db.len());
    assert_eq!(out.database.d().unwrap(), db.d().unwrap());
    assert_eq!(out.database.s().unwrap().len(), 11);
    for (a, b) in out.database.records().iter().zip(db.records()) {
        assert_eq!(a.point, b.point);
    }
    let h = out.hypothesis;
    assert!(out.database.s().unwrap().iter().all(|r| r.label == Some(class.eval(h, r.point))));
}

#[test]
fn procedure_with_empty_t_relabels_consistently() {
    let class = thresh(3);
    let db = segmented(&class, 5, 40, 0, 3, 2);
    let mut rng = rng_from_seed(3);
    let mut good = 0;
    for _ in 0..100 {
        let out = label_boost_procedure(&db, &class, &mut rng).unwrap();
        let err = empirical_error(class.table(out.hypothesis), db.s().unwrap()).unwrap();
        if err <= num_rational::Ratio::new(1, 10) {
            good += 1;
        }
    }
    assert!(good >= 90);
}

#[test]
fn procedure_meets_its_relabeling_bound() {
    // |T| <= (beta / e) VC exp(alpha |S| / (2 VC)) - |S| with alpha = 0.2, beta = 0.1.
    let class = thresh(3);
    let (alpha, beta) = (0.2, 0.1);
    let s_len = 80;
    let bound = beta / std::f64::consts::E * (alpha * s_len as f64 / 2.0).exp() - s_len as f64;
    let t_len = bound.floor() as usize;
    assert!(t_len >= 20);
    let runs = 500;
    let mut bad = 0;
    for seed in 0..runs {
        let mut rng = rng_from_seed(derive_seed(31, seed));
        let target = rng.random_range(0..class.len());
        let db = segmented(&class, target, s_len, t_len, 0, derive_seed(32, seed));
        let out = label_boost_procedure(&db, &class, &mut rng).unwrap();
        let err = empirical_error(class.table(out.hypothesis), db.s().unwrap()).unwrap();
        if err > num_rational::Ratio::new(1, 5) {
            bad += 1;
        }
    }
    let sd = (beta * (1.0 - beta) / runs as f64).sqrt();
    assert!((bad as f64 / runs as f64) <= beta + 2.0 * sd, "{bad}");
}

fn boost_config(n: usize, scale: f64) -> LabelBoostConfig {
    LabelBoostConfig {
        alpha: 0.3,
        beta: 0.1,
        n,
        scale,
        vc: 1,
        agnostic: false,
    }
}

#[test]
fn schedule_sums() {
    let s = BoostSchedule { alpha: 0.3, beta: 0.1 };
    let a: f64 = (1..60).map(|i| s.alpha_i(i)).sum();
    let b: f64 = (1..60).map(|i| s.beta_i(i)).sum();
    assert!(a <= 0.3 / 10.0 + 1e-15);
    assert!(b <= 0.1 / 4.0 + 1e-15);
}

#[test]
fn growth_invariant_at_unit_scale() {
    for &(alpha, beta, vc, n) in &[
        (0.3, 0.1, 1usize, 100_000usize),
        (0.1, 0.05, 2, 1_000_000),
        (0.2, 0.2, 4, 10_000_000),
        (0.4, 0.1, 1, 50_000_000),
    ] {
        let cfg = LabelBoostConfig {
            alpha,
            beta,
            n,
            scale: 1.0,
            vc,
            agnostic: false,
        };
        let m = cfg.labeled_target();
        let plan = plan_label_boost(&cfg, m, unlabeled_requirement(n, 1.0)).unwrap();
        assert!(!plan.iterations.is_empty());
        let mut prev = 0;
        for it in &plan.iterations {
            let lb = growth_lower_bound(it.alpha_i, it.beta_i, vc);
            assert!(it.s_before as f64 >= lb * (1.0 - 1e-12), "{it:?} vs {lb}");
            assert!(it.s_before >= prev);
            prev = it.s_before;
        }
        assert!(plan.unlabeled_consumed <= unlabeled_requirement(n, 1.0));
        assert!(plan.iterations.len() <= 5);
    }
}

#[test]
fn plan_never_fails_with_enough_unlabeled_data() {
    for n in [1usize, 7, 50, 300, 5000] {
        for scale in [1.0, 0.1, 1e-3] {
            let cfg = boost_config(n, scale);
            let m = cfg.labeled_target();
            let d = unlabeled_requirement(n, scale);
            let plan = plan_label_boost(&cfg, m, d).unwrap();
            assert!(plan.unlabeled_consumed <= d);
        }
    }
}

#[test]
fn plan_failure_paths() {
    let cfg = boost_config(30_000, 1e-3);
    // Too little unlabeled data.
    assert!(matches!(plan_label_boost(&cfg, 3600, 10), Err(Error::Failure(_))));
    // Tiny S: v = 0.
    let cfg = LabelBoostConfig { scale: 1.0, ..boost_config(30, 1.0) };
    assert!(matches!(plan_label_boost(&cfg, 3, 10_000_000), Err(Error::Failure(_))));
}

fn small_boost() -> (Arc<ConceptClass>, LabelBoost<GenericPrivateLearner>) {
    let class = thresh(3);
    // Base input about 300 n s / 300 = 3 records; labeled input about 359.
    let base = GenericPrivateLearner::new(class.clone(), 1.0, 3).unwrap();
    let lb = LabelBoost::new(base, boost_config(30_000, 1e-4)).unwrap();
    (class, lb)
}

#[test]
fn label_boost_accounting_and_sizes() {
    let (class, lb) = small_boost();
    let sizes = lb.sample_sizes();
    assert_eq!(sizes.unlabeled, 270_000);
    assert_eq!(sizes.labeled, 360);
    let mut rng = rng_from_seed(6);
    let s = sample(&class, 3, sizes.labeled, &mut rng);
    let d = uniform(&class).sample_n(sizes.unlabeled, &mut rng);
    let out = lb.learn(&s, &d, &mut rng).unwrap();
    assert_eq!(out.labeled_used, sizes.labeled);
    assert!(!out.transcript.iterations.is_empty());
    assert!(out.transcript.iterations.len() <= 5);
    assert!(out.hypothesis < class.len());
    assert_eq!(lb.declared_privacy(), Some(PrivacyParams::pure(1.0)));

    // Sizes do not depend on content.
    let s2 = sample(&class, 7, sizes.labeled, &mut rng);
    let d2: Vec<Point> = d.iter().map(|p| Point(7 - p.0)).collect();
    let out2 = lb.learn(&s2, &d2, &mut rng).unwrap();
    let shape = |o: &LearnerOutput| {
        o.transcript
            .iterations
            .iter()
            .map(|it| (it.s_before, it.v, it.t_kept, it.s_kept, it.s_after))
            .collect::<Vec<_>>()
    };
    assert_eq!(shape(&out), shape(&out2));
    assert_eq!(out.transcript.base_input, out2.transcript.base_input);
}

#[test]
fn label_boost_rejects_short_unlabeled_input() {
    let (class, lb) = small_boost();
    let mut rng = rng_from_seed(7);
    let s = sample(&class, 3, lb.sample_sizes().labeled, &mut rng);
    let d = uniform(&class).sample_n(100, &mut rng);
    assert!(lb.learn(&s, &d, &mut rng).is_err());
}

#[test]
fn label_boost_privacy_fold_stays_within_lemma() {
    let class = thresh(3);
    let base = PrivacyBoost::new(GenericPrivateLearner::new(class.clone(), 1.0, 30).unwrap(), 1.0).unwrap();
    // A (1, delta) stand-in: fold arithmetic only needs the declaration.
    struct Approx(Arc<ConceptClass>);
    impl Learner for Approx {
        fn name(&self) -> String {
            "approx".into()
        }
        fn class(&self) -> &Arc<ConceptClass> {
            &self.0
        }
        fn declared_privacy(&self) -> Option<PrivacyParams> {
            Some(PrivacyParams::new(1.0, 1e-6).unwrap())
        }
        fn sample_sizes(&self) -> SampleSizes {
            SampleSizes { labeled: 1, unlabeled: 0 }
        }
        fn learn(&self, s: &[LabeledExample], _d: &[Point], _r: &mut PrivRng) -> Result<LearnerOutput> {
            Ok(LearnerOutput {
                hypothesis: 0,
                labeled_used: s.len(),
                unlabeled_used: 0,
                transcript: Transcript::new("approx"),
            })
        }
    }
    let lb = LabelBoost::new(Approx(class.clone()), boost_config(10, 1.0)).unwrap();
    for k in 0..6 {
        let fold = lb.privacy_fold(k).unwrap();
        let (_, last) = fold.last().unwrap();
        assert!(last.epsilon <= 1.0);
        assert!(last.delta <= 41e-6, "{k}: {}", last.delta);
    }
    assert_eq!(lb.declared_privacy().unwrap().delta, 41e-6);
    assert!(base.declared_privacy().unwrap().epsilon <= 1.0);
}

#[test]
fn agnostic_threshold_uses_alpha_squared() {
    let r = labeled_threshold(0.2, 0.1, 1, 1.0, true) / labeled_threshold(0.2, 0.1, 1, 1.0, false);
    assert!((r - 5.0).abs() < 1e-12);
}

#[test]
fn agnostic_singleton_class_returns_its_member() {
    let spec = ClassSpec::Explicit {
        domain: Domain::bitline(3),
        truth_tables: vec![vec![0, 1, 1, 0, 0, 1, 0, 1]],
    };
    let class = Arc::new(spec.build().unwrap());
    let base = GenericPrivateLearner::new(class.clone(), 1.0, 5).unwrap();
    let cfg = LabelBoostConfig { agnostic: true, vc: 0, ..boost_config(5, 1e-3) };
    let lb = LabelBoost::new(base, cfg).unwrap();
    let mut rng = rng_from_seed(8);
    let sizes = lb.sample_sizes();
    let pts = uniform(&class).sample_n(sizes.labeled, &mut rng);
    let s = label_with(&pts, |p| p.0 % 2 == 0);
    let d = uniform(&class).sample_n(sizes.unlabeled, &mut rng);
    for _ in 0..5 {
        assert_eq!(lb.learn(&s, &d, &mut rng).unwrap().hypothesis, 0);
    }
}

#[test]
fn privacy_boost_sizes_and_declaration() {
    let class = thresh(3);
    let inner = GenericPrivateLearner::new(class.clone(), 1.0, 100).unwrap();
    let boosted = PrivacyBoost::new(inner, 1.0).unwrap();
    let sizes = boosted.sample_sizes();
    // (3 + e) = 5.718...
    assert_eq!(sizes.labeled, 572);
    assert_eq!(boosted.declared_privacy().unwrap().epsilon, 1.0);
    let mut rng = rng_from_seed(10);
    let s = sample(&class, 2, sizes.labeled, &mut rng);
    let out = boosted.learn(&s, &[], &mut rng).unwrap();
    assert!(out.hypothesis < class.len());
    assert!(boosted.learn(&s[..500], &[], &mut rng).is_err());
}

#[test]
fn learner_mechanism_matches_selection() {
    let class = thresh(2);
    let s = sample(&class, 2, 6, &mut rng_from_seed(1));
    let learner = LearnerMechanism(GenericPrivateLearner::new(class.clone(), 1.0, 6).unwrap());
    let direct = HypothesisSelection::over_class(class.clone(), Exponential::new(1.0).unwrap());
    for seed in 0..30 {
        assert_eq!(learner.run_seeded(&s, seed).unwrap(), direct.run_seeded(&s, seed).unwrap());
    }
}
