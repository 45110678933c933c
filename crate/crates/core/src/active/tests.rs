use super::*;
use crate::audit::neighbors;
use crate::concepts::{label_with, ClassSpec, Distribution};
use crate::learners::GenericPrivateLearner;
use crate::rng::rng_from_seed;

fn thresh(bits: u32) -> Arc<ConceptClass> {
    Arc::new(ClassSpec::thresh(bits).build().unwrap())
}

fn pool(class: &ConceptClass, target: usize, n: usize, seed: u64) -> Vec<LabeledExample> {
    let mut rng = rng_from_seed(seed);
    let pts = Distribution::Uniform.sampler(class.domain()).unwrap().sample_n(n, &mut rng);
    label_with(&pts, |p| class.eval(target, p))
}

#[test]
fn oracle_enforces_budget_and_counts_duplicates() {
    let class = thresh(2);
    let p = pool(&class, 2, 5, 1);
    let mut o = LabelOracle::new(&p, 3).unwrap();
    o.query(1).unwrap();
    o.query(1).unwrap();
    assert_eq!(o.transcript(), &[1, 1]);
    assert!(matches!(o.query(9), Err(Error::Protocol(_))));
    o.query(0).unwrap();
    assert!(matches!(o.query(0), Err(Error::Protocol(_))));
    assert_eq!(o.queries(), 3);
    let unlabeled = [LabeledExample::unlabeled(Point(0))];
    assert!(LabelOracle::new(&unlabeled, 1).is_err());
}

#[test]
fn zero_budget_learner_queries_nothing() {
    let class = thresh(2);
    let p = pool(&class, 1, 8, 2);
    let learner = SemiSupervisedAsActive(GenericPrivateLearner::new(class.clone(), 1.0, 0).unwrap());
    let run = run_active(&learner, &p, 0, &mut rng_from_seed(0)).unwrap();
    assert!(run.transcript.is_empty());
    assert!(run.output.hypothesis < class.len());
}

#[test]
fn prefix_adapter_queries_the_prefix() {
    let class = thresh(2);
    let p = pool(&class, 1, 10, 3);
    let learner = SemiSupervisedAsActive(GenericPrivateLearner::new(class.clone(), 1.0, 4).unwrap());
    let run = run_active(&learner, &p, 4, &mut rng_from_seed(0)).unwrap();
    assert_eq!(run.transcript, vec![0, 1, 2, 3]);
    assert_eq!(run.output.labeled_used, 4);
}

#[test]
fn over_budget_learner_is_a_protocol_error() {
    let class = thresh(2);
    let p = pool(&class, 1, 10, 3);
    let learner = SemiSupervisedAsActive(GenericPrivateLearner::new(class.clone(), 1.0, 5).unwrap());
    assert!(matches!(
        run_active(&learner, &p, 4, &mut rng_from_seed(0)),
        Err(Error::Protocol(_))
    ));
}

#[test]
fn subsampling_pool_size_and_transcript() {
    let class = thresh(3);
    let inner = GenericPrivateLearner::new(class.clone(), 1.0, 50).unwrap();
    let w = SubSamplingActive::new(inner, 1.0).unwrap();
    // n = 50 labeled + 0 unlabeled; 50 (3 + e^2) = 519.45
    assert_eq!(w.pool_size(), 520);
    let p = pool(&class, 3, 520, 4);
    let mut rng = rng_from_seed(5);
    for _ in 0..20 {
        let run = run_active(&w, &p, w.budget(), &mut rng).unwrap();
        assert_eq!(run.transcript.len(), 50);
        assert!(run.transcript.windows(2).all(|x| x[0] < x[1]));
    }
    assert!(run_active(&w, &p[..519], 50, &mut rng).is_err());
    let declared = w.declared_privacy().unwrap();
    assert_eq!(declared, PrivacyParams::pure(1.0));
}

#[test]
fn k_is_the_smallest_indices_of_j() {
    let class = thresh(3);
    let inner = crate::learners::GenericLearner::new(
        class.clone(),
        crate::sanitizer::SanitizerConfig::new(0.2, 0.2, 1.0).with_target_size(4),
        crate::learners::SampleSizes { labeled: 5, unlabeled: 20 },
    )
    .unwrap();
    let w = SubSamplingActive::new(inner, 0.5).unwrap();
    let mut rng = rng_from_seed(6);
    for _ in 0..50 {
        let (j, k) = w.choose_indices(w.pool_size(), &mut rng).unwrap();
        assert_eq!(j.len(), 25);
        assert_eq!(k.len(), 5);
        let max_k = *k.last().unwrap();
        assert!(j.iter().filter(|&&x| x <= max_k).count() == 5);
    }
}

#[test]
fn subsampling_transcript_is_data_independent() {
    let class = thresh(2);
    let inner = GenericPrivateLearner::new(class.clone(), 1.0, 3).unwrap();
    let w = SubSamplingActive::new(inner, 1.0).unwrap();
    let p = pool(&class, 2, w.pool_size(), 7);
    let pair = neighbors(&p, 0, LabeledExample::labeled(Point(3), true)).unwrap();
    let report = transcript_leak_probe(w, &pair, 3, &AuditConfig::new(2000, 8)).unwrap();
    assert!(report.transcripts_coupled_equal);
    assert_eq!(report.transcript.epsilon_point, 0.0);
}

#[test]
fn first_positive_learner_leaks_through_its_transcript() {
    // Pools differ only in the label of record 0: with it positive the
    // learner stops after one query, otherwise it continues to record 1.
    let class = thresh(2);
    let p1 = vec![
        LabeledExample::labeled(Point(0), true),
        LabeledExample::labeled(Point(1), true),
        LabeledExample::labeled(Point(3), false),
    ];
    let pair = neighbors(&p1, 0, LabeledExample::labeled(Point(0), false)).unwrap();
    let learner = FirstPositiveLearner { class: class.clone(), budget: 3 };
    let report = transcript_leak_probe(learner, &pair, 3, &AuditConfig::new(1000, 9)).unwrap();
    assert!(!report.transcripts_coupled_equal);
    assert!(report.transcript.epsilon_point.is_infinite());
    assert!(report.transcript.epsilon_hat > 5.0);
    let lens: Vec<_> = report.transcript.histogram.iter().map(|h| (h.outcome.clone(), h.count1, h.count2)).collect();
    assert_eq!(
        lens,
        vec![("\"[0, 1]\"".to_string(), 0, 1000), ("\"[0]\"".to_string(), 1000, 0)]
    );
}
