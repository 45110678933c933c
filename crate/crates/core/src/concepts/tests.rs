use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::error::Error;

fn pts(v: &[u32]) -> Vec<Point> {
    v.iter().map(|&x| Point(x)).collect()
}

fn set(v: &[&[u8]]) -> BTreeSet<Vec<u8>> {
    v.iter().map(|r| r.to_vec()).collect()
}

/// Naive VC oracle: try every subset of the domain, largest first.
fn vc_by_power_set(class: &ConceptClass) -> usize {
    let n = class.domain().cardinality();
    assert!(n <= 16);
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if k <= best {
            continue;
        }
        let b: Vec<Point> = (0..n as u32).filter(|i| mask >> i & 1 == 1).map(Point).collect();
        let realised: BTreeSet<Vec<bool>> = (0..class.len())
            .map(|c| b.iter().map(|&p| class.eval(c, p)).collect())
            .collect();
        if realised.len() == 1 << k {
            best = k;
        }
    }
    best
}

fn explicit(domain: Domain, tables: Vec<Vec<u8>>) -> ConceptClass {
    ClassSpec::Explicit {
        domain,
        truth_tables: tables,
    }
    .build()
    .unwrap()
}

fn as_function_set(class: &ConceptClass) -> BTreeSet<Vec<bool>> {
    class.tables().iter().map(|t| t.to_bools()).collect()
}

#[test]
fn thresh_evaluation() {
    let c = ClassSpec::thresh(2).build().unwrap();
    assert_eq!(c.len(), 5);
    let c2 = c.concept(2).unwrap();
    assert!(c.evaluate(c2, &DomainPoint::new([1])).unwrap());
    assert!(!c.evaluate(c2, &DomainPoint::new([2])).unwrap());
    assert!(matches!(
        c.evaluate(c2, &DomainPoint::new([1, 0])),
        Err(Error::Domain(_))
    ));
}

#[test]
fn concept_from_another_class_rejected() {
    let a = ClassSpec::thresh(2).build().unwrap();
    let b = ClassSpec::point(2).build().unwrap();
    let c = b.concept(0).unwrap();
    assert!(a.evaluate(c, &DomainPoint::new([0])).is_err());
}

#[test]
fn rect_evaluation() {
    let c = ClassSpec::rect(2, 2).build().unwrap();
    let idx = c
        .index_of(&Member::Rect(Some((vec![1, 1], vec![2, 2]))))
        .unwrap();
    let concept = c.concept(idx).unwrap();
    assert!(c.evaluate(concept, &DomainPoint::new([1, 2])).unwrap());
    assert!(!c.evaluate(concept, &DomainPoint::new([0, 2])).unwrap());
    assert!(!c.evaluate(concept, &DomainPoint::new([1, 3])).unwrap());
}

#[test]
fn xor_of_identical_pair_is_zero() {
    let x = ClassSpec::xor(ClassSpec::thresh(2)).build().unwrap();
    // (h, h) pairs all collapse onto the first member
    assert_eq!(x.member(0), &Member::Xor(0, 0));
    assert_eq!(x.table(0).count_ones(), 0);
    // members are distinct functions
    assert_eq!(as_function_set(&x).len(), x.len());
}

#[test]
fn xor_member_disagrees_where_base_disagrees() {
    let base = ClassSpec::thresh(3).build().unwrap();
    let x = base.xor_class().unwrap();
    for i in 0..x.len() {
        let Member::Xor(a, b) = *x.member(i) else { panic!() };
        for p in base.domain().points() {
            assert_eq!(x.eval(i, p), base.eval(a, p) != base.eval(b, p));
        }
    }
}

#[test]
fn thresh_projection_on_two_points() {
    let c = ClassSpec::thresh(2).build().unwrap();
    let proj = c.projection(&pts(&[1, 3])).unwrap();
    assert_eq!(proj.vectors(), set(&[&[0, 0], &[1, 0], &[1, 1]]));
}

#[test]
fn xor_thresh_projection_on_two_points() {
    let x = ClassSpec::xor(ClassSpec::thresh(2)).build().unwrap();
    let proj = x.projection(&pts(&[1, 3])).unwrap();
    assert_eq!(proj.vectors(), set(&[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]));
}

#[test]
fn singleton_projection_with_both_labels() {
    for spec in [ClassSpec::thresh(2), ClassSpec::point(2), ClassSpec::interval(2)] {
        let c = spec.build().unwrap();
        assert_eq!(c.projection(&pts(&[1])).unwrap().vectors(), set(&[&[0], &[1]]));
    }
}

#[test]
fn projection_deduplicates_points() {
    let c = ClassSpec::thresh(2).build().unwrap();
    let p = c.projection(&pts(&[3, 1, 3, 1])).unwrap();
    assert_eq!(p.points, pts(&[3, 1]));
    assert_eq!(p.vectors(), set(&[&[0, 0], &[0, 1], &[1, 1]]));
    assert!(c.projection(&[]).is_err());
    assert!(c.projection(&pts(&[4])).is_err());
}

#[test]
fn consistent_concept_lowest_index() {
    let c = ClassSpec::thresh(2).build().unwrap();
    let b = pts(&[1, 3]);
    assert_eq!(c.consistent_concept(&b, &[true, false]).unwrap().unwrap().index, 2);
    assert_eq!(c.consistent_concept(&b, &[false, false]).unwrap().unwrap().index, 0);
    assert_eq!(c.consistent_concept(&b, &[false, true]).unwrap(), None);
    assert!(c.consistent_concept(&b, &[true]).is_err());
    // duplicate points with conflicting labels are unrealisable
    assert_eq!(c.consistent_concept(&pts(&[1, 1]), &[true, false]).unwrap(), None);
}

#[test]
fn canonical_hypotheses_one_per_dichotomy() {
    let c = ClassSpec::thresh(3).build().unwrap();
    // thresholds on {2, 5}: j <= 2, 3..=5, 6..=8
    assert_eq!(c.canonical_hypotheses(&pts(&[2, 5, 2])), vec![0, 3, 6]);
}

#[test]
fn vc_dimension_examples() {
    assert_eq!(ClassSpec::thresh(4).build().unwrap().vc_dimension().unwrap(), 1);
    assert_eq!(ClassSpec::rect(2, 2).build().unwrap().vc_dimension().unwrap(), 4);
    let single = explicit(Domain::bitline(2), vec![vec![0, 1, 1, 0]]);
    assert_eq!(single.vc_dimension().unwrap(), 0);
}

#[test]
fn vc_matches_known_and_power_set_oracle() {
    let specs = [
        ClassSpec::thresh(1),
        ClassSpec::thresh(3),
        ClassSpec::point(2),
        ClassSpec::point(4),
        ClassSpec::interval(3),
        ClassSpec::rect(1, 2),
        ClassSpec::rect(2, 2),
        ClassSpec::xor(ClassSpec::thresh(3)),
        ClassSpec::xor(ClassSpec::point(3)),
    ];
    for spec in specs {
        let c = spec.build().unwrap();
        let vc = c.vc_dimension().unwrap();
        assert_eq!(vc, vc_by_power_set(&c), "{}", c.id());
        if let Some(k) = c.known_vc() {
            assert_eq!(vc, k, "{}", c.id());
        }
    }
}

#[test]
fn vc_budget_exhaustion_is_resource_error() {
    let c = ClassSpec::rect(2, 2).build().unwrap();
    let tight = Budget {
        projections: 10,
        ..Budget::default()
    };
    assert!(matches!(c.vc_dimension_with_budget(tight), Err(Error::Resource(_))));
}

#[test]
fn class_budget_exhaustion_is_resource_error() {
    let tight = Budget {
        class_cells: 100,
        ..Budget::default()
    };
    let r = ConceptClass::build(&ClassSpec::rect(2, 2), tight);
    assert!(matches!(r, Err(Error::Resource(_))));
}

#[test]
fn explicit_class_validation() {
    let d = Domain::bitline(1);
    let dup = ClassSpec::Explicit {
        domain: d,
        truth_tables: vec![vec![0, 1], vec![0, 1]],
    };
    assert!(dup.build().is_err());
    let short = ClassSpec::Explicit {
        domain: d,
        truth_tables: vec![vec![0]],
    };
    assert!(short.build().is_err());
    let spec = load_explicit(r#"{"domain":{"kind":"bitline","bits":1},"truthTables":[[0,1],[1,1]]}"#)
        .unwrap();
    assert_eq!(spec.build().unwrap().len(), 2);
    let parsed: ClassSpec = r#"{"domain":{"kind":"bitline","bits":1},"truthTables":[[0,1]]}"#
        .parse()
        .unwrap();
    assert_eq!(parsed.build().unwrap().len(), 1);
}

#[test]
fn shorthand_parsing() {
    assert_eq!("thresh:3".parse::<ClassSpec>().unwrap(), ClassSpec::thresh(3));
    assert_eq!("rect:2x2".parse::<ClassSpec>().unwrap(), ClassSpec::rect(2, 2));
    assert_eq!(
        "xor(point:2)".parse::<ClassSpec>().unwrap(),
        ClassSpec::xor(ClassSpec::point(2))
    );
    assert!("bogus:1".parse::<ClassSpec>().is_err());
    let json = serde_json::to_string(&ClassSpec::xor(ClassSpec::thresh(2))).unwrap();
    assert_eq!(json.parse::<ClassSpec>().unwrap(), ClassSpec::xor(ClassSpec::thresh(2)));
}

#[test]
fn closed_forms_agree_with_hand_written_tables() {
    let d = Domain::bitline(2);
    let thresh: Vec<Vec<u8>> = (0..=4u8)
        .map(|j| (0..4u8).map(|x| u8::from(x < j)).collect())
        .collect();
    assert_eq!(
        as_function_set(&ClassSpec::thresh(2).build().unwrap()),
        as_function_set(&explicit(d, thresh))
    );

    let points: Vec<Vec<u8>> = (0..4u8)
        .map(|j| (0..4u8).map(|x| u8::from(x == j)).collect())
        .collect();
    assert_eq!(
        as_function_set(&ClassSpec::point(2).build().unwrap()),
        as_function_set(&explicit(d, points))
    );

    let mut ivs = vec![vec![0u8; 4]];
    for a in 0..4u8 {
        for b in a..4u8 {
            ivs.push((0..4u8).map(|x| u8::from(a <= x && x <= b)).collect());
        }
    }
    assert_eq!(
        as_function_set(&ClassSpec::interval(2).build().unwrap()),
        as_function_set(&explicit(d, ivs))
    );

    // rectangles over the 4x4 grid, every (a, b) corner pair including empty ones
    let g = Domain::grid(2, 2);
    let mut rects = BTreeSet::new();
    for a0 in 0..4u32 {
        for a1 in 0..4u32 {
            for b0 in 0..4u32 {
                for b1 in 0..4u32 {
                    let t: Vec<u8> = g
                        .points()
                        .map(|p| {
                            let x = g.decode(p).coords;
                            u8::from(a0 <= x[0] && x[0] <= b0 && a1 <= x[1] && x[1] <= b1)
                        })
                        .collect();
                    rects.insert(t);
                }
            }
        }
    }
    let rect_class = ClassSpec::rect(2, 2).build().unwrap();
    assert_eq!(rect_class.len(), rects.len());
    assert_eq!(
        as_function_set(&rect_class),
        as_function_set(&explicit(g, rects.into_iter().collect()))
    );
}

#[test]
fn sauer_bound_values() {
    assert_eq!(sauer_bound(0, 5), 1.0);
    assert!((sauer_bound(1, 3) - 3.0 * std::f64::consts::E).abs() < 1e-12);
}

fn random_explicit() -> impl Strategy<Value = ConceptClass> {
    proptest::collection::btree_set(0u8..=255, 1..20).prop_map(|tables| {
        explicit(
            Domain::bitline(3),
            tables
                .into_iter()
                .map(|t| (0..8).map(|i| (t >> i) & 1).collect())
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn consistent_iff_in_projection(class in random_explicit(),
                                    b in proptest::collection::vec(0u32..8, 1..5),
                                    bits in any::<u8>()) {
        let b: Vec<Point> = dedup_points(&pts(&b));
        let z: Vec<bool> = (0..b.len()).map(|i| bits >> i & 1 == 1).collect();
        let proj = class.projection(&b).unwrap();
        let found = class.consistent_concept(&b, &z).unwrap();
        prop_assert_eq!(found.is_some(), proj.contains(&z));
        if let Some(c) = found {
            prop_assert_eq!(class.pattern(c.index, &b).to_bools(), z.clone());
            // lowest index
            for i in 0..c.index {
                prop_assert_ne!(class.pattern(i, &b).to_bools(), z.clone());
            }
        }
    }

    #[test]
    fn xor_projection_law(class in random_explicit(),
                          b in proptest::collection::vec(0u32..8, 1..6)) {
        let x = class.xor_class().unwrap();
        let b = pts(&b);
        let lhs = x.projection(&b).unwrap().patterns;
        prop_assert_eq!(lhs, class.projection(&b).unwrap().xor_closure());
    }

    #[test]
    fn sauer_holds(class in random_explicit(),
                   b in proptest::collection::vec(0u32..8, 1..8)) {
        let vc = class.vc_dimension().unwrap();
        let proj = class.projection(&pts(&b)).unwrap();
        let size = proj.points.len();
        prop_assert!(proj.len() <= class.len().min(1 << size));
        if size > vc {
            prop_assert!(proj.len() as f64 <= sauer_bound(vc, size) + 1e-9);
        }
    }
}
