use resonance_core::homogenize::*;
use resonance_core::ifs::central_cantor;
use resonance_core::resonance::is_rational_ratio;
use resonance_core::resonance::Witness;
use resonance_core::{Budget, Ifs1d, Ifs2d, Scalar, Similitude2d, Word};

fn q(n: i64, d: i64) -> Scalar {
    Scalar::exact(n, d)
}

fn halves() -> Ifs1d {
    Ifs1d::from_pairs(&[(q(1, 2), q(0, 1)), (q(1, 2), q(1, 2))]).unwrap()
}

#[test]
fn prune_keeps_disjoint_cantor() {
    let c = central_cantor(q(1, 3)).unwrap();
    let p = prune_to_disjoint(&c, &q(1, 9), &Budget::default()).unwrap();
    assert_eq!(p.words.len(), 4);
    assert!((p.dimension_after - p.dimension_before).abs() < 1e-12);
}

#[test]
fn prune_overlapping() {
    let ifs = Ifs1d::from_pairs(&[(q(1, 2), q(0, 1)), (q(1, 2), q(1, 4))]).unwrap();
    let p = prune_to_disjoint(&ifs, &q(1, 8), &Budget::default()).unwrap();
    assert_eq!(p.candidates, 4);
    assert_eq!(p.words.len(), 2);
    let iv: Vec<_> = p
        .ifs
        .maps()
        .iter()
        .map(|f| f.apply_interval(ifs.hull()))
        .collect();
    assert!(iv[0].hi < iv[1].lo);
}

#[test]
fn prune_at_hull_scale_fails() {
    let c = central_cantor(q(1, 3)).unwrap();
    assert!(prune_to_disjoint(&c, &q(1, 1), &Budget::default()).is_err());
}

#[test]
fn halves_k10() {
    let (sub, rep) = homogeneous_subsystem(&halves(), 10).unwrap();
    assert_eq!(rep.v, vec![5, 5]);
    assert_eq!(rep.n_k, "252");
    assert_eq!(rep.rho, q(1, 1024));
    assert!((rep.tau - 252f64.ln() / (10.0 * 2f64.ln())).abs() < 1e-15);
    assert_eq!(sub.words().count(), 252);
    let m = sub.materialize(&Budget::default()).unwrap();
    assert!(m.maps().iter().all(|f| f.ratio == q(1, 1024)));
}

#[test]
fn halves_k100() {
    let (_, rep) = homogeneous_subsystem(&halves(), 100).unwrap();
    assert_eq!(rep.v, vec![50, 50]);
    assert!(rep.tau >= 0.96 && rep.tau <= rep.gamma);
}

#[test]
fn lazy_words_are_distinct_permutations() {
    let words: Vec<Word> = MultisetWords::new(&[2, 1, 1]).collect();
    assert_eq!(words.len(), 12);
    let mut sorted = words.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted, words);
}

#[test]
fn repair_examples() {
    let base = Ifs1d::from_pairs(&[(q(1, 3), q(0, 1)), (q(1, 3), q(2, 3))]).unwrap();
    let hom = Ifs1d::from_pairs(&[(q(1, 4), q(0, 1)), (q(1, 4), q(3, 4))]).unwrap();
    let hom2 = Ifs1d::from_pairs(&[(q(1, 8), q(0, 1)), (q(1, 8), q(7, 8))]).unwrap();
    match repair_irrationality(&base, &hom2, &hom, &hom2, 1_000_000, 1e-12).unwrap() {
        RepairOutcome::Repaired {
            left,
            prefixed_left,
            ..
        } => {
            assert!(prefixed_left);
            assert_eq!(left.common_ratio().unwrap(), q(1, 12));
            assert_eq!(
                is_rational_ratio(&q(1, 12), &q(1, 8), 1_000_000, 1e-12).unwrap(),
                None
            );
        }
        other => panic!("{other:?}"),
    }

    let c3 = central_cantor(q(1, 3)).unwrap();
    let c4 = central_cantor(q(1, 4)).unwrap();
    assert!(matches!(
        repair_irrationality(&c3, &c4, &c3, &c4, 1000, 1e-12).unwrap(),
        RepairOutcome::Unchanged(..)
    ));

    let h = Ifs1d::from_pairs(&[(q(1, 2), q(0, 1)), (q(1, 2), q(1, 2))]).unwrap();
    let hq = Ifs1d::from_pairs(&[(q(1, 4), q(0, 1)), (q(1, 4), q(3, 4))]).unwrap();
    assert_eq!(
        is_rational_ratio(&q(1, 8), &q(1, 4), 10, 0.0).unwrap(),
        Some(Witness { p: 3, q: 2 })
    );
    assert!(matches!(
        repair_irrationality(&h, &h, &hq, &hq, 1000, 1e-12).unwrap(),
        RepairOutcome::Inconclusive(_)
    ));
}

fn planar(reflect2: bool, reflect1: bool) -> Ifs2d {
    Ifs2d::new(
        vec![
            Similitude2d::new(0.3, 0.7, reflect1, [0.5, 0.0]).unwrap(),
            Similitude2d::new(0.3, 1.9, reflect2, [-0.5, 0.0]).unwrap(),
        ],
        [0.0, 0.0],
        1.0,
    )
    .unwrap()
}

#[test]
fn reflections_removed() {
    let none = planar(false, false);
    assert_eq!(remove_reflections(&none, 2).unwrap().ifs, none);

    let r = remove_reflections(&planar(true, false), 2).unwrap();
    assert_eq!(r.words.len(), 4);
    assert!(r.ifs.maps().iter().all(|m| !m.reflect));
    let labels: Vec<String> = r.words.iter().map(Word::to_string).collect();
    assert_eq!(labels, ["(1,1)", "(1,2,2)", "(2,1,2)", "(2,2)"]);
    assert!(r.dimension_after <= r.dimension_before);

    let all = remove_reflections(&planar(true, true), 1).unwrap();
    assert!(all.words.iter().all(|w| w.len() == 2));
    assert!(all.ifs.maps().iter().all(|m| !m.reflect));
}
