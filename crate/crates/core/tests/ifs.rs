use resonance_core::ifs::*;
use resonance_core::scalar::ratio;
use resonance_core::{
    central_cantor, Error, Ifs1d, Ifs2d, Interval, Mode, Scalar, Similitude1d, Similitude2d, Word,
};

fn q(n: i64, d: i64) -> Scalar {
    Scalar::exact(n, d)
}

#[test]
fn central_cantor_third() {
    let c = central_cantor(q(1, 3)).unwrap();
    assert_eq!(c.maps()[0], Similitude1d::new(q(1, 3), q(0, 1)).unwrap());
    assert_eq!(c.maps()[1], Similitude1d::new(q(1, 3), q(2, 3)).unwrap());
    assert_eq!(c.hull(), &Interval::new(q(0, 1), q(1, 1)).unwrap());
}

#[test]
fn central_cantor_rejects_half() {
    assert!(central_cantor(q(1, 2)).is_err());
    assert!(central_cantor(q(0, 1)).is_err());
    assert!(central_cantor(q(49, 100)).is_ok());
}

#[test]
fn central_cantor_fixed_points_are_hull_ends() {
    let c = central_cantor(q(1, 4)).unwrap();
    assert_eq!(c.maps()[0].fixed_point(), q(0, 1));
    assert_eq!(c.maps()[1].fixed_point(), q(1, 1));
}

#[test]
fn hull_closed_form() {
    let maps = vec![
        Similitude1d::new(q(1, 3), q(0, 1)).unwrap(),
        Similitude1d::new(q(1, 3), q(2, 3)).unwrap(),
    ];
    assert_eq!(
        attractor_hull(&maps).unwrap(),
        Interval::new(q(0, 1), q(1, 1)).unwrap()
    );
    let maps = vec![
        Similitude1d::new(q(1, 4), q(0, 1)).unwrap(),
        Similitude1d::new(q(1, 4), q(3, 8)).unwrap(),
    ];
    assert_eq!(
        attractor_hull(&maps).unwrap(),
        Interval::new(q(0, 1), q(1, 2)).unwrap()
    );
}

#[test]
fn hull_needs_two_maps() {
    let maps = vec![Similitude1d::new(q(1, 2), q(1, 1)).unwrap()];
    assert!(matches!(attractor_hull(&maps), Err(Error::Domain(_))));
}

#[test]
fn hull_with_negative_ratio_is_exact_fixed_point() {
    // x -> -x/3 + 1/3 and x -> x/3 + 2/3.
    let maps = vec![
        Similitude1d::new(q(-1, 3), q(1, 3)).unwrap(),
        Similitude1d::new(q(1, 3), q(2, 3)).unwrap(),
    ];
    let hull = attractor_hull(&maps).unwrap();
    assert_eq!(hull, Interval::new(q(0, 1), q(1, 1)).unwrap());
    let float_maps: Vec<_> = maps
        .iter()
        .map(|m| {
            Similitude1d::new(
                m.ratio.to_mode(Mode::Float).unwrap(),
                m.translation.to_mode(Mode::Float).unwrap(),
            )
            .unwrap()
        })
        .collect();
    let fh = attractor_hull(&float_maps).unwrap();
    assert!((fh.lo.to_f64()).abs() < 1e-12 && (fh.hi.to_f64() - 1.0).abs() < 1e-12);
}

#[test]
fn similarity_dimension_examples() {
    let third = similarity_dimension(&[q(1, 3), q(1, 3)]).unwrap();
    assert!((third - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
    let half = similarity_dimension(&[q(1, 2), q(1, 2)]).unwrap();
    assert!((half - 1.0).abs() < 1e-12);
    let quarter = similarity_dimension(&[q(1, 4), q(1, 4), q(1, 4)]).unwrap();
    assert!((quarter - 3f64.ln() / 4f64.ln()).abs() < 1e-12);
    let residual: f64 = [0.25f64, 0.25, 0.25]
        .iter()
        .map(|r| r.powf(quarter))
        .sum::<f64>()
        - 1.0;
    assert!(residual.abs() < 1e-13);
}

#[test]
fn compose_word_examples() {
    let c = central_cantor(q(1, 3)).unwrap();
    let f = compose_word(&c, &Word::from_labels(&[1, 2]).unwrap()).unwrap();
    assert_eq!(f, Similitude1d::new(q(1, 9), q(2, 9)).unwrap());
    let g = compose_word(&c, &Word::from_labels(&[2, 2]).unwrap()).unwrap();
    assert_eq!(g, Similitude1d::new(q(1, 9), q(8, 9)).unwrap());
    let id = compose_word(&c, &Word::empty()).unwrap();
    assert!(id.is_identity());
    assert!(compose_word(&c, &Word(vec![2])).is_err());
}

#[test]
fn cantor_cylinders_are_disjoint_with_length_a_pow_k() {
    let c = central_cantor(q(1, 3)).unwrap();
    for k in 1..=12usize {
        // Enumerate every word of length k in lexicographic order.
        let mut prev_hi: Option<Scalar> = None;
        let total = 1usize << k;
        let expected = Scalar::Exact(num::pow::Pow::pow(&ratio(1, 3), k as u32));
        // Checking every word for k ≤ 8, strided samples above.
        let step = if k <= 8 { 1 } else { 97 };
        let mut idx = 0;
        while idx < total {
            let w = Word((0..k).map(|b| (idx >> (k - 1 - b)) & 1).collect());
            let cyl = c.cylinder(&w).unwrap();
            assert_eq!(cyl.interval.length(), expected);
            if step == 1 {
                if let Some(p) = &prev_hi {
                    assert!(p < &cyl.interval.lo);
                }
                prev_hi = Some(cyl.interval.hi.clone());
            }
            idx += step;
        }
    }
}

#[test]
fn with_hull_rejects_non_invariant_interval() {
    let maps = vec![
        Similitude1d::new(q(1, 3), q(0, 1)).unwrap(),
        Similitude1d::new(q(1, 3), q(2, 3)).unwrap(),
    ];
    assert!(Ifs1d::with_hull(maps.clone(), Interval::new(q(0, 1), q(1, 2)).unwrap()).is_err());
    assert!(Ifs1d::with_hull(maps, Interval::new(q(-1, 1), q(2, 1)).unwrap()).is_ok());
}

#[test]
fn planar_composition_tracks_reflections() {
    let f = Similitude2d::new(0.5, 0.3, true, [0.1, 0.2]).unwrap();
    let g = Similitude2d::new(0.4, 1.1, false, [-0.3, 0.05]).unwrap();
    let h = f.compose(&g);
    for p in [[0.3, -0.2], [1.0, 0.0], [-0.7, 0.9]] {
        let a = h.apply(p);
        let b = f.apply(g.apply(p));
        assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    }
    assert!(h.reflect);
    assert!(!f.compose(&f).reflect);
}

#[test]
fn auto_ball_is_invariant() {
    let maps: Vec<_> = (0..3)
        .map(|i| {
            let a = i as f64 * std::f64::consts::TAU / 3.0;
            Similitude2d::new(0.3, 1.9, false, [0.6 * a.cos(), 0.6 * a.sin()]).unwrap()
        })
        .collect();
    let sys = Ifs2d::with_auto_ball(maps).unwrap();
    assert!(sys.radius() > 0.0);
}
