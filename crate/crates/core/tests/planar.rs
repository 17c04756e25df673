use resonance_core::ifs::central_cantor;
use resonance_core::planar::*;
use resonance_core::{Budget, Ifs2d, Scalar, Similitude2d};
use std::f64::consts::PI;

fn triangle(zeta: f64, theta: f64) -> Ifs2d {
    let maps = (0..3)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / 3.0;
            let d = 1.0 - zeta;
            Similitude2d::new(zeta, theta, false, [d * a.cos(), d * a.sin()]).unwrap()
        })
        .collect();
    Ifs2d::new(maps, [0.0, 0.0], 1.0).unwrap()
}

#[test]
fn rotation_verdicts() {
    let golden = PI * (5f64.sqrt() - 1.0) / 2.0;
    assert!(matches!(
        dense_rotation_check(&triangle(0.3, golden), 1_000_000, 1e-12),
        RotationVerdict::Dense { .. }
    ));
    assert_eq!(
        dense_rotation_check(&triangle(0.3, 0.0), 1_000_000, 1e-12),
        RotationVerdict::NotDense
    );
    assert_eq!(
        dense_rotation_check(&triangle(0.3, PI / 3.0), 1_000_000, 1e-9),
        RotationVerdict::NotDense
    );

    let refl = Ifs2d::new(
        vec![
            Similitude2d::new(0.3, 0.0, true, [0.5, 0.0]).unwrap(),
            Similitude2d::new(0.3, golden, true, [-0.5, 0.0]).unwrap(),
        ],
        [0.0, 0.0],
        1.0,
    )
    .unwrap();
    match dense_rotation_check(&refl, 1_000_000, 1e-12) {
        RotationVerdict::Dense { word, .. } => assert_eq!(word.0, [0, 1]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn homogeneous_ball_counts() {
    let e = triangle(0.3, 1.0);
    for k in 0..6 {
        let c = ball_cover(&e, 0.3f64.powi(k), &Budget::default()).unwrap();
        assert_eq!(c.len(), 3usize.pow(k as u32));
        assert!(c
            .balls
            .iter()
            .all(|b| (b.radius - 0.3f64.powi(k)).abs() < 1e-12));
    }
    assert!(ball_cover(&e, 1.5, &Budget::default()).is_err());
}

#[test]
fn mixed_radii_window() {
    let maps = vec![
        Similitude2d::new(0.5, 0.3, false, [-0.5, 0.0]).unwrap(),
        Similitude2d::new(0.2, 1.1, false, [0.6, 0.0]).unwrap(),
    ];
    let e = Ifs2d::new(maps, [0.0, 0.0], 1.0).unwrap();
    let d = 0.01;
    let c = ball_cover(&e, d, &Budget::default()).unwrap();
    assert!(c
        .balls
        .iter()
        .all(|b| b.radius <= d * (1.0 + 1e-10) && b.radius > 0.2 * d));
}

#[test]
fn degenerate_direction() {
    let maps = vec![
        Similitude2d::new(1.0 / 3.0, 0.0, false, [-2.0 / 3.0, 0.0]).unwrap(),
        Similitude2d::new(1.0 / 3.0, 0.0, false, [2.0 / 3.0, 0.0]).unwrap(),
    ];
    let e = Ifs2d::new(maps, [0.0, 0.0], 1.0).unwrap();
    let w = PlanarWindow::for_system(&e, 3, 7).unwrap();
    let p = projection_profile(&e, 4, &w, &Budget::default()).unwrap();
    assert!((p.rows[0].estimate.value - 2f64.ln() / 3f64.ln()).abs() < 0.05);
    assert!(p.rows[2].estimate.value.abs() < 1e-9);
}

#[test]
fn full_square_profile() {
    let maps = [[-0.5, -0.5], [0.5, -0.5], [-0.5, 0.5], [0.5, 0.5]]
        .iter()
        .map(|&t| Similitude2d::new(0.5, 0.0, false, t).unwrap())
        .collect();
    let e = Ifs2d::new(maps, [0.0, 0.0], 2f64.sqrt()).unwrap();
    let w = PlanarWindow::for_system(&e, 3, 8).unwrap();
    let p = projection_profile(&e, 8, &w, &Budget::default()).unwrap();
    assert!(
        p.rows.iter().all(|r| (r.estimate.value - 1.0).abs() < 0.03),
        "{:?}",
        p.min()
    );
}

#[test]
fn product_figure() {
    let a = central_cantor(Scalar::exact(1, 9)).unwrap();
    let b = central_cantor(Scalar::exact(1, 3)).unwrap();
    let r = render_svg(RenderTarget::Product(&a, &b), 3, &RenderOptions::default()).unwrap();
    assert_eq!(r.colored_pairs.len(), 3);
    assert!(r.colored_pairs.iter().all(|&n| n >= 1));
    assert!(r.svg.starts_with("<?xml") && r.svg.trim_end().ends_with("</svg>"));

    let c = central_cantor(Scalar::exact(1, 4)).unwrap();
    let r = render_svg(RenderTarget::Product(&b, &c), 3, &RenderOptions::default()).unwrap();
    assert!(r.colored_pairs.iter().all(|&n| n == 0));

    let r = render_svg(RenderTarget::Product(&a, &b), 0, &RenderOptions::default()).unwrap();
    assert_eq!(r.svg.matches("<rect").count(), 2);
}

#[test]
fn planar_figure() {
    let e = triangle(0.3, 1.0);
    let r = render_svg(RenderTarget::Planar(&e), 2, &RenderOptions::default()).unwrap();
    assert_eq!(r.svg.matches("<circle").count(), 1 + 9);
}
