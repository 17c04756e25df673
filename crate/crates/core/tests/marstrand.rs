use num::BigRational;
use resonance_core::ifs::central_cantor;
use resonance_core::marstrand::*;
use resonance_core::{Budget, Ifs1d, Scalar};
use std::f64::consts::PI;

fn q(n: i64, d: i64) -> Scalar {
    Scalar::exact(n, d)
}

fn unit(x: f64, y: f64) -> Cell {
    Cell::Rect {
        x0: x,
        y0: y,
        w: 1.0,
        h: 1.0,
    }
}

#[test]
fn levels_and_aspect() {
    assert_eq!(matching_level(&q(1, 4), &q(1, 3), 1).unwrap(), 1);
    assert_eq!(matching_level(&q(1, 4), &q(1, 3), 2).unwrap(), 2);
    assert_eq!(matching_level(&q(1, 3), &q(1, 3), 5).unwrap(), 5);
    assert_eq!(matching_level(&q(1, 9), &q(1, 3), 3).unwrap(), 6);
    assert_eq!(
        matching_level(&Scalar::float(0.25), &Scalar::float(1.0 / 3.0), 2).unwrap(),
        2
    );

    let c4 = central_cantor(q(1, 4)).unwrap();
    let c3 = central_cantor(q(1, 3)).unwrap();
    let f = product_cells(&c4, &c3, 2, &Budget::default()).unwrap();
    assert_eq!(f.len(), 16);
    let Cell::Rect { w, h, .. } = f.cells[0] else {
        panic!()
    };
    assert!((h / w - 16.0 / 9.0).abs() < 1e-12);
    let f = product_cells(&c3, &c3, 3, &Budget::default()).unwrap();
    let Cell::Rect { w, h, .. } = f.cells[0] else {
        panic!()
    };
    assert_eq!(w, h);
}

#[test]
fn inhomogeneous_rejected() {
    let a = Ifs1d::from_pairs(&[(q(1, 2), q(0, 1)), (q(1, 4), q(3, 4))]).unwrap();
    let c3 = central_cantor(q(1, 3)).unwrap();
    let e = product_cells(&a, &c3, 2, &Budget::default()).unwrap_err();
    assert!(e.to_string().contains("homogen"));
}

#[test]
fn projections() {
    let (a, b) = project_cell(&unit(0.0, 0.0), 0.0);
    assert!(a.abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
    let (a, b) = project_cell(&unit(0.0, 0.0), PI / 4.0);
    assert!(a.abs() < 1e-15 && (b - 2f64.sqrt()).abs() < 1e-15);
    let (a, b) = project_cell(
        &Cell::Disk {
            cx: 0.0,
            cy: 0.0,
            r: 0.1,
        },
        1.234,
    );
    assert!((a + 0.1).abs() < 1e-15 && (b - 0.1).abs() < 1e-15);
}

#[test]
fn subfamily_examples() {
    let fam = CellFamily::new(
        vec![unit(0.0, 0.0), unit(3.0, 0.0), unit(6.0, 0.0)],
        1.0,
        1.0,
    )
    .unwrap();
    assert_eq!(separated_subfamily(&fam, 0.0).len(), 3);
    assert_eq!(separated_subfamily(&fam, PI / 2.0).len(), 1);

    let c4 = central_cantor(q(1, 4)).unwrap();
    let q1 = product_cells(&c4, &c4, 1, &Budget::default()).unwrap();
    assert_eq!(q1.len(), 4);
    assert_eq!(separated_subfamily(&q1, PI / 4.0).len(), 2);
}

#[test]
fn exact_greedy() {
    let iv = |a: i64, b: i64| {
        (
            BigRational::from_integer(a.into()),
            BigRational::from_integer(b.into()),
        )
    };
    let ivals = vec![iv(0, 1), iv(2, 3), iv(3, 4), iv(5, 6)];
    let rho = BigRational::from_integer(1.into());
    // Gap must exceed one strictly.
    assert_eq!(greedy_separated_exact(&ivals, &rho), vec![0, 2]);
}

#[test]
fn single_cell_all_good() {
    let fam = CellFamily::new(vec![unit(0.0, 0.0)], 1.0, 0.0).unwrap();
    let j = good_angle_set(&fam, 0.5, 64, 1.0).unwrap();
    assert_eq!(j.intervals, vec![(0.0, PI)]);
    assert_eq!(j.bad_measure, 0.0);
}

#[test]
fn coincident_vertical_projection_is_bad() {
    // Side by side: both cells project to the same interval at π/2.
    let fam = CellFamily::new(vec![unit(0.0, 0.0), unit(2.5, 0.0)], 0.5, 1.0).unwrap();
    let j = good_angle_set(&fam, 0.9, 256, 0.9).unwrap();
    assert!(!j.contains(PI / 2.0));
    assert!(j.contains(0.01));
}

#[test]
fn projection_lengths() {
    let one = CellFamily::new(vec![unit(0.0, 0.0)], 1.0, 0.0).unwrap();
    assert!((projection_length(&one, 0.0) - 1.0).abs() < 1e-15);
    let two = CellFamily::new(vec![unit(0.0, 0.0), unit(2.0, 0.0)], 1.0, 0.0).unwrap();
    assert!((projection_length(&two, 0.0) - 2.0).abs() < 1e-15);

    let c3 = central_cantor(q(1, 3)).unwrap();
    let q2 = product_cells(&c3, &c3, 2, &Budget::default()).unwrap();
    let sum: f64 = q2.projections(PI / 4.0).iter().map(|(a, b)| b - a).sum();
    assert!(projection_length(&q2, PI / 4.0) < sum - 1e-9);
}

#[test]
fn self_energy_forms() {
    assert!((unit(0.0, 0.0).self_energy() - 2.973_209_598_247_38).abs() < 1e-12);
    let r = Cell::Rect {
        x0: 0.0,
        y0: 0.0,
        w: 0.5,
        h: 0.5,
    };
    assert!((r.self_energy() - 2.0 * 2.973_209_598_247_38).abs() < 1e-11);
    let d = Cell::Disk {
        cx: 0.0,
        cy: 0.0,
        r: 2.0,
    };
    assert!((d.self_energy() - 16.0 / (6.0 * PI)).abs() < 1e-15);
}

#[test]
fn calibration_meets_fraction() {
    let c4 = central_cantor(q(1, 4)).unwrap();
    let f = product_cells(&c4, &c4, 3, &Budget::default()).unwrap();
    let delta = calibrate_delta(&f, 0.2, 256).unwrap();
    let j = good_angle_set(&f, 0.2, 256, delta).unwrap();
    assert!(j.within_bound());
    // A slightly larger δ loses the guarantee.
    let k = good_angle_set(&f, 0.2, 256, delta * 1.0001).unwrap();
    assert!(!k.within_bound());
}
