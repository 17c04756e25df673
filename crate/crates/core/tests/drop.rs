use resonance_core::drop::*;
use resonance_core::ifs::central_cantor;
use resonance_core::Scalar;

fn q(n: i64, d: i64) -> Scalar {
    Scalar::exact(n, d)
}

#[test]
fn scales() {
    assert_eq!(
        resonant_scale(&[q(0, 1), q(2, 3)], &[q(0, 1), q(2, 3)]).unwrap(),
        q(1, 1)
    );
    assert_eq!(
        resonant_scale(&[q(0, 1), q(1, 1), q(5, 1)], &[q(0, 1), q(2, 1)]).unwrap(),
        q(5, 2)
    );
    assert!(resonant_scale(&[q(1, 1), q(1, 1)], &[q(0, 1), q(1, 1)]).is_err());
}

#[test]
fn collisions() {
    let d = [q(0, 1), q(3, 4)];
    let r = digit_collision(&d, &d, &q(1, 1), &q(1, 4)).unwrap();
    assert_eq!(r.sum_size, 3);
    assert!((r.bound - 3f64.ln() / 4f64.ln()).abs() < 1e-15);

    let d = [q(0, 1), q(2, 3)];
    let r = digit_collision(&d, &d, &q(1, 1), &q(1, 3)).unwrap();
    assert_eq!(r.sum_size, 3);
    assert!((r.bound - 1.0).abs() < 1e-15);

    let f = [Scalar::float(0.0), Scalar::float(0.75)];
    let r = digit_collision(
        &f,
        &f,
        &Scalar::float(std::f64::consts::PI),
        &Scalar::float(0.25),
    )
    .unwrap();
    assert_eq!(r.sum_size, 4);
}

#[test]
fn thresholds() {
    assert_eq!(representation_threshold(&[1]).unwrap(), (1, 1));
    assert_eq!(representation_threshold(&[2, 3]).unwrap(), (1, 2));
    assert_eq!(representation_threshold(&[4, 6]).unwrap(), (2, 4));
    assert_eq!(representation_threshold(&[3, 5]).unwrap(), (1, 8));
}

#[test]
fn hitting() {
    let one = hit_probability(7, &[1], &[q(1, 1)]).unwrap();
    assert_eq!(one, q(1, 1));
    let h = hit_probability(2, &[1, 2], &[q(1, 2), q(1, 2)]).unwrap();
    assert_eq!(h, q(3, 4));
    assert_eq!(
        hit_probability(0, &[3, 5], &[q(1, 3), q(2, 3)]).unwrap(),
        q(1, 1)
    );
    assert!(hit_probability(2, &[1, 2], &[q(1, 2), q(1, 3)]).is_err());
}

#[test]
fn homogeneous_quarter() {
    let c = central_cantor(q(1, 4)).unwrap();
    let inst = DropInstance::from_systems(&c, &c, 1_000_000, 1e-12).unwrap();
    assert_eq!(inst.xi, q(1, 4));
    assert_eq!((inst.ell, inst.m0, inst.m), (1, 1, 2));
    assert_eq!(inst.p, 1.0);
    assert!((inst.q - 1.0 / 16.0).abs() < 1e-15);
    let b = essential_pair_bound(&inst).unwrap().to_f64();
    assert!((b - (1.0 + (15.0f64 / 16.0).ln() / (2.0 * 4f64.ln()))).abs() < 1e-12);
    assert!(b > 3f64.ln() / 4f64.ln() && b < 1.0);
}

#[test]
fn mixed_exponents() {
    let t = vec![q(0, 1), q(3, 4)];
    let t2 = vec![q(0, 1), q(1, 2)];
    let inst = DropInstance::new(q(1, 2), &[1, 2], &[1, 1], t, t2).unwrap();
    let e: Vec<(u64, f64)> = inst.a_steps.iter().map(|c| (c.exponent, c.count)).collect();
    assert_eq!(e, [(2, 2.0), (3, 1.0)]);
    assert_eq!(inst.b_steps.len(), 1);
    assert_eq!((inst.b_steps[0].exponent, inst.b_steps[0].count), (2, 4.0));
    let total: f64 = inst.a_steps.iter().map(|c| c.weight).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!((inst.a, inst.b, inst.a_max, inst.b_max), (1, 2, 3, 2));
    assert_eq!((inst.ell, inst.m0, inst.m), (2, 2, 6));
    assert_eq!(inst.p_left.len(), 3);
    let b = essential_pair_bound(&inst).unwrap().to_f64();
    assert!(b < inst.beta + inst.beta2);
    assert!(b > inst.beta + inst.beta2 - 1e-3);
}

#[test]
fn bound_limit() {
    let v = essential_bound_value(1.5, 4, 0.5, 1e-300);
    assert!(v <= 1.5 && 1.5 - v < 1e-290);
}
