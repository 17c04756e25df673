use resonance_core::scalar::*;
use resonance_core::{Error, Mode, Scalar};

#[test]
fn parses_fractions_and_decimals() {
    assert_eq!(
        Scalar::parse("1/3", Mode::Exact).unwrap(),
        Scalar::exact(1, 3)
    );
    assert_eq!(
        Scalar::parse("0.25", Mode::Exact).unwrap(),
        Scalar::exact(1, 4)
    );
    assert_eq!(
        Scalar::parse("-2.5e-1", Mode::Exact).unwrap(),
        Scalar::exact(-1, 4)
    );
    assert_eq!(Scalar::parse("3", Mode::Exact).unwrap(), Scalar::int(3));
    assert_eq!(
        Scalar::parse("1/4", Mode::Float).unwrap(),
        Scalar::float(0.25)
    );
    assert!(Scalar::parse("1/0", Mode::Exact).is_err());
    assert!(Scalar::parse("abc", Mode::Float).is_err());
    assert!(Scalar::parse("", Mode::Float).is_err());
}

#[test]
fn pi_suffix_is_float_only() {
    let x = Scalar::parse("0.5pi", Mode::Float).unwrap();
    assert!((x.to_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!(Scalar::parse("pi", Mode::Exact).is_err());
}

#[test]
fn mixed_mode_is_reported() {
    let a = Scalar::exact(1, 3);
    let b = Scalar::float(0.5);
    assert!(matches!(a.try_add(&b), Err(Error::MixedMode(_))));
    assert_eq!(a.partial_cmp(&b), None);
}

#[test]
#[should_panic(expected = "mixed exact/float")]
fn mixed_mode_operator_panics() {
    let _ = Scalar::exact(1, 3) + Scalar::float(0.5);
}

#[test]
fn ln_of_huge_rational() {
    let big = num::pow::Pow::pow(&ratio(3, 1), 2000u32);
    let expected = 2000.0 * 3f64.ln();
    assert!((ln_rational(&big) - expected).abs() < 1e-9 * expected);
}
