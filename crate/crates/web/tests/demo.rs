use resonance_web::{product_svg, projection_profile_json, sum_dimension_json};
use serde_json::Value;

#[test]
fn quarter_sum_drops() {
    let v: Value =
        serde_json::from_str(&sum_dimension_json("1/4", "1/4", "1", 3, 8).unwrap()).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope - 3f64.ln() / 4f64.ln()).abs() < 0.02, "{slope}");
    assert_eq!(v["resonant"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn bad_ratio_is_an_error_message() {
    let err = sum_dimension_json("0.7", "1/4", "1", 3, 8).unwrap_err();
    assert!(err.contains("(0, 1/2)"), "{err}");
    assert!(sum_dimension_json("1/4", "x", "1", 3, 8).is_err());
}

#[test]
fn lattice_product_highlights_coincidences() {
    let svg = product_svg("1/9", "1/3", 2).unwrap();
    assert!(svg.contains("<svg") && svg.contains("#111111"));
    let plain = product_svg("1/5", "1/4", 2).unwrap();
    assert!(!plain.contains("#111111"));
}

#[test]
fn profile_json_shape() {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let v: Value =
        serde_json::from_str(&projection_profile_json(3, 0.3, golden, 8, 3, 6).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 8);
    assert_eq!(v["dense"], true);
    assert!(v["svg"].as_str().unwrap().contains("<svg"));
    let dim = v["similarity_dimension"].as_f64().unwrap();
    assert!((dim - 3f64.ln() / (10f64 / 3.0).ln()).abs() < 1e-12);
}

#[test]
fn rational_rotation_is_not_dense() {
    // 0.618 = 309/500.
    let v: Value =
        serde_json::from_str(&projection_profile_json(3, 0.3, 0.618, 4, 2, 4).unwrap()).unwrap();
    assert_eq!(v["dense"], false);
}
