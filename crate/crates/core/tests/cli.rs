use resonance_core::cli::*;
use resonance_core::config::parse_config;
use resonance_core::config::ExperimentConfig;
use serde_json::json;

fn cfg(text: &str) -> ExperimentConfig {
    parse_config(text).unwrap()
}

#[test]
fn resonance_witness() {
    let out = run(&cfg("command = \"resonance\"\na = \"1/9\"\nb = \"1/3\"\n")).unwrap();
    assert_eq!(out.report["resonant"], json!(true));
    assert_eq!(out.report["witness"], json!("(2,1)"));
}

#[test]
fn dim_membership() {
    let out = run(&cfg(
        "command = \"dim\"\na = \"1/3\"\nk_min = 3\nk_max = 8\nsamples = 200\n",
    ))
    .unwrap();
    assert_eq!(out.report["membership_misses"], json!(0));
    assert!(out.csv.unwrap().starts_with("k,delta,count,log_count\n"));
}

#[test]
fn dry_run_sizes() {
    let out = run(&cfg(
        "command = \"sumdim\"\na = \"1/4\"\nb = \"1/4\"\ndry_run = true\nk_min = 2\nk_max = 4\n",
    ))
    .unwrap();
    assert_eq!(out.report["scales"].as_array().unwrap().len(), 3);
    assert!(out.csv.is_none());
}

#[test]
fn render_product_colors() {
    let out = run(&cfg(
        "command = \"render\"\na = \"1/9\"\nb = \"1/3\"\ndepth = 2\n",
    ))
    .unwrap();
    assert!(out.svg.unwrap().contains("#111111"));
}
