use cpmilp_web::{export_model, maxcut_random, solve_model};
use serde_json::Value;

const SUDOKU: &str = include_str!("../../../models/sudoku4.json");

#[test]
fn solves_a_model() {
    let out: Value = serde_json::from_str(&solve_model(SUDOKU, 0.0).unwrap()).unwrap();
    assert_eq!(out["status"], "Optimal");
    assert_eq!(out["assignment"]["x3_0"], 4.0);
    assert_eq!(out["assignment"].as_object().unwrap().len(), 16);
}

#[test]
fn reports_errors_as_text() {
    let e = solve_model(r#"{"vars": [{"name": "a"}]}"#, 0.0).unwrap_err();
    assert!(e.contains("vars[0]"), "{e}");
    assert!(export_model("{").is_err());
}

#[test]
fn exports_lp() {
    let lp = export_model(SUDOKU).unwrap();
    assert!(lp.contains("Subject To") && lp.contains("Binaries"));
    assert_eq!(lp, export_model(SUDOKU).unwrap());
}

#[test]
fn maxcut_matches_brute_force() {
    for seed in 0..5 {
        let out: Value = serde_json::from_str(&maxcut_random(9, 0.5, seed, 0.0).unwrap()).unwrap();
        assert_eq!(out["status"], "Optimal");
        assert_eq!(out["cut"], out["brute_force"]);
        assert_eq!(out["side"].as_array().unwrap().len(), 9);
    }
    assert!(maxcut_random(30, 0.5, 1, 0.0).is_err());
    assert!(maxcut_random(5, 1.5, 1, 0.0).is_err());
}
