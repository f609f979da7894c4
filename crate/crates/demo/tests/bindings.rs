use lava_demo::{disambiguate_json, score_json, sentences_json};
use serde_json::Value;

#[test]
fn lists_every_sentence() {
    let list: Value = serde_json::from_str(&sentences_json()).unwrap();
    let list = list.as_array().unwrap();
    assert_eq!(list.len(), 237);
    assert!(list
        .iter()
        .all(|s| (2..=3).contains(&s["readings"].as_array().unwrap().len())));
}

#[test]
fn a_clean_scene_picks_its_own_reading() {
    for truth in 0..2 {
        let out: Value = serde_json::from_str(&disambiguate_json("vp-001", truth, "none", 1).unwrap()).unwrap();
        assert_eq!(out["chosen"], truth);
        assert_eq!(out["scene"]["frames"].as_array().unwrap().len(), 80);
    }
}

#[test]
fn scores_a_free_formula() {
    let out: Value = serde_json::from_str(&score_json("vp-001", 0, "mild", 3, "person(u)").unwrap()).unwrap();
    assert!(out["score"].is_f64());
}

#[test]
fn bad_input_is_reported() {
    assert!(disambiguate_json("nope", 0, "none", 1).is_err());
    assert!(disambiguate_json("vp-001", 9, "none", 1).is_err());
    assert!(disambiguate_json("vp-001", 0, "loud", 1).is_err());
    assert!(score_json("vp-001", 0, "none", 1, "and(").is_err());
}
