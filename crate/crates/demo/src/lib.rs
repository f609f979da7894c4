//! WebAssembly bindings for the static demo page. Every export takes and
//! returns plain strings (JSON) so the page needs no glue beyond
//! wasm-bindgen's own.

use std::cell::OnceCell;

use lava_core::corpus::{generate_corpus, SentenceRecord};
use lava_core::inference::score_formula;
use lava_core::logic::Formula;
use lava_core::perception::{script_for, simulate, NoiseModel, ObjectClass, Variation, VideoTrace};
use lava_core::recognition::PredicateLibrary;
use lava_core::task::disambiguate;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

const FRAMES: usize = 80;

thread_local! {
    static CORPUS: OnceCell<Vec<SentenceRecord>> = const { OnceCell::new() };
}

fn with_corpus<T>(f: impl FnOnce(&[SentenceRecord]) -> T) -> T {
    CORPUS.with(|c| f(c.get_or_init(|| generate_corpus().expect("the built-in corpus generates"))))
}

#[derive(Serialize)]
struct Reading<'a> {
    id: &'a str,
    gloss: &'a str,
    formula: String,
}

#[derive(Serialize)]
struct Sentence<'a> {
    id: &'a str,
    class: &'a str,
    text: &'a str,
    readings: Vec<Reading<'a>>,
}

/// Every sentence in the corpus with its readings.
pub fn sentences_json() -> String {
    with_corpus(|corpus| {
        let list: Vec<Sentence> = corpus
            .iter()
            .map(|r| Sentence {
                id: &r.id,
                class: r.ambiguity_class.as_str(),
                text: &r.text,
                readings: r
                    .interpretations
                    .iter()
                    .map(|i| Reading {
                        id: &i.id,
                        gloss: &i.gloss,
                        formula: i.formula.to_string(),
                    })
                    .collect(),
            })
            .collect();
        serde_json::to_string(&list).expect("plain data serializes")
    })
}

fn scene(sentence: &str, truth: usize, noise: &str, seed: u64) -> Result<(SentenceRecord, VideoTrace), String> {
    let rec = with_corpus(|c| c.iter().find(|r| r.id == sentence).cloned())
        .ok_or_else(|| format!("no sentence `{sentence}`"))?;
    if truth >= rec.interpretations.len() {
        return Err(format!("{} has {} readings", rec.id, rec.interpretations.len()));
    }
    let model = NoiseModel::preset(noise).ok_or_else(|| format!("unknown noise preset `{noise}`"))?;
    let script = script_for(&rec, truth, Variation::default(), FRAMES).map_err(|e| e.to_string())?;
    let (trace, _) = simulate(&script, &model, seed).map_err(|e| e.to_string())?;
    Ok((rec, trace))
}

/// Boxes per frame as `[x, y, w, h, class]`, class being the detector's
/// most likely label.
fn boxes(trace: &VideoTrace) -> serde_json::Value {
    let frames: Vec<Vec<serde_json::Value>> = trace
        .frames
        .iter()
        .map(|f| {
            f.iter()
                .map(|d| {
                    let best = (0..ObjectClass::ALL.len())
                        .max_by(|&a, &b| d.class_scores[a].total_cmp(&d.class_scores[b]))
                        .unwrap_or(0);
                    let b = d.bbox;
                    json!([b.x, b.y, b.w, b.h, ObjectClass::ALL[best].name()])
                })
                .collect()
        })
        .collect();
    json!({ "width": trace.width, "height": trace.height, "frames": frames })
}

/// Renders reading `truth` of a sentence and lets the decoder choose.
pub fn disambiguate_json(sentence: &str, truth: usize, noise: &str, seed: u64) -> Result<String, String> {
    let (rec, trace) = scene(sentence, truth, noise, seed)?;
    let r = disambiguate(&rec, &trace, &PredicateLibrary::default()).map_err(|e| e.to_string())?;
    let scores: Vec<f64> = r.scores.iter().map(|s| s.score).collect();
    Ok(json!({
        "chosen": r.chosen,
        "truth": truth,
        "margin": if r.margin.is_finite() { Some(r.margin) } else { None },
        "undecided": r.undecided,
        "scores": scores.iter().map(|s| s.is_finite().then_some(*s)).collect::<Vec<_>>(),
        "scene": boxes(&trace),
    })
    .to_string())
}

/// Scores a free-form formula against the same rendered scene.
pub fn score_json(sentence: &str, truth: usize, noise: &str, seed: u64, formula: &str) -> Result<String, String> {
    let (_, trace) = scene(sentence, truth, noise, seed)?;
    let f = Formula::parse(formula).map_err(|e| e.to_string())?;
    let (m, branch) = score_formula(&f, &trace, &PredicateLibrary::default()).map_err(|e| e.to_string())?;
    let finite = |x: f64| x.is_finite().then_some(x);
    let b = m.breakdown;
    Ok(json!({
        "score": finite(m.total),
        "branch": branch,
        "breakdown": { "f": finite(b.f), "g": finite(b.g), "h": finite(b.h), "a": finite(b.a) },
    })
    .to_string())
}

#[wasm_bindgen]
pub fn sentences() -> String {
    sentences_json()
}

#[wasm_bindgen(js_name = runScene)]
pub fn run_scene(sentence: &str, truth: usize, noise: &str, seed: u32) -> Result<String, JsValue> {
    disambiguate_json(sentence, truth, noise, seed.into()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = scoreFormula)]
pub fn score_formula_js(
    sentence: &str,
    truth: usize,
    noise: &str,
    seed: u32,
    formula: &str,
) -> Result<String, JsValue> {
    score_json(sentence, truth, noise, seed.into(), formula).map_err(|e| JsValue::from_str(&e))
}
