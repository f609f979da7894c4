use lava_core::corpus::{generate_corpus, SentenceRecord};
use lava_core::inference::{score_common, score_formula};
use lava_core::logic::Formula;
use lava_core::perception::{
    generate_suite, read_trace, script_for, simulate, write_trace, NoiseModel, SuiteConfig, Variation, VideoTrace,
};
use lava_core::recognition::PredicateLibrary;
use lava_core::task::{disambiguate, evaluate};

fn corpus() -> Vec<SentenceRecord> {
    generate_corpus().unwrap()
}

fn first_of(corpus: &[SentenceRecord], prefix: &str, n: usize) -> Vec<SentenceRecord> {
    corpus
        .iter()
        .filter(|r| r.id.starts_with(prefix))
        .take(n)
        .cloned()
        .collect()
}

fn traces(records: &[SentenceRecord], noise: NoiseModel) -> Vec<VideoTrace> {
    generate_suite(records, &SuiteConfig::with_noise(noise))
        .unwrap()
        .into_iter()
        .map(|s| s.trace)
        .collect()
}

#[test]
fn bag_with_the_agent_picks_the_first_reading() {
    let c = corpus();
    let rec = c
        .iter()
        .find(|r| r.text == "Sam approached the chair with a bag.")
        .unwrap();
    let script = script_for(rec, 0, Variation::default(), 90).unwrap();
    let (trace, _) = simulate(&script, &NoiseModel::none(), 4).unwrap();
    let r = disambiguate(rec, &trace, &PredicateLibrary::default()).unwrap();
    assert_eq!(r.chosen, 0);
    assert_eq!(r.correct, Some(true));
    assert!(r.margin > 0.0);
}

#[test]
fn a_sample_of_every_class_closes_the_loop() {
    let c = corpus();
    let lib = PredicateLibrary::default();
    for prefix in ["pp-", "vp-", "conj-", "lf-", "ana-", "ell-"] {
        let sample = first_of(&c, prefix, 3);
        assert!(!sample.is_empty(), "{prefix}");
        let report = evaluate(&c, &traces(&sample, NoiseModel::none()), &lib, "none", 2012).unwrap();
        assert_eq!(report.micro_accuracy, 1.0, "{prefix}: {}", report.table());
    }
}

#[test]
fn evaluation_is_deterministic() {
    let c = corpus();
    let sample: Vec<SentenceRecord> = c.iter().step_by(12).cloned().collect();
    let noise = NoiseModel::preset("moderate").unwrap();
    let (a, b) = (traces(&sample, noise.clone()), traces(&sample, noise));
    assert_eq!(a, b);
    let lib = PredicateLibrary::default();
    let ra = evaluate(&c, &a, &lib, "moderate", 2012).unwrap();
    let rb = evaluate(&c, &b, &lib, "moderate", 2012).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn noise_seeds_change_the_traces() {
    let c = corpus();
    let sample = first_of(&c, "pp-", 1);
    let mut other = NoiseModel::preset("moderate").unwrap();
    other.seed += 1;
    assert_ne!(
        traces(&sample, NoiseModel::preset("moderate").unwrap()),
        traces(&sample, other)
    );
}

#[test]
fn traces_survive_a_file_round_trip() {
    let c = corpus();
    let t = &traces(&first_of(&c, "ana-", 1), NoiseModel::preset("mild").unwrap())[0];
    let mut buf = Vec::new();
    write_trace(t, &mut buf).unwrap();
    let back = read_trace(&buf[..]).unwrap();
    assert_eq!(&back, t);
}

#[test]
fn the_shared_part_scores_at_least_as_well_as_either_reading() {
    let c = corpus();
    let rec = c
        .iter()
        .find(|r| r.text == "Sam approached the chair with a bag.")
        .unwrap();
    let formulas: Vec<Formula> = rec.interpretations.iter().map(|i| i.formula.clone()).collect();
    let lib = PredicateLibrary::default();
    for i in 0..2 {
        let script = script_for(rec, i, Variation::default(), 70).unwrap();
        let (trace, _) = simulate(&script, &NoiseModel::none(), 9).unwrap();
        let common = score_common(&formulas, &trace, &lib).unwrap();
        for f in &formulas {
            let (m, _) = score_formula(f, &trace, &lib).unwrap();
            assert!(common.total >= m.total - 1e-9);
        }
        assert_eq!(common.path.len(), trace.frame_count());
    }
}

#[test]
fn mirrored_traces_decide_the_same_way() {
    let c = corpus();
    let lib = PredicateLibrary::default();
    for rec in first_of(&c, "vp-", 4) {
        let script = script_for(&rec, 1, Variation::default(), 80).unwrap();
        let (trace, _) = simulate(&script, &NoiseModel::none(), 2).unwrap();
        let a = disambiguate(&rec, &trace, &lib).unwrap();
        let b = disambiguate(&rec, &trace.mirrored(), &lib).unwrap();
        assert_eq!(a.chosen, b.chosen, "{}", rec.id);
    }
}
