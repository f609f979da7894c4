use lava_core::inference::score_formula;
use lava_core::logic::Formula;
use lava_core::perception::script::{ScriptBuilder, FLOOR};
use lava_core::perception::{simulate, BBox, Color, Detection, NoiseModel, ObjectClass, Variation, VideoTrace};
use lava_core::recognition::{Mode, PredicateLibrary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VERBS: [&str; 7] = ["pick_up", "put_down", "hold", "move", "approach", "leave", "look_at"];
const FRAMES: usize = 80;

/// A noise-free clip of person `u` doing `verb` to chair `x`, or looking
/// at person `v`. Everything else stands clear.
fn scene(verb: &str) -> VideoTrace {
    let mut b = ScriptBuilder::new(FRAMES, Variation::default());
    b.add("u", ObjectClass::Person, Color::Other);
    b.add("v", ObjectClass::Person, Color::Other);
    b.add("x", ObjectClass::Chair, Color::Other);
    let (ux, cx) = (500.0, 590.0);
    match verb {
        "pick_up" => {
            b.at("u", 0.0, ux, FLOOR);
            b.at("x", 0.0, cx, FLOOR);
            b.at("x", 0.3, cx, FLOOR);
            b.attach("x", 0.5, "u", cx - ux, -60.0);
        }
        "put_down" => {
            b.at("u", 0.0, ux, FLOOR);
            b.attach("x", 0.0, "u", cx - ux, -60.0);
            b.attach("x", 0.4, "u", cx - ux, -60.0);
            b.at("x", 0.6, cx, FLOOR);
        }
        "hold" => {
            b.at("u", 0.0, ux, FLOOR);
            b.attach("x", 0.0, "u", cx - ux, -60.0);
        }
        "move" => {
            b.at("u", 0.0, ux, FLOOR);
            b.at("u", 0.25, ux, FLOOR);
            b.at("u", 1.0, ux + 160.0, FLOOR);
            b.at("x", 0.0, cx, FLOOR);
            b.at("x", 0.25, cx, FLOOR);
            b.attach("x", 0.3, "u", cx - ux, 0.0);
        }
        "approach" => {
            b.at("u", 0.0, 240.0, FLOOR);
            b.at("u", 0.8, 570.0, FLOOR);
            b.at("x", 0.0, 700.0, FLOOR);
        }
        "leave" => {
            b.at("u", 0.0, 570.0, FLOOR);
            b.at("u", 0.15, 570.0, FLOOR);
            b.at("u", 1.0, 240.0, FLOOR);
            b.at("x", 0.0, 700.0, FLOOR);
        }
        "look_at" => {
            b.at("u", 0.0, 300.0, FLOOR);
            b.at("x", 0.0, 100.0, FLOOR);
            b.gaze("u", 0.0, 1.0, "v");
        }
        other => panic!("no scene for {other}"),
    }
    if verb == "look_at" {
        b.at("v", 0.0, 800.0, FLOOR);
    } else {
        b.at("v", 0.0, 1180.0, FLOOR);
    }
    let (trace, _) = simulate(&b.build(None), &NoiseModel::none(), 1).unwrap();
    trace
}

/// The verb's score on the ground-truth agent and patient tracks. In a
/// noise-free trace detections come in entity order: u, v, x.
fn on_tracks(verb: &str, trace: &VideoTrace, lib: &PredicateLibrary) -> f64 {
    let patient = if verb == "look_at" { 1 } else { 2 };
    let agent: Vec<Detection> = trace.frames.iter().map(|f| f[0].clone()).collect();
    let other: Vec<Detection> = trace.frames.iter().map(|f| f[patient].clone()).collect();
    lib.score_tracks(verb, &agent, Some(&other)).unwrap()
}

fn formula(verb: &str) -> Formula {
    let text = if verb == "look_at" {
        "and(person(u), person(v), neq(u,v), look_at(u,v))".to_string()
    } else {
        format!("and(person(u), chair(x), {verb}(u,x))")
    };
    Formula::parse(&text).unwrap()
}

fn score(verb: &str, trace: &VideoTrace, lib: &PredicateLibrary) -> f64 {
    score_formula(&formula(verb), trace, lib).unwrap().0.total
}

#[test]
fn scenes_list_entities_in_order() {
    let trace = scene("hold");
    for f in &trace.frames {
        assert_eq!(f.len(), 3);
        assert!(f[0].class_score(ObjectClass::Person) > f[0].class_score(ObjectClass::Chair));
        assert!(f[2].class_score(ObjectClass::Chair) > f[2].class_score(ObjectClass::Person));
    }
}

#[test]
fn each_verb_accepts_only_its_own_scene_in_hard_mode() {
    let lib = PredicateLibrary::default().with_mode(Mode::Hard);
    for scripted in VERBS {
        let trace = scene(scripted);
        for verb in VERBS {
            let s = on_tracks(verb, &trace, &lib);
            if verb == scripted {
                assert!(s.is_finite(), "{verb} rejects its own scene");
            } else {
                assert_eq!(s, f64::NEG_INFINITY, "{verb} accepts the {scripted} scene");
            }
        }
    }
}

#[test]
fn each_verb_prefers_its_own_scene_in_soft_mode() {
    let lib = PredicateLibrary::default();
    let traces: Vec<VideoTrace> = VERBS.iter().map(|v| scene(v)).collect();
    for (i, verb) in VERBS.iter().enumerate() {
        let own = on_tracks(verb, &traces[i], &lib);
        // Only the state changes cost anything on a clean scene.
        assert!(own > -15.0, "{verb} on its own scene: {own}");
        for (j, other) in VERBS.iter().enumerate() {
            if i != j {
                let s = on_tracks(verb, &traces[j], &lib);
                assert!(own > s, "{verb}: own scene {own} vs {other} scene {s}");
            }
        }
    }
}

#[test]
fn decoding_finds_each_verb_in_its_own_scene() {
    let lib = PredicateLibrary::default();
    for verb in VERBS {
        let own = score(verb, &scene(verb), &lib);
        for other in VERBS.iter().filter(|&&o| o != verb) {
            let s = score(verb, &scene(other), &lib);
            assert!(own > s, "{verb}: own scene {own} vs {other} scene {s}");
        }
    }
}

#[test]
fn reversing_time_swaps_approach_and_leave() {
    let lib = PredicateLibrary::default().with_mode(Mode::Hard);
    let approach = scene("approach");
    let reversed = approach.reversed().unwrap();
    assert!(score("approach", &approach, &lib).is_finite());
    assert_eq!(score("leave", &approach, &lib), f64::NEG_INFINITY);
    assert!(score("leave", &reversed, &lib).is_finite());
    assert_eq!(score("approach", &reversed, &lib), f64::NEG_INFINITY);
}

#[test]
fn transition_rows_are_stochastic() {
    for mode in [Mode::Hard, Mode::Soft { temperature: 1.0 }] {
        let lib = PredicateLibrary::default().with_mode(mode);
        assert_eq!(lib.predicates.len(), 18);
        for hmm in lib.predicates.values() {
            let n = hmm.state_count();
            for k in 0..n {
                let total: f64 = hmm.log_transition[k].iter().map(|a| a.exp()).sum();
                assert!((total - 1.0).abs() <= 1e-9, "{} row {k} sums to {total}", hmm.name);
            }
            assert!(hmm.accepting.iter().any(|&a| a), "{} accepts nothing", hmm.name);
        }
    }
}

fn det(b: BBox) -> Detection {
    Detection {
        bbox: b,
        class_scores: [-0.1, -3.0, -3.0, -3.0],
        color_scores: [-1.1; 3],
        velocity: [0.0, 0.0],
        heading: Some([0.0, 1.0]),
        confidence: -0.1,
    }
}

#[test]
fn inequality_never_rises_with_overlap() {
    for mode in [Mode::Hard, Mode::Soft { temperature: 1.0 }] {
        let lib = PredicateLibrary::default().with_mode(mode);
        let a = BBox {
            x: 0.0,
            y: 0.0,
            w: 100.0,
            h: 100.0,
        };
        let mut last = f64::INFINITY;
        for iou in [0.0, 0.25, 0.5, 0.75, 1.0] {
            // Two equal boxes sliding apart horizontally: iou = (w - d) / (w + d).
            let d = 100.0 * (1.0 - iou) / (1.0 + iou);
            let b = BBox { x: d, ..a };
            assert!((a.iou(&b) - iou).abs() < 1e-9);
            let s = lib.observe("neq", 0, &det(a), Some(&det(b))).unwrap();
            assert!(s <= last, "{mode:?}: neq at iou {iou} is {s}, above {last}");
            last = s;
        }
        let same = lib.observe("neq", 0, &det(a), Some(&det(a))).unwrap();
        assert!((same - lib.thresholds.neq_floor).abs() < 1e-3, "{same}");
    }
}

#[test]
fn left_and_right_are_mirror_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let width = 1280.0;
    for mode in [Mode::Hard, Mode::Soft { temperature: 1.0 }] {
        let lib = PredicateLibrary::default().with_mode(mode);
        for _ in 0..100 {
            let mut random_box = || BBox {
                x: rng.gen_range(0.0..1100.0),
                y: rng.gen_range(0.0..500.0),
                w: rng.gen_range(20.0..180.0),
                h: rng.gen_range(20.0..220.0),
            };
            let (a, b) = (det(random_box()), det(random_box()));
            let left = lib
                .observe("left_of", 0, &a.mirrored(width), Some(&b.mirrored(width)))
                .unwrap();
            let right = lib.observe("right_of", 0, &a, Some(&b)).unwrap();
            assert!((left - right).abs() < 1e-9 || left == right, "{left} vs {right}");
        }
    }
}
