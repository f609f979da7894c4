//! Scene recipes: lay out a scene in which one interpretation of a
//! sentence is true and its sibling interpretations are not.
//!
//! Recipes work from the structure of the interpretation's first
//! conjunctive branch rather than from the sentence text:
//!
//! * a person-to-person relation plus a manipulation gives an observer scene;
//! * person-to-person relations alone give a three-person scene;
//! * a path verb towards an object gives a walk towards or away from it;
//! * anything else is a set of manipulation groups, one region each.

use std::collections::{BTreeMap, BTreeSet};

use super::script::{SceneScript, ScriptBuilder, Variation, FLOOR};
use super::{Color, ObjectClass};
use crate::corpus::SentenceRecord;
use crate::error::TraceError;
use crate::logic::{normalize, Atom, Sort, DEFAULT_BRANCH_CAP};

/// Center distance below which two entities count as near. Recipes keep
/// unrelated entities well outside it.
pub const NEAR_RADIUS: f64 = 240.0;

const MANIPULATIONS: [&str; 4] = ["pick_up", "put_down", "hold", "move"];
const PATHS: [&str; 3] = ["approach", "leave", "look_at"];

/// Lift of a held object's bottom edge above its holder's.
const LIFT: f64 = -60.0;
/// Extra lift per additional object held by one agent.
const LIFT_STEP: f64 = -40.0;
/// Distance a moved object travels.
const MOVE_DISTANCE: f64 = 160.0;
/// Where a walker stops short of its target.
const ARRIVE_GAP: f64 = 130.0;

#[derive(Debug, Clone)]
struct Relation {
    verb: String,
    agent: String,
    patient: String,
}

#[derive(Debug, Default)]
struct Roles {
    persons: Vec<String>,
    /// Every object the sentence mentions, with its class and color.
    objects: Vec<(String, ObjectClass, Color)>,
    manip: Vec<Relation>,
    paths: Vec<Relation>,
    with: Vec<(String, String)>,
    on: Vec<(String, String)>,
}

impl Roles {
    fn is_person(&self, v: &str) -> bool {
        self.persons.iter().any(|p| p == v)
    }

    fn object(&self, v: &str) -> Option<&(String, ObjectClass, Color)> {
        self.objects.iter().find(|o| o.0 == v)
    }
}

fn var(a: &Atom, i: usize) -> Result<String, TraceError> {
    a.args
        .get(i)
        .and_then(|t| t.as_var())
        .map(str::to_string)
        .ok_or_else(|| TraceError::NoRecipe(format!("atom `{a}` has a constant argument")))
}

fn mentioned_colors(record: &SentenceRecord) -> BTreeSet<Color> {
    record
        .interpretations
        .iter()
        .flat_map(|i| i.formula.atoms().into_iter().cloned().collect::<Vec<_>>())
        .filter_map(|a| Color::from_name(&a.predicate))
        .collect()
}

fn roles(record: &SentenceRecord, index: usize) -> Result<Roles, TraceError> {
    let interp = record
        .interpretations
        .get(index)
        .ok_or_else(|| TraceError::NoRecipe(format!("{} has no interpretation {index}", record.id)))?;
    let formula = &interp.formula;
    let branches = normalize(formula, DEFAULT_BRANCH_CAP)?;
    let branch = branches
        .first()
        .ok_or_else(|| TraceError::NoRecipe(format!("{} has an empty formula", interp.id)))?;

    // Objects without a color of their own take the color the sentence did
    // not mention, so that color atoms on the wrong object fail.
    let mentioned = mentioned_colors(record);
    let fallback = match (mentioned.contains(&Color::Yellow), mentioned.contains(&Color::Green)) {
        (true, false) => Color::Green,
        (false, true) => Color::Yellow,
        _ => Color::Other,
    };

    let mut r = Roles::default();
    let mut colors: BTreeMap<String, Color> = BTreeMap::new();
    for a in &branch.atoms {
        if let Some(c) = Color::from_name(&a.predicate) {
            colors.insert(var(a, 0)?, c);
        }
    }
    let sorts = formula.variable_sorts();
    for a in formula.atoms() {
        if let Some(class) = ObjectClass::from_name(&a.predicate) {
            let v = var(a, 0)?;
            if class == ObjectClass::Person {
                continue;
            }
            if r.objects.iter().all(|o| o.0 != v) {
                let color = colors.get(&v).copied().unwrap_or(fallback);
                r.objects.push((v, class, color));
            }
        }
    }
    for a in &branch.atoms {
        let p = a.predicate.as_str();
        if p == "person" {
            r.persons.push(var(a, 0)?);
        } else if MANIPULATIONS.contains(&p) || PATHS.contains(&p) {
            let rel = Relation {
                verb: p.to_string(),
                agent: var(a, 0)?,
                patient: var(a, 1)?,
            };
            if MANIPULATIONS.contains(&p) {
                r.manip.push(rel);
            } else {
                r.paths.push(rel);
            }
        } else if p == "with" {
            r.with.push((var(a, 0)?, var(a, 1)?));
        } else if p == "on" {
            r.on.push((var(a, 0)?, var(a, 1)?));
        }
    }
    // Persons quantified only in other branches still appear on screen.
    for (v, s) in sorts {
        if s == Sort::Person && !r.persons.contains(&v) {
            r.persons.push(v);
        }
    }
    Ok(r)
}

fn arrive_phase(v: Variation) -> f64 {
    if v.actor_set % 2 == 1 {
        0.65
    } else {
        0.8
    }
}

/// Builds the scene script for interpretation `index` of `record`.
pub fn script_for(
    record: &SentenceRecord,
    index: usize,
    variation: Variation,
    frame_count: usize,
) -> Result<SceneScript, TraceError> {
    let r = roles(record, index)?;
    let mut b = ScriptBuilder::new(frame_count, variation);
    if variation.actor_set % 2 == 1 {
        b.set_offset(30.0);
    }
    for p in &r.persons {
        b.add(p, ObjectClass::Person, Color::Other);
    }
    for (v, class, color) in &r.objects {
        b.add(v, *class, *color);
    }
    let person_paths: Vec<Relation> = r.paths.iter().filter(|p| r.is_person(&p.patient)).cloned().collect();
    let object_paths: Vec<Relation> = r
        .paths
        .iter()
        .filter(|p| r.object(&p.patient).is_some())
        .cloned()
        .collect();
    if !person_paths.is_empty() && !r.manip.is_empty() {
        observer_scene(&mut b, &r, &person_paths[0])?;
    } else if !person_paths.is_empty() {
        crowd_scene(&mut b, &r, &person_paths)?;
    } else if let Some(path) = object_paths.first() {
        path_scene(&mut b, &r, path)?;
    } else if !r.manip.is_empty() {
        group_scene(&mut b, &r)?;
    } else {
        return Err(TraceError::NoRecipe(format!(
            "{} reading {index} has no verb to stage",
            record.id
        )));
    }
    let interp = &record.interpretations[index];
    let script = b.build(Some((record.id.clone(), interp.id.clone(), index)));
    script.check()?;
    Ok(script)
}

/// Stages `verb` by a stationary `agent` on `objects`, which rest at the
/// given floor x positions when not held.
fn manipulate_in_place(b: &mut ScriptBuilder, verb: &str, agent: &str, objects: &[(String, f64)], agent_x: f64) {
    for (i, (o, x)) in objects.iter().enumerate() {
        let dx = x - agent_x;
        let dy = LIFT + LIFT_STEP * i as f64;
        match verb {
            "pick_up" => {
                b.at(o, 0.0, *x, FLOOR);
                b.at(o, 0.3, *x, FLOOR);
                b.attach(o, 0.5, agent, dx, dy);
                b.event(verb, agent, o, 0.0, 1.0);
            }
            "put_down" => {
                b.attach(o, 0.0, agent, dx, dy);
                b.attach(o, 0.4, agent, dx, dy);
                b.at(o, 0.6, *x, FLOOR);
                b.event(verb, agent, o, 0.0, 1.0);
            }
            "hold" => {
                b.attach(o, 0.0, agent, dx, dy);
                b.event(verb, agent, o, 0.0, 1.0);
            }
            "move" => {
                b.at(o, 0.0, *x, FLOOR);
                b.at(o, 0.25, *x, FLOOR);
                b.attach(o, 0.3, agent, dx, 0.0);
                b.event(verb, agent, o, 0.0, 1.0);
            }
            _ => {}
        }
    }
}

/// Places the agents of a move: standing until a quarter of the way in,
/// then walking right by `MOVE_DISTANCE`.
fn place_agents(b: &mut ScriptBuilder, verb: &str, agents: &[(String, f64)]) {
    for (a, x) in agents {
        b.at(a, 0.0, *x, FLOOR);
        if verb == "move" {
            b.at(a, 0.25, *x, FLOOR);
            b.at(a, 1.0, x + MOVE_DISTANCE, FLOOR);
        }
    }
}

/// Manipulation groups: connected agent/object components, each staged
/// in its own region.
fn group_scene(b: &mut ScriptBuilder, r: &Roles) -> Result<(), TraceError> {
    let mut groups: Vec<(Vec<String>, Vec<String>, String)> = Vec::new();
    for rel in &r.manip {
        let hit = groups
            .iter()
            .position(|(a, o, _)| a.contains(&rel.agent) || o.contains(&rel.patient));
        let g = match hit {
            Some(i) => &mut groups[i],
            None => {
                groups.push((Vec::new(), Vec::new(), rel.verb.clone()));
                groups.last_mut().expect("just pushed")
            }
        };
        if !g.0.contains(&rel.agent) {
            g.0.push(rel.agent.clone());
        }
        if !g.1.contains(&rel.patient) {
            g.1.push(rel.patient.clone());
        }
    }
    // Merge groups that share members after the fact.
    let mut merged: Vec<(Vec<String>, Vec<String>, String)> = Vec::new();
    for g in groups {
        match merged
            .iter_mut()
            .find(|m| m.0.iter().any(|a| g.0.contains(a)) || m.1.iter().any(|o| g.1.contains(o)))
        {
            Some(m) => {
                m.0.extend(g.0.into_iter().filter(|a| !m.0.contains(a)).collect::<Vec<_>>());
                m.1.extend(g.1.into_iter().filter(|o| !m.1.contains(o)).collect::<Vec<_>>());
            }
            None => merged.push(g),
        }
    }
    let centers: Vec<f64> = match merged.len() {
        1 => vec![560.0],
        2 => vec![300.0, 860.0],
        n => return Err(TraceError::NoRecipe(format!("{n} manipulation groups"))),
    };
    let mut staged: BTreeSet<String> = BTreeSet::new();
    for ((agents, objects, verb), gx) in merged.iter().zip(centers) {
        let agent_xs: Vec<f64> = match agents.len() {
            1 => vec![gx],
            2 => vec![gx - 100.0, gx + 100.0],
            n => return Err(TraceError::NoRecipe(format!("{n} agents in one group"))),
        };
        let offsets: Vec<f64> = match (agents.len(), objects.len()) {
            (1, 1) => vec![90.0],
            (1, 2) => vec![-95.0, 95.0],
            (1, 3) => vec![-95.0, 95.0, 95.0],
            (2, 1) => vec![0.0],
            (2, 2) => vec![-35.0, 35.0],
            (a, o) => return Err(TraceError::NoRecipe(format!("{a} agents with {o} objects"))),
        };
        let placed: Vec<(String, f64)> = agents.iter().cloned().zip(agent_xs.iter().copied()).collect();
        place_agents(b, verb, &placed);
        let objs: Vec<(String, f64)> = objects.iter().cloned().zip(offsets.iter().map(|o| gx + o)).collect();
        manipulate_in_place(b, verb, &agents[0], &objs, agent_xs[0]);
        for rel in r
            .manip
            .iter()
            .filter(|m| agents.contains(&m.agent) && m.agent != agents[0])
        {
            b.event(&rel.verb, &rel.agent, &rel.patient, 0.0, 1.0);
        }
        staged.extend(agents.iter().cloned());
        staged.extend(objects.iter().cloned());
    }
    idle(b, r, &staged);
    Ok(())
}

/// Parks everything not staged along the far edges of the floor, out of
/// reach of the action.
fn idle(b: &mut ScriptBuilder, r: &Roles, staged: &BTreeSet<String>) {
    let spots = [1180.0, 1070.0, 100.0];
    let mut k = 0;
    for (v, ..) in &r.objects {
        if !staged.contains(v) {
            b.at(v, 0.0, spots[k % spots.len()], FLOOR);
            k += 1;
        }
    }
    for p in &r.persons {
        if !staged.contains(p) {
            b.at(p, 0.0, spots[k % spots.len()], FLOOR);
            k += 1;
        }
    }
}

/// A person walks towards or away from an object, possibly carrying a
/// second one or with the second one resting on the first.
fn path_scene(b: &mut ScriptBuilder, r: &Roles, path: &Relation) -> Result<(), TraceError> {
    let (a, target) = (&path.agent, &path.patient);
    let tx = 700.0;
    let (_, tclass, _) = r.object(target).expect("path patient is an object");
    b.at(target, 0.0, tx, FLOOR);
    let far = 240.0;
    let stop = tx - ARRIVE_GAP;
    match path.verb.as_str() {
        "approach" => {
            b.at(a, 0.0, far, FLOOR);
            b.at(a, arrive_phase(b.variation()), stop, FLOOR);
        }
        "leave" => {
            b.at(a, 0.0, stop, FLOOR);
            b.at(a, 0.15, stop, FLOOR);
            b.at(a, 1.0, far, FLOOR);
        }
        other => return Err(TraceError::NoRecipe(format!("path verb `{other}` towards an object"))),
    }
    b.event(&path.verb, a, target, 0.0, 1.0);
    let mut staged: BTreeSet<String> = [a.clone(), target.clone()].into();
    for (holder, o) in &r.with {
        b.attach(o, 0.0, holder, 45.0, LIFT);
        b.event("with", holder, o, 0.0, 1.0);
        staged.insert(o.clone());
    }
    for (o, support) in &r.on {
        let (_, sh) = tclass.size();
        let top = if support == target { FLOOR - sh } else { FLOOR };
        b.at(o, 0.0, tx, top);
        b.event("on", o, support, 0.0, 1.0);
        staged.insert(o.clone());
    }
    idle(b, r, &staged);
    Ok(())
}

/// One person relates to another (looks at or walks up to them) while a
/// manipulation happens on one side or the other.
fn observer_scene(b: &mut ScriptBuilder, r: &Roles, rel: &Relation) -> Result<(), TraceError> {
    let (obs, seen) = (&rel.agent, &rel.patient);
    let m = &r.manip[0];
    let (worker, obj) = (&m.agent, &m.patient);
    let sx = 880.0;
    let arrive = arrive_phase(b.variation());
    let mut staged: BTreeSet<String> = [obs.clone(), seen.clone(), obj.clone()].into();

    if worker == seen {
        // The observed person works in place, moving away from the observer
        // if the verb is a move.
        place_agents(b, &m.verb, &[(seen.clone(), sx)]);
        manipulate_in_place(b, &m.verb, seen, &[(obj.clone(), sx + 110.0)], sx);
        match rel.verb.as_str() {
            "look_at" => {
                b.at(obs, 0.0, 300.0, FLOOR);
                b.gaze(obs, 0.0, 1.0, seen);
            }
            "approach" => {
                let end = b.x_at(seen, 1.0) - ARRIVE_GAP;
                b.at(obs, 0.0, 200.0, FLOOR);
                b.at(obs, arrive, end, FLOOR);
            }
            other => return Err(TraceError::NoRecipe(format!("observer verb `{other}`"))),
        }
    } else if worker == obs {
        b.at(seen, 0.0, sx, FLOOR);
        match rel.verb.as_str() {
            "look_at" => {
                let ox = 300.0;
                place_agents(b, &m.verb, &[(obs.clone(), ox)]);
                manipulate_in_place(b, &m.verb, obs, &[(obj.clone(), ox - 90.0)], ox);
                b.gaze(obs, 0.0, 1.0, seen);
            }
            "approach" => {
                let (start, end) = (200.0, sx - ARRIVE_GAP);
                b.at(obs, 0.0, start, FLOOR);
                b.at(obs, arrive, end, FLOOR);
                walking_manipulation(b, &m.verb, obs, obj, start + 90.0, arrive);
            }
            other => return Err(TraceError::NoRecipe(format!("observer verb `{other}`"))),
        }
        b.event(&m.verb, obs, obj, 0.0, 1.0);
    } else {
        return Err(TraceError::NoRecipe(format!("manipulation by a bystander `{worker}`")));
    }
    b.event(&rel.verb, obs, seen, 0.0, 1.0);
    for p in &r.persons {
        staged.insert(p.clone());
    }
    idle(b, r, &staged);
    Ok(())
}

/// A manipulation performed while the agent walks; the object starts on
/// the floor at `x` (or already held) and goes along.
fn walking_manipulation(b: &mut ScriptBuilder, verb: &str, agent: &str, obj: &str, x: f64, arrive: f64) {
    match verb {
        "pick_up" => {
            b.at(obj, 0.0, x, FLOOR);
            b.at(obj, 0.1, x, FLOOR);
            b.attach(obj, 0.4, agent, 45.0, LIFT);
        }
        "put_down" => {
            b.attach(obj, 0.0, agent, 45.0, LIFT);
            let down = arrive - 0.15;
            b.attach(obj, down - 0.15, agent, 45.0, LIFT);
            let land = b.x_at(agent, down) + 45.0;
            b.at(obj, down, land, FLOOR);
        }
        "hold" => b.attach(obj, 0.0, agent, 45.0, LIFT),
        "move" => {
            b.at(obj, 0.0, x, FLOOR);
            b.at(obj, 0.1, x, FLOOR);
            b.attach(obj, 0.15, agent, 90.0, 0.0);
        }
        _ => {}
    }
}

/// Three people, one agent relating to two others or two agents relating
/// to one.
fn crowd_scene(b: &mut ScriptBuilder, r: &Roles, rels: &[Relation]) -> Result<(), TraceError> {
    let agents: Vec<&String> = unique(rels.iter().map(|p| &p.agent));
    let patients: Vec<&String> = unique(rels.iter().map(|p| &p.patient));
    let verb = rels[0].verb.as_str();
    let arrive = arrive_phase(b.variation());
    let mut staged: BTreeSet<String> = BTreeSet::new();
    match (verb, agents.len(), patients.len()) {
        ("look_at", 1, 2) => {
            // Both patients lie along the agent's line of sight.
            b.at(agents[0], 0.0, 300.0, FLOOR);
            b.at(patients[0], 0.0, 700.0, FLOOR);
            b.at(patients[1], 0.0, 1000.0, FLOOR);
            b.gaze(agents[0], 0.0, 1.0, patients[0]);
        }
        ("look_at", 2, 1) => {
            // The second agent stands further back, so the two lines of
            // sight meet only at the patient.
            b.at(agents[0], 0.0, 500.0, FLOOR);
            b.at(agents[1], 0.0, 620.0, FLOOR - 210.0);
            b.at(patients[0], 0.0, 900.0, FLOOR);
            b.gaze(agents[0], 0.0, 1.0, patients[0]);
            b.gaze(agents[1], 0.0, 1.0, patients[0]);
        }
        ("approach" | "leave", 1, 2) => {
            let bx = 800.0;
            b.at(patients[0], 0.0, bx, FLOOR);
            b.at(patients[1], 0.0, bx + 70.0, FLOOR);
            walk(b, verb, agents[0], 200.0, bx - 120.0, arrive);
        }
        ("approach" | "leave", 2, 1) => {
            let bx = 650.0;
            b.at(patients[0], 0.0, bx, FLOOR);
            walk(b, verb, agents[0], 200.0, bx - 160.0, arrive);
            walk(b, verb, agents[1], 1100.0, bx + 160.0, arrive);
        }
        (v, a, p) => {
            return Err(TraceError::NoRecipe(format!("`{v}` with {a} agents and {p} patients")));
        }
    }
    for rel in rels {
        b.event(&rel.verb, &rel.agent, &rel.patient, 0.0, 1.0);
    }
    staged.extend(agents.iter().map(|s| s.to_string()));
    staged.extend(patients.iter().map(|s| s.to_string()));
    idle(b, r, &staged);
    Ok(())
}

/// Walks between a far point and a near point: inward for approach,
/// outward for leave.
fn walk(b: &mut ScriptBuilder, verb: &str, who: &str, far: f64, near: f64, arrive: f64) {
    if verb == "approach" {
        b.at(who, 0.0, far, FLOOR);
        b.at(who, arrive, near, FLOOR);
    } else {
        b.at(who, 0.0, near, FLOOR);
        b.at(who, 0.15, near, FLOOR);
        b.at(who, 1.0, far, FLOOR);
    }
}

fn unique<'a>(it: impl Iterator<Item = &'a String>) -> Vec<&'a String> {
    let mut out: Vec<&String> = Vec::new();
    for s in it {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}
