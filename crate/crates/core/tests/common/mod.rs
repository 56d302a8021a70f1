//! Generators shared by the property tests and the acceptance run.

#![allow(dead_code)]

use std::collections::BTreeMap;

use fogmind::fuzzy::{
    make_gaussian, make_triangular, Direction, Label, LinguisticVariable, MembershipFunction,
    Universe, ValueKind,
};
use fogmind::rulebook::{
    is_object_relative, object_key, Action, ActionValue, Atom, CommandClass, FuzzyRule, ObjectDecl,
    RuleBase,
};
use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One row of the object interaction table: object, distance in dm,
/// heading deviation in degrees, expected labels and the rule that fired.
pub struct TableRow {
    pub object: u8,
    pub experiment: u8,
    pub distance: f64,
    pub heading: f64,
    pub distance_label: Option<&'static str>,
    pub heading_label: Option<&'static str>,
    pub rule: Option<u32>,
}

const fn row(
    object: u8,
    experiment: u8,
    distance: f64,
    heading: f64,
    distance_label: Option<&'static str>,
    heading_label: Option<&'static str>,
    rule: Option<u32>,
) -> TableRow {
    TableRow {
        object,
        experiment,
        distance,
        heading,
        distance_label,
        heading_label,
        rule,
    }
}

const NEAR: Option<&str> = Some("near");
const FAR: Option<&str> = Some("far");
const VERY_FAR: Option<&str> = Some("very_far");
const SMALL: Option<&str> = Some("small");
const MEDIUM: Option<&str> = Some("medium");
const LARGE: Option<&str> = Some("large");

pub const INTERACTION_TABLE: [TableRow; 20] = [
    row(1, 1, 3.0, 12.0, NEAR, SMALL, Some(12)),
    row(1, 2, 4.0, 35.0, NEAR, MEDIUM, None),
    row(1, 3, 8.0, 10.0, FAR, SMALL, None),
    row(1, 4, 14.0, 16.0, None, SMALL, None),
    row(2, 5, 10.0, 42.0, VERY_FAR, MEDIUM, None),
    row(2, 6, 7.0, 12.0, FAR, SMALL, None),
    row(2, 7, 12.0, 73.0, VERY_FAR, LARGE, None),
    row(2, 8, 2.0, 11.0, NEAR, SMALL, Some(14)),
    row(3, 9, 5.0, 122.0, NEAR, None, Some(11)),
    row(3, 10, 16.0, 9.0, None, SMALL, None),
    row(3, 11, 6.0, 38.0, FAR, MEDIUM, None),
    row(3, 12, 13.0, 12.0, VERY_FAR, SMALL, None),
    row(4, 13, 18.0, 0.0, None, SMALL, None),
    row(4, 14, 4.0, 10.0, NEAR, SMALL, Some(21)),
    row(4, 15, 11.0, 14.0, VERY_FAR, SMALL, None),
    row(4, 16, 7.0, 72.0, FAR, LARGE, None),
    row(5, 17, 12.0, 86.0, VERY_FAR, LARGE, None),
    row(5, 18, 2.0, 12.0, NEAR, SMALL, Some(2)),
    row(5, 19, 17.0, 8.0, None, SMALL, None),
    row(5, 20, 13.0, 76.0, VERY_FAR, LARGE, None),
];

const UNITS: [&str; 6] = ["dm", "deg", "C", "%", "h", "pts"];

fn gaussian_labels(rng: &mut ChaCha8Rng, min: f64, max: f64, n: usize) -> Vec<Label> {
    let span = max - min;
    (0..n)
        .map(|j| {
            let lower = rng.random_range(min..max - span * 0.02);
            let upper = lower + (max - lower) * rng.random_range(0.01..1.0);
            Label {
                name: format!("l{j}"),
                mf: make_gaussian(lower, upper).unwrap(),
            }
        })
        .collect()
}

fn boolean_labels() -> Vec<Label> {
    vec![
        Label {
            name: "yes".into(),
            mf: make_triangular(0.0, 1.0, 1.0).unwrap(),
        },
        Label {
            name: "no".into(),
            mf: make_triangular(0.0, 0.0, 1.0).unwrap(),
        },
    ]
}

fn var(
    name: String,
    dir: Direction,
    kind: ValueKind,
    min: f64,
    max: f64,
    unit: &str,
    labels: Vec<Label>,
) -> LinguisticVariable {
    LinguisticVariable::new(
        name,
        dir,
        kind,
        Universe::new(min, max, unit).unwrap(),
        labels,
    )
    .unwrap()
}

/// A valid rulebook drawn from `seed`: linguistic and boolean inputs,
/// sometimes object-relative ones, integer, boolean and linguistic outputs,
/// and up to a dozen multi-output rules with gaps in their ids.
pub fn random_rulebook(seed: u64) -> RuleBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut variables = Vec::new();
    for i in 0..rng.random_range(1..=4) {
        let min = rng.random_range(-100.0..50.0);
        let max = min + rng.random_range(1.0..200.0);
        let n = rng.random_range(1..=5);
        let labels = gaussian_labels(&mut rng, min, max, n);
        let unit = *UNITS.choose(&mut rng).unwrap();
        variables.push(var(
            format!("in{i}"),
            Direction::Input,
            ValueKind::Linguistic,
            min,
            max,
            unit,
            labels,
        ));
    }
    for i in 0..rng.random_range(0..=2) {
        variables.push(var(
            format!("flag{i}"),
            Direction::Input,
            ValueKind::Boolean,
            0.0,
            1.0,
            "bool",
            boolean_labels(),
        ));
    }
    let mut objects = Vec::new();
    if rng.random_bool(0.5) {
        let d = gaussian_labels(&mut rng, 0.0, 100.0, 3);
        variables.push(var(
            "distance".into(),
            Direction::Input,
            ValueKind::Linguistic,
            0.0,
            100.0,
            "dm",
            d,
        ));
        let h = gaussian_labels(&mut rng, 0.0, 180.0, 3);
        variables.push(var(
            "heading".into(),
            Direction::Input,
            ValueKind::Linguistic,
            0.0,
            180.0,
            "deg",
            h,
        ));
        for k in 0..rng.random_range(1..=3) {
            objects.push(ObjectDecl {
                name: format!("obj{k}"),
                x: rng.random_range(-5.0..15.0),
                y: rng.random_range(-5.0..15.0),
            });
        }
    }
    for i in 0..rng.random_range(1..=2) {
        let k: i64 = rng.random_range(1..=10);
        let labels = (1..=k)
            .map(|v| Label {
                name: v.to_string(),
                mf: MembershipFunction::Singleton { value: v as f64 },
            })
            .collect();
        variables.push(var(
            format!("id{i}"),
            Direction::Output,
            ValueKind::Integer,
            0.0,
            (k + 1) as f64,
            "id",
            labels,
        ));
    }
    if rng.random_bool(0.5) {
        variables.push(var(
            "switch".into(),
            Direction::Output,
            ValueKind::Boolean,
            0.0,
            1.0,
            "bool",
            boolean_labels(),
        ));
    }
    if rng.random_bool(0.5) {
        let labels = gaussian_labels(&mut rng, 0.0, 10.0, 3);
        variables.push(var(
            "level".into(),
            Direction::Output,
            ValueKind::Linguistic,
            0.0,
            10.0,
            "pts",
            labels,
        ));
    }

    let inputs: Vec<&LinguisticVariable> = variables
        .iter()
        .filter(|v| v.direction == Direction::Input && !is_object_relative(&v.name))
        .collect();
    let outputs: Vec<&LinguisticVariable> = variables
        .iter()
        .filter(|v| v.direction == Direction::Output)
        .collect();
    let mut rules = Vec::new();
    let mut id = rng.random_range(1..5u32);
    for _ in 0..rng.random_range(1..=12) {
        let mut antecedent = Vec::new();
        if !objects.is_empty() && rng.random_bool(0.5) {
            let obj = objects.choose(&mut rng).unwrap().name.clone();
            let d = variables.iter().find(|v| v.name == "distance").unwrap();
            antecedent.push(Atom {
                variable: "distance".into(),
                object: Some(obj.clone()),
                label: d.labels.choose(&mut rng).unwrap().name.clone(),
            });
            if rng.random_bool(0.7) {
                let h = variables.iter().find(|v| v.name == "heading").unwrap();
                antecedent.push(Atom {
                    variable: "heading".into(),
                    object: rng.random_bool(0.5).then_some(obj),
                    label: h.labels.choose(&mut rng).unwrap().name.clone(),
                });
            }
        }
        for _ in 0..rng.random_range(usize::from(antecedent.is_empty())..=2) {
            let v = inputs.choose(&mut rng).unwrap();
            antecedent.push(Atom {
                variable: v.name.clone(),
                object: None,
                label: v.labels.choose(&mut rng).unwrap().name.clone(),
            });
        }
        let n_out = rng.random_range(1..=outputs.len().min(3));
        let consequent = outputs
            .sample(&mut rng, n_out)
            .map(|v| Action {
                variable: v.name.clone(),
                value: match v.kind {
                    ValueKind::Integer => {
                        let MembershipFunction::Singleton { value } =
                            v.labels.choose(&mut rng).unwrap().mf
                        else {
                            unreachable!()
                        };
                        ActionValue::Int(value as i64)
                    }
                    _ => ActionValue::Label(v.labels.choose(&mut rng).unwrap().name.clone()),
                },
            })
            .collect();
        rules.push(FuzzyRule {
            id,
            part: None,
            antecedent,
            consequent,
            class: *CommandClass::ALL.choose(&mut rng).unwrap(),
        });
        id += rng.random_range(1..4);
    }
    RuleBase {
        variables,
        objects,
        rules,
    }
}

/// Crisp values for every key the rulebook can read, drawn from slightly
/// beyond each universe so clamping is exercised too.
pub fn random_snapshot(rb: &RuleBase, rng: &mut ChaCha8Rng) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for v in rb.inputs() {
        let span = v.universe.max - v.universe.min;
        let mut draw =
            || rng.random_range(v.universe.min - 0.05 * span..=v.universe.max + 0.05 * span);
        if is_object_relative(&v.name) {
            for o in &rb.objects {
                out.insert(object_key(&v.name, &o.name), draw());
            }
        } else {
            out.insert(v.name.clone(), draw());
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
