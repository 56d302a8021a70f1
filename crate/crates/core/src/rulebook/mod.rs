//! The caregiver-editable rule language.
//!
//! A rulebook declares linguistic variables, named objects in the home, and
//! numbered IF-THEN rules over them:
//!
//! ```text
//! VAR rain input boolean bool RANGE 0 1
//!   LABEL yes TRI 0 1 1
//!   LABEL no TRI 0 0 1
//! OBJECT object1 AT 5 3
//! RULE 1: IF rain IS yes AND distance(object1) IS near AND heading IS small THEN image_message IS 3 CLASS reminder
//! ```
//!
//! `distance` and `heading` are measured relative to an object. An atom on
//! one of them without a qualifier binds to the object named elsewhere in the
//! same rule.

mod defaults;
mod parser;
mod validate;
mod writer;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fuzzy::{Direction, LinguisticVariable};

pub use defaults::{
    default_rulebook, default_rulebook_text, proximity_fixtures, ProximityFixture,
    DEFAULT_RULEBOOK_SOURCE,
};
pub use parser::{parse_rulebook, parse_unchecked, ParseError};
pub use validate::{validate, Diagnostic};
pub use writer::serialize;

/// Variables measured relative to a named object.
pub const OBJECT_RELATIVE: [&str; 2] = ["distance", "heading"];

#[derive(Debug, thiserror::Error)]
pub enum RulebookError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("rulebook failed validation:\n{}", render(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("reading rulebook: {0}")]
    Io(#[from] std::io::Error),
}

fn render(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandClass {
    Reminder,
    Alert,
    Launch,
    Disable,
    Automatic,
}

impl CommandClass {
    pub const ALL: [CommandClass; 5] = [
        CommandClass::Reminder,
        CommandClass::Alert,
        CommandClass::Launch,
        CommandClass::Disable,
        CommandClass::Automatic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CommandClass::Reminder => "reminder",
            CommandClass::Alert => "alert",
            CommandClass::Launch => "launch",
            CommandClass::Disable => "disable",
            CommandClass::Automatic => "automatic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
    }

    /// Reminder-class rules only run in automated mode; everything else runs
    /// in both modes.
    pub fn scope(self) -> ModeScope {
        match self {
            CommandClass::Reminder => ModeScope::AutomatedOnly,
            _ => ModeScope::Both,
        }
    }
}

impl fmt::Display for CommandClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeScope {
    AutomatedOnly,
    Both,
}

/// `variable[(object)] IS label`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub variable: String,
    pub object: Option<String>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionValue {
    Int(i64),
    Label(String),
}

impl fmt::Display for ActionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionValue::Int(i) => write!(f, "{i}"),
            ActionValue::Label(l) => f.write_str(l),
        }
    }
}

/// `output_variable IS value`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub variable: String,
    pub value: ActionValue,
}

/// Identifies a rule, or one single-output part of a decomposed rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleRef {
    pub id: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub part: Option<u16>,
}

impl fmt::Display for RuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.part {
            Some(p) => write!(f, "{}.{}", self.id, p),
            None => write!(f, "{}", self.id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub id: u32,
    /// Action index when this rule is one part of a decomposed multi-output rule.
    pub part: Option<u16>,
    pub antecedent: Vec<Atom>,
    pub consequent: Vec<Action>,
    pub class: CommandClass,
}

impl FuzzyRule {
    pub fn reference(&self) -> RuleRef {
        RuleRef {
            id: self.id,
            part: self.part,
        }
    }

    pub fn scope(&self) -> ModeScope {
        self.class.scope()
    }

    /// The single object named by this rule's qualified atoms, if exactly one.
    pub fn context_object(&self) -> Option<&str> {
        let mut objects = self.antecedent.iter().filter_map(|a| a.object.as_deref());
        let first = objects.next()?;
        objects.all(|o| o == first).then_some(first)
    }

    /// Snapshot key an atom reads from, e.g. `rain` or `heading(object1)`.
    pub fn atom_key(&self, atom: &Atom) -> String {
        match (&atom.object, self.context_object()) {
            (Some(o), _) => object_key(&atom.variable, o),
            (None, Some(ctx)) if is_object_relative(&atom.variable) => {
                object_key(&atom.variable, ctx)
            }
            (None, _) => atom.variable.clone(),
        }
    }

    /// Splits a multi-output rule into single-output rules that share the
    /// antecedent. Single-output rules come back unchanged.
    pub fn decompose_mimo(&self) -> Vec<FuzzyRule> {
        if self.consequent.len() <= 1 {
            return vec![self.clone()];
        }
        self.consequent
            .iter()
            .enumerate()
            .map(|(i, action)| FuzzyRule {
                id: self.id,
                part: Some(i as u16),
                antecedent: self.antecedent.clone(),
                consequent: vec![action.clone()],
                class: self.class,
            })
            .collect()
    }

    pub fn targets(&self, variable: &str, value: &ActionValue) -> bool {
        self.consequent
            .iter()
            .any(|a| a.variable == variable && &a.value == value)
    }
}

pub fn is_object_relative(variable: &str) -> bool {
    OBJECT_RELATIVE.contains(&variable)
}

pub fn object_key(variable: &str, object: &str) -> String {
    format!("{variable}({object})")
}

/// A named location usable as an atom qualifier. Coordinates in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectDecl {
    pub name: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBase {
    pub variables: Vec<LinguisticVariable>,
    pub objects: Vec<ObjectDecl>,
    pub rules: Vec<FuzzyRule>,
}

impl RuleBase {
    pub fn variable(&self, name: &str) -> Option<&LinguisticVariable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn object(&self, name: &str) -> Option<&ObjectDecl> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn rule(&self, id: u32) -> Option<&FuzzyRule> {
        self.rules.iter().find(|r| r.id == id && r.part.is_none())
    }

    pub fn outputs(&self) -> impl Iterator<Item = &LinguisticVariable> {
        self.variables
            .iter()
            .filter(|v| v.direction == Direction::Output)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &LinguisticVariable> {
        self.variables
            .iter()
            .filter(|v| v.direction == Direction::Input)
    }

    /// Same registries, every rule split into single-output parts.
    pub fn decomposed(&self) -> RuleBase {
        RuleBase {
            variables: self.variables.clone(),
            objects: self.objects.clone(),
            rules: self.rules.iter().flat_map(|r| r.decompose_mimo()).collect(),
        }
    }

    /// Copy keeping only rules accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&FuzzyRule) -> bool) -> RuleBase {
        RuleBase {
            variables: self.variables.clone(),
            objects: self.objects.clone(),
            rules: self.rules.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }
}
