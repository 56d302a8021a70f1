use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::fuzzy::{Direction, ValueKind};

use super::{is_object_relative, ActionValue, RuleBase};

/// One validation finding. Carries the offending rule id when it concerns a
/// rule, and always names the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub rule: Option<u32>,
    pub token: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Some(id) => write!(f, "rule {id}: {} `{}`", self.message, self.token),
            None => write!(f, "{} `{}`", self.message, self.token),
        }
    }
}

/// Resolves every atom and action against the registries. An empty result
/// means the rulebook is usable.
pub fn validate(rb: &RuleBase) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |rule: Option<u32>, token: &str, message: &str| {
        out.push(Diagnostic {
            rule,
            token: token.to_string(),
            message: message.to_string(),
        })
    };

    let mut seen_vars = BTreeSet::new();
    for var in &rb.variables {
        if !seen_vars.insert(var.name.as_str()) {
            push(None, &var.name, "duplicate variable");
        }
        if let Err(e) = var.check() {
            push(None, &var.name, &format!("invalid variable ({e})"));
        }
    }
    let mut seen_objects = BTreeSet::new();
    for obj in &rb.objects {
        if !seen_objects.insert(obj.name.as_str()) {
            push(None, &obj.name, "duplicate object");
        }
    }
    if rb.rules.is_empty() {
        push(None, "RULE", "rulebook declares no rules");
    }

    let mut seen_rules = BTreeSet::new();
    for rule in &rb.rules {
        let id = Some(rule.id);
        if !seen_rules.insert(rule.reference()) {
            push(id, &rule.reference().to_string(), "duplicate rule id");
        }
        for atom in &rule.antecedent {
            let Some(var) = rb.variable(&atom.variable) else {
                push(id, &atom.variable, "unknown variable");
                continue;
            };
            if var.direction != Direction::Input {
                push(
                    id,
                    &atom.variable,
                    "direction mismatch: antecedent reads an output",
                );
            }
            if var.label(&atom.label).is_none() {
                push(id, &atom.label, &format!("unknown label of `{}`", var.name));
            }
            match &atom.object {
                Some(obj) if !is_object_relative(&atom.variable) => push(
                    id,
                    obj,
                    &format!("`{}` takes no object qualifier", var.name),
                ),
                Some(obj) if rb.object(obj).is_none() => push(id, obj, "unknown object"),
                None if is_object_relative(&atom.variable) && rule.context_object().is_none() => {
                    push(id, &atom.variable, "missing object qualifier")
                }
                _ => {}
            }
        }
        for action in &rule.consequent {
            let Some(var) = rb.variable(&action.variable) else {
                push(id, &action.variable, "unknown variable");
                continue;
            };
            if var.direction != Direction::Output {
                push(
                    id,
                    &action.variable,
                    "direction mismatch: consequent writes an input",
                );
            }
            match (&action.value, var.kind) {
                (ActionValue::Int(n), ValueKind::Integer) => {
                    if var.singleton(*n).is_none() {
                        push(
                            id,
                            &n.to_string(),
                            &format!("undeclared singleton of `{}`", var.name),
                        );
                    }
                }
                (ActionValue::Int(n), _) => push(
                    id,
                    &n.to_string(),
                    &format!("`{}` takes a label, not an integer", var.name),
                ),
                (ActionValue::Label(l), ValueKind::Integer) => {
                    push(id, l, &format!("`{}` takes an integer id", var.name))
                }
                (ActionValue::Label(l), _) => {
                    if var.label(l).is_none() {
                        push(id, l, &format!("unknown label of `{}`", var.name));
                    }
                }
            }
        }
    }
    out
}
