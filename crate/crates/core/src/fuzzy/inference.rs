use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::membership::nearest_index;
use super::variable::{LinguisticVariable, ValueKind, DEFAULT_THRESHOLD};
use super::{FuzzyError, MembershipFunction};
use crate::rulebook::{ActionValue, RuleBase, RuleRef};

pub const DEFAULT_GRID_POINTS: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceOptions {
    pub grid_points: usize,
    /// A rule counts as activated when its strength reaches this value.
    pub activation_threshold: f64,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            grid_points: DEFAULT_GRID_POINTS,
            activation_threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Aggregated output fuzzy set of one variable, sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregatedOutput {
    pub variable: String,
    pub grid: Vec<f64>,
    pub membership: Vec<f64>,
}

impl AggregatedOutput {
    pub fn zeros(variable: impl Into<String>, grid: Vec<f64>) -> Self {
        let membership = vec![0.0; grid.len()];
        AggregatedOutput {
            variable: variable.into(),
            grid,
            membership,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.membership.iter().all(|&m| m <= 0.0)
    }

    /// Pointwise max with `sampled` clipped at `strength`.
    pub fn absorb(&mut self, sampled: &[f64], strength: f64) {
        for (m, &s) in self.membership.iter_mut().zip(sampled) {
            *m = m.max(s.min(strength));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuleFiring {
    pub rule: RuleRef,
    pub strength: f64,
    pub activated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    /// One aggregate per declared output variable, including untouched ones.
    pub outputs: BTreeMap<String, AggregatedOutput>,
    /// Every rule whose inputs were all present, in rulebase order.
    pub firings: Vec<RuleFiring>,
    /// Rules skipped because an input was missing from the snapshot.
    pub skipped: Vec<RuleRef>,
}

impl Inference {
    pub fn activated(&self) -> impl Iterator<Item = &RuleFiring> {
        self.firings.iter().filter(|f| f.activated)
    }

    pub fn strength(&self, rule: RuleRef) -> Option<f64> {
        self.firings
            .iter()
            .find(|f| f.rule == rule)
            .map(|f| f.strength)
    }
}

/// Mamdani AND: the minimum of the atom degrees.
pub fn rule_strength(degrees: &[f64]) -> Result<f64, FuzzyError> {
    degrees
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(FuzzyError::EmptyAntecedent)
}

/// Runs every rule of `rb` against crisp `inputs` keyed by resolved atom key
/// (`rain`, `distance(object1)`, ...).
///
/// Rules referencing a key that is absent are skipped. Unknown variables or
/// labels are a validation concern and are treated as skips here too.
pub fn infer(rb: &RuleBase, inputs: &BTreeMap<String, f64>, opts: &InferenceOptions) -> Inference {
    let mut outputs: BTreeMap<String, AggregatedOutput> = rb
        .outputs()
        .map(|v| {
            (
                v.name.clone(),
                AggregatedOutput::zeros(v.name.clone(), v.universe.grid(opts.grid_points)),
            )
        })
        .collect();
    let mut sampled: HashMap<(String, String), Vec<f64>> = HashMap::new();
    let mut firings = Vec::with_capacity(rb.rules.len());
    let mut skipped = Vec::new();

    'rules: for rule in &rb.rules {
        let mut degrees = Vec::with_capacity(rule.antecedent.len());
        for atom in &rule.antecedent {
            let key = rule.atom_key(atom);
            let (Some(&x), Some(var)) = (inputs.get(&key), rb.variable(&atom.variable)) else {
                skipped.push(rule.reference());
                continue 'rules;
            };
            let Some(d) = var.degree(&atom.label, x) else {
                skipped.push(rule.reference());
                continue 'rules;
            };
            degrees.push(d);
        }
        let Ok(strength) = rule_strength(&degrees) else {
            skipped.push(rule.reference());
            continue;
        };
        firings.push(RuleFiring {
            rule: rule.reference(),
            strength,
            activated: strength >= opts.activation_threshold,
        });
        if strength <= 0.0 {
            continue;
        }
        for action in &rule.consequent {
            let (Some(var), Some(agg)) = (
                rb.variable(&action.variable),
                outputs.get_mut(&action.variable),
            ) else {
                continue;
            };
            let Some(mf) = consequent_mf(var, &action.value) else {
                continue;
            };
            let key = (action.variable.clone(), action.value.to_string());
            let shape = sampled.entry(key).or_insert_with(|| mf.sample(&agg.grid));
            agg.absorb(shape, strength);
        }
    }

    Inference {
        outputs,
        firings,
        skipped,
    }
}

fn consequent_mf(var: &LinguisticVariable, value: &ActionValue) -> Option<MembershipFunction> {
    match value {
        ActionValue::Label(name) => var.label(name).map(|l| l.mf),
        ActionValue::Int(id) => var.singleton(*id).map(|l| l.mf),
    }
}

/// Center of gravity of the aggregate, taken as the piecewise-linear curve
/// through its samples. The area is the trapezoid sum; the first moment is
/// integrated exactly per cell, since `x * mu(x)` is quadratic there and a
/// plain trapezoid on it is biased by `h^2 / 6 * (mu(max) - mu(min))`.
pub fn defuzzify_cog(agg: &AggregatedOutput) -> Result<f64, FuzzyError> {
    let n = agg.grid.len().min(agg.membership.len());
    if n == 0 || agg.is_empty() {
        return Err(FuzzyError::NoOutput(agg.variable.clone()));
    }
    if n == 1 {
        return Ok(agg.grid[0]);
    }
    let (x, m) = (&agg.grid[..n], &agg.membership[..n]);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n - 1 {
        let h = x[i + 1] - x[i];
        den += 0.5 * h * (m[i] + m[i + 1]);
        num += h / 6.0 * (x[i] * (2.0 * m[i] + m[i + 1]) + x[i + 1] * (m[i] + 2.0 * m[i + 1]));
    }
    if den <= 0.0 {
        return Err(FuzzyError::NoOutput(agg.variable.clone()));
    }
    Ok(num / den)
}

/// Clipped activation of every singleton label of an integer output.
pub fn singleton_activations(
    agg: &AggregatedOutput,
    var: &LinguisticVariable,
) -> Result<Vec<(i64, f64)>, FuzzyError> {
    if var.kind != ValueKind::Integer {
        return Err(FuzzyError::NotInteger(var.name.clone()));
    }
    Ok(var
        .labels
        .iter()
        .filter_map(|l| match l.mf {
            MembershipFunction::Singleton { value } => {
                nearest_index(&agg.grid, value).map(|i| (value.round() as i64, agg.membership[i]))
            }
            _ => None,
        })
        .collect())
}

/// Integer ID with the largest clipped activation; ties go to the smaller
/// ID. Blending message IDs by center of gravity would dispatch an unrelated
/// message, so integer outputs are selected rather than averaged.
pub fn select_integer_output(
    agg: &AggregatedOutput,
    var: &LinguisticVariable,
) -> Result<i64, FuzzyError> {
    singleton_activations(agg, var)?
        .into_iter()
        .filter(|&(_, a)| a > 0.0)
        .min_by(|(ia, a), (ib, b)| b.total_cmp(a).then(ia.cmp(ib)))
        .map(|(id, _)| id)
        .ok_or_else(|| FuzzyError::NoOutput(agg.variable.clone()))
}
