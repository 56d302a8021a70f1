use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::membership::MembershipFunction;
use super::FuzzyError;

/// Default gate for [`LinguisticVariable::classify`] and rule activation.
pub const DEFAULT_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Linguistic,
    Boolean,
    Integer,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Input => "input",
            Direction::Output => "output",
        })
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Linguistic => "linguistic",
            ValueKind::Boolean => "boolean",
            ValueKind::Integer => "integer",
        })
    }
}

/// Closed interval a variable ranges over, with its unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Universe {
    pub min: f64,
    pub max: f64,
    pub unit: String,
}

impl Universe {
    pub fn new(min: f64, max: f64, unit: impl Into<String>) -> Result<Self, FuzzyError> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(FuzzyError::InvalidUniverse { min, max });
        }
        Ok(Universe {
            min,
            max,
            unit: unit.into(),
        })
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }

    /// `n` evenly spaced points from `min` to `max` inclusive.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let span = self.max - self.min;
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.max
                } else {
                    self.min + span * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub name: String,
    pub mf: MembershipFunction,
}

/// A named fuzzy quantity with ordered labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    pub name: String,
    pub direction: Direction,
    pub kind: ValueKind,
    pub universe: Universe,
    pub labels: Vec<Label>,
}

/// Degree of each label of one variable for one crisp value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelAssignment {
    pub degrees: BTreeMap<String, f64>,
}

impl LabelAssignment {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.degrees.get(label).copied()
    }
}

impl LinguisticVariable {
    pub fn new(
        name: impl Into<String>,
        direction: Direction,
        kind: ValueKind,
        universe: Universe,
        labels: Vec<Label>,
    ) -> Result<Self, FuzzyError> {
        let var = LinguisticVariable {
            name: name.into(),
            direction,
            kind,
            universe,
            labels,
        };
        var.check()?;
        Ok(var)
    }

    /// Structural invariants: unique labels, supports touching the universe,
    /// booleans are a yes/no triangle pair, integers are all singletons.
    pub fn check(&self) -> Result<(), FuzzyError> {
        let err = |reason: String| FuzzyError::InvalidVariable {
            name: self.name.clone(),
            reason,
        };
        if self.labels.is_empty() {
            return Err(err("no labels".into()));
        }
        for (i, label) in self.labels.iter().enumerate() {
            if self.labels[..i].iter().any(|l| l.name == label.name) {
                return Err(err(format!("duplicate label `{}`", label.name)));
            }
            let (lo, hi) = label.mf.support();
            if hi < self.universe.min || lo > self.universe.max {
                return Err(err(format!(
                    "label `{}` lies outside the universe",
                    label.name
                )));
            }
        }
        match self.kind {
            ValueKind::Boolean => {
                let mut names: Vec<&str> = self.labels.iter().map(|l| l.name.as_str()).collect();
                names.sort_unstable();
                if names != ["no", "yes"] {
                    return Err(err("boolean variables need exactly `yes` and `no`".into()));
                }
                if self
                    .labels
                    .iter()
                    .any(|l| !matches!(l.mf, MembershipFunction::Triangular { .. }))
                {
                    return Err(err("boolean labels must be triangular".into()));
                }
            }
            ValueKind::Integer => {
                if self
                    .labels
                    .iter()
                    .any(|l| !matches!(l.mf, MembershipFunction::Singleton { .. }))
                {
                    return Err(err("integer variables take only singleton labels".into()));
                }
            }
            ValueKind::Linguistic => {}
        }
        Ok(())
    }

    pub fn label(&self, name: &str) -> Option<&Label> {
        self.labels.iter().find(|l| l.name == name)
    }

    /// Label whose singleton value equals `id`, for integer variables.
    pub fn singleton(&self, id: i64) -> Option<&Label> {
        self.labels
            .iter()
            .find(|l| matches!(l.mf, MembershipFunction::Singleton { value } if value == id as f64))
    }

    /// Degree of every label at `x`, after clamping `x` into the universe.
    pub fn fuzzify(&self, x: f64) -> LabelAssignment {
        let x = self.universe.clamp(x);
        LabelAssignment {
            degrees: self
                .labels
                .iter()
                .map(|l| (l.name.clone(), l.mf.degree(x)))
                .collect(),
        }
    }

    /// Degree of one label at `x` (clamped).
    pub fn degree(&self, label: &str, x: f64) -> Option<f64> {
        self.label(label)
            .map(|l| l.mf.degree(self.universe.clamp(x)))
    }

    /// Most plausible label for `x`, or `None` when no label reaches
    /// `threshold`. Ties go to the label with the smaller center.
    pub fn classify(&self, x: f64, threshold: f64) -> Option<&str> {
        self.ranked(x)
            .first()
            .filter(|(_, d)| *d >= threshold)
            .map(|(l, _)| l.name.as_str())
    }

    /// Like [`classify`](Self::classify), but an exact tie between the two
    /// best labels counts as unclassifiable.
    pub fn classify_strict(&self, x: f64, threshold: f64) -> Option<&str> {
        let ranked = self.ranked(x);
        match ranked.as_slice() {
            [(_, d), (_, d2), ..] if (d - d2).abs() <= 1e-12 => None,
            [(best, d), ..] if *d >= threshold => Some(best.name.as_str()),
            _ => None,
        }
    }

    fn ranked(&self, x: f64) -> Vec<(&Label, f64)> {
        let x = self.universe.clamp(x);
        let mut ranked: Vec<(&Label, f64)> =
            self.labels.iter().map(|l| (l, l.mf.degree(x))).collect();
        ranked.sort_by(|(la, da), (lb, db)| {
            db.total_cmp(da)
                .then(la.mf.center().total_cmp(&lb.mf.center()))
        });
        ranked
    }
}
