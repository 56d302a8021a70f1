//! Membership-function algebra, fuzzification, Mamdani inference and
//! defuzzification.
//!
//! Everything here is a pure function over immutable values. Gaussian labels
//! are built from the two crisp bounds a caregiver would state ("near is 1 to
//! 5 dm"): the center is their midpoint and sigma is chosen so that both
//! bounds sit at exactly half membership.

mod inference;
mod membership;
mod variable;

pub use inference::{
    defuzzify_cog, infer, rule_strength, select_integer_output, singleton_activations,
    AggregatedOutput, Inference, InferenceOptions, RuleFiring, DEFAULT_GRID_POINTS,
};
pub use membership::{make_gaussian, make_triangular, MembershipFunction};
pub use variable::{
    Direction, Label, LabelAssignment, LinguisticVariable, Universe, ValueKind, DEFAULT_THRESHOLD,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FuzzyError {
    #[error("invalid bounds: lower {lower} must be below upper {upper}")]
    InvalidBounds { lower: f64, upper: f64 },
    #[error("invalid triangle ({a}, {b}, {c}): need a <= b <= c and a < c")]
    InvalidTriangle { a: f64, b: f64, c: f64 },
    #[error("invalid universe [{min}, {max}]")]
    InvalidUniverse { min: f64, max: f64 },
    #[error("variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },
    #[error("rule strength of an empty antecedent")]
    EmptyAntecedent,
    #[error("aggregate for `{0}` has no positive membership")]
    NoOutput(String),
    #[error("variable `{0}` is not an integer output")]
    NotInteger(String),
}
