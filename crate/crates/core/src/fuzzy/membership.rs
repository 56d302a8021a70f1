use serde::{Deserialize, Serialize};

use super::FuzzyError;

/// `2·sqrt(2·ln 2)`: the full width at half maximum of a unit-sigma Gaussian.
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Shape of a single linguistic label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum MembershipFunction {
    /// Bell curve whose half-maximum points sit exactly at `lower` and `upper`.
    Gaussian {
        lower: f64,
        upper: f64,
        center: f64,
        sigma: f64,
    },
    Triangular {
        a: f64,
        b: f64,
        c: f64,
    },
    Singleton {
        value: f64,
    },
}

/// Builds the Gaussian label spanning `[lower, upper]` at half maximum.
pub fn make_gaussian(lower: f64, upper: f64) -> Result<MembershipFunction, FuzzyError> {
    if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
        return Err(FuzzyError::InvalidBounds { lower, upper });
    }
    Ok(MembershipFunction::Gaussian {
        lower,
        upper,
        center: (lower + upper) / 2.0,
        sigma: (upper - lower) / FWHM_PER_SIGMA,
    })
}

pub fn make_triangular(a: f64, b: f64, c: f64) -> Result<MembershipFunction, FuzzyError> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) || a > b || b > c || a == c {
        return Err(FuzzyError::InvalidTriangle { a, b, c });
    }
    Ok(MembershipFunction::Triangular { a, b, c })
}

impl MembershipFunction {
    /// Degree of membership of a crisp value, always in `[0, 1]`.
    ///
    /// A singleton is 1 only at its exact value; on a discretized universe
    /// use [`MembershipFunction::sample`] instead.
    pub fn degree(&self, x: f64) -> f64 {
        match *self {
            MembershipFunction::Gaussian { center, sigma, .. } => {
                let z = (x - center) / sigma;
                (-0.5 * z * z).exp()
            }
            MembershipFunction::Triangular { a, b, c } => {
                if x < a || x > c {
                    0.0
                } else if x == b {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (c - x) / (c - b)
                }
            }
            MembershipFunction::Singleton { value } => {
                if x == value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Representative point of the label: the Gaussian center, the triangle
    /// apex, or the singleton value.
    pub fn center(&self) -> f64 {
        match *self {
            MembershipFunction::Gaussian { center, .. } => center,
            MembershipFunction::Triangular { b, .. } => b,
            MembershipFunction::Singleton { value } => value,
        }
    }

    /// Interval outside of which the degree is (numerically) zero.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            // exp(-0.5 z^2) < 1e-12 beyond |z| ~ 7.4
            MembershipFunction::Gaussian { center, sigma, .. } => {
                (center - 7.5 * sigma, center + 7.5 * sigma)
            }
            MembershipFunction::Triangular { a, c, .. } => (a, c),
            MembershipFunction::Singleton { value } => (value, value),
        }
    }

    /// Evaluates the function on a grid. Singletons put their full mass on
    /// the grid point nearest to their value.
    pub fn sample(&self, grid: &[f64]) -> Vec<f64> {
        match *self {
            MembershipFunction::Singleton { value } => {
                let mut out = vec![0.0; grid.len()];
                if let Some(i) = nearest_index(grid, value) {
                    out[i] = 1.0;
                }
                out
            }
            _ => grid.iter().map(|&x| self.degree(x)).collect(),
        }
    }
}

pub(crate) fn nearest_index(grid: &[f64], x: f64) -> Option<usize> {
    grid.iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (*a - x).abs().total_cmp(&(*b - x).abs()))
        .map(|(i, _)| i)
}
