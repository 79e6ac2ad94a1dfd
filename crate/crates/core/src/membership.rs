//! Piecewise-linear membership functions.

use serde::{Deserialize, Serialize};

use crate::FuzzyError;

/// A triangular or trapezoidal fuzzy set over a real universe.
///
/// Breakpoints are stored in variable units and are always finite and
/// non-decreasing. Degenerate shapes are legal: `a == b` (or `c == d`) gives a
/// one-sided ramp and a zero-width triangle is 1 at its single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum MembershipFunction {
    #[serde(rename = "tri")]
    Triangular([f64; 3]),
    #[serde(rename = "trap")]
    Trapezoidal([f64; 4]),
}

fn check_breakpoints(params: &[f64]) -> Result<(), FuzzyError> {
    let finite = params.iter().all(|p| p.is_finite());
    let sorted = params.windows(2).all(|w| w[0] <= w[1]);
    if finite && sorted {
        Ok(())
    } else {
        Err(FuzzyError::InvalidBreakpoints {
            params: params.to_vec(),
        })
    }
}

impl MembershipFunction {
    pub fn triangular(a: f64, b: f64, c: f64) -> Result<Self, FuzzyError> {
        check_breakpoints(&[a, b, c])?;
        Ok(Self::Triangular([a, b, c]))
    }

    pub fn trapezoidal(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        check_breakpoints(&[a, b, c, d])?;
        Ok(Self::Trapezoidal([a, b, c, d]))
    }

    /// Membership degree of `x`, always in `[0, 1]`.
    ///
    /// Points outside the support evaluate to 0 and breakpoints are exact.
    pub fn eval(&self, x: f64) -> f64 {
        let (a, b, c, d) = self.corners();
        let degree = if !(a..=d).contains(&x) {
            0.0
        } else if (b..=c).contains(&x) {
            1.0
        } else if x < b {
            (x - a) / (b - a)
        } else {
            (d - x) / (d - c)
        };
        degree.clamp(0.0, 1.0)
    }

    /// Breakpoints in order, 3 for triangles and 4 for trapezoids.
    pub fn params(&self) -> &[f64] {
        match self {
            Self::Triangular(p) => p,
            Self::Trapezoidal(p) => p,
        }
    }

    /// `(support start, core start, core end, support end)`.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        match *self {
            Self::Triangular([a, b, c]) => (a, b, b, c),
            Self::Trapezoidal([a, b, c, d]) => (a, b, c, d),
        }
    }

    /// Closed hull of the points with positive degree.
    pub fn support(&self) -> (f64, f64) {
        let (a, _, _, d) = self.corners();
        (a, d)
    }

    /// Center of the core (the apex for triangles).
    pub fn peak(&self) -> f64 {
        let (_, b, c, _) = self.corners();
        0.5 * (b + c)
    }

    /// Returns `(start, start_closed, end, end_closed)` describing exactly the
    /// set of points with positive degree.
    pub(crate) fn positive_interval(&self) -> (f64, bool, f64, bool) {
        let (a, b, c, d) = self.corners();
        (a, a == b, d, c == d)
    }

    pub(crate) fn keyword(&self) -> &'static str {
        match self {
            Self::Triangular(_) => "tri",
            Self::Trapezoidal(_) => "trap",
        }
    }
}
