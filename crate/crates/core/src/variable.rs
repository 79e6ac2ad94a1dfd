//! Linguistic variables: a named universe with an ordered family of labels.

use serde::{Deserialize, Serialize};

use crate::{FuzzyError, MembershipFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub name: String,
    pub mf: MembershipFunction,
}

impl Label {
    pub fn new(name: impl Into<String>, mf: MembershipFunction) -> Self {
        Self {
            name: name.into(),
            mf,
        }
    }
}

/// Names accepted for variables, labels and systems: ASCII letters, digits,
/// `_` and `-`, starting with a letter or `_`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinguisticVariable {
    name: String,
    range: (f64, f64),
    labels: Vec<Label>,
}

impl LinguisticVariable {
    /// Builds a variable whose labels cover every point of `[lo, hi]`.
    pub fn new(
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        labels: Vec<Label>,
    ) -> Result<Self, FuzzyError> {
        let var = Self::new_allowing_gaps(name, lo, hi, labels)?;
        if let Some(at) = var.first_uncovered_point() {
            return Err(FuzzyError::Uncovered {
                variable: var.name,
                at,
            });
        }
        Ok(var)
    }

    /// Same checks as [`LinguisticVariable::new`] except coverage, so that
    /// incomplete partitions can still be built and diagnosed.
    pub fn new_allowing_gaps(
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        labels: Vec<Label>,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(FuzzyError::InvalidName(name));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::EmptyUniverse { lo, hi });
        }
        if labels.is_empty() {
            return Err(FuzzyError::NoLabels { variable: name });
        }
        for (i, label) in labels.iter().enumerate() {
            if !is_identifier(&label.name) {
                return Err(FuzzyError::InvalidName(label.name.clone()));
            }
            if labels[..i].iter().any(|l| l.name == label.name) {
                return Err(FuzzyError::DuplicateLabel {
                    variable: name,
                    label: label.name.clone(),
                });
            }
            let (start, end) = label.mf.support();
            if start < lo || end > hi {
                return Err(FuzzyError::SupportOutsideUniverse {
                    variable: name,
                    label: label.name.clone(),
                    lo,
                    hi,
                });
            }
            if i > 0 && label.mf.peak() < labels[i - 1].mf.peak() {
                return Err(FuzzyError::LabelOrder {
                    variable: name,
                    label: label.name.clone(),
                });
            }
        }
        Ok(Self {
            name,
            range: (lo, hi),
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lo(&self) -> f64 {
        self.range.0
    }

    pub fn hi(&self) -> f64 {
        self.range.1
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.name == label)
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo()..=self.hi()).contains(&x)
    }

    /// Degrees of every label at `x`, in label order. No range check.
    pub fn degrees(&self, x: f64) -> Vec<f64> {
        self.labels.iter().map(|l| l.mf.eval(x)).collect()
    }

    pub fn is_covered(&self) -> bool {
        self.first_uncovered_point().is_none()
    }

    /// Exact coverage check over the union of the labels' positive sets.
    fn first_uncovered_point(&self) -> Option<f64> {
        let mut intervals: Vec<_> = self
            .labels
            .iter()
            .map(|l| l.mf.positive_interval())
            .collect();
        // Closed starts first so a shared start point is seen as covered.
        intervals.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.cmp(&p.1)));

        let (lo, hi) = self.range;
        let mut reach = lo;
        let mut reach_covered = false;
        for (start, start_closed, end, end_closed) in intervals {
            if start > reach || (start == reach && !reach_covered && !start_closed) {
                return Some(reach);
            }
            if end > reach {
                reach = end;
                reach_covered = end_closed;
            } else if end == reach {
                reach_covered |= end_closed;
            }
        }
        if reach < hi || (reach == hi && !reach_covered) {
            Some(reach)
        } else {
            None
        }
    }
}

/// Builds `n = label_names.len()` triangles with equally spaced peaks so that
/// the degrees sum to one everywhere (a Ruspini partition). The two end labels
/// are half-triangles clamped at the universe bounds.
pub fn make_symmetric_partition(
    name: impl Into<String>,
    lo: f64,
    hi: f64,
    label_names: &[&str],
) -> Result<LinguisticVariable, FuzzyError> {
    let n = label_names.len();
    if n < 2 {
        return Err(FuzzyError::TooFewLabels { count: n });
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(FuzzyError::EmptyUniverse { lo, hi });
    }
    let step = (hi - lo) / (n - 1) as f64;
    let peaks: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect();
    let labels = label_names
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let a = peaks[i.saturating_sub(1)];
            let c = peaks[(i + 1).min(n - 1)];
            Ok(Label::new(
                *label,
                MembershipFunction::triangular(a, peaks[i], c)?,
            ))
        })
        .collect::<Result<Vec<_>, FuzzyError>>()?;
    LinguisticVariable::new(name, lo, hi, labels)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub samples: usize,
    /// Minimum over sample points of the largest label degree.
    pub min_max_degree: f64,
    /// Sample points where no label has positive degree.
    pub uncovered: Vec<f64>,
    /// Largest `|sum of degrees - 1|` over the samples.
    pub ruspini_deviation: f64,
}

impl CoverageReport {
    pub fn is_covered(&self) -> bool {
        self.uncovered.is_empty()
    }

    pub fn is_ruspini(&self, tol: f64) -> bool {
        self.ruspini_deviation <= tol
    }
}

/// Samples the universe uniformly and reports coverage and partition-of-unity
/// diagnostics. `samples` below 2 is treated as 2.
pub fn check_coverage(var: &LinguisticVariable, samples: usize) -> CoverageReport {
    let samples = samples.max(2);
    let (lo, hi) = var.range;
    let step = (hi - lo) / (samples - 1) as f64;
    let mut min_max_degree = f64::INFINITY;
    let mut uncovered = Vec::new();
    let mut ruspini_deviation = 0.0f64;
    for i in 0..samples {
        let x = if i == samples - 1 {
            hi
        } else {
            lo + i as f64 * step
        };
        let degrees = var.degrees(x);
        let max = degrees.iter().copied().fold(0.0, f64::max);
        let sum: f64 = degrees.iter().sum();
        min_max_degree = min_max_degree.min(max);
        if max <= 0.0 {
            uncovered.push(x);
        }
        ruspini_deviation = ruspini_deviation.max((sum - 1.0).abs());
    }
    CoverageReport {
        samples,
        min_max_degree,
        uncovered,
        ruspini_deviation,
    }
}
