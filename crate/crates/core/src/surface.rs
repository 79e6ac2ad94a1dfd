//! Response surfaces: one input held fixed, the other two swept over their
//! full universes on a uniform grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numfmt::{format_sig, round_sig};
use crate::{FisDefinition, InferenceError};

/// Step changes above `-MONOTONE_TOL` count as non-decreasing.
pub const MONOTONE_TOL: f64 = 1e-6;
pub const DEFAULT_STEPS: usize = 21;
/// Significant digits used by both export formats.
pub const EXPORT_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedInput {
    pub variable: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub variable: String,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    /// Uniform coordinates from `lo` to `hi` inclusive.
    pub fn coords(&self) -> Vec<f64> {
        let n = self.steps;
        if n < 2 {
            return vec![self.lo; n];
        }
        let step = (self.hi - self.lo) / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.hi } else { self.lo + i as f64 * step })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    NonDecreasing,
    NonIncreasing,
    /// Rises to a single interior peak, then falls.
    Unimodal,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStats {
    pub min: f64,
    pub max: f64,
    pub argmin: Cell,
    pub argmax: Cell,
    /// Verdict over every row (lines along the x axis).
    pub x_trend: Trend,
    /// Verdict over every column (lines along the y axis).
    pub y_trend: Trend,
}

/// Output values over the grid; `values[iy][ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub fixed: FixedInput,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub values: Vec<Vec<f64>>,
    pub stats: GridStats,
}

impl SurfaceGrid {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy][ix]
    }

    /// Line along x at row `iy`.
    pub fn row(&self, iy: usize) -> &[f64] {
        &self.values[iy]
    }

    /// Line along y at column `ix`.
    pub fn column(&self, ix: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[ix]).collect()
    }

    /// Copy with every number rounded to `digits` significant digits.
    pub fn rounded(&self, digits: usize) -> SurfaceGrid {
        let r = |v: f64| round_sig(v, digits);
        let axis = |a: &Axis| Axis {
            lo: r(a.lo),
            hi: r(a.hi),
            ..a.clone()
        };
        SurfaceGrid {
            fixed: FixedInput {
                variable: self.fixed.variable.clone(),
                value: r(self.fixed.value),
            },
            x_axis: axis(&self.x_axis),
            y_axis: axis(&self.y_axis),
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|&v| r(v)).collect())
                .collect(),
            stats: GridStats {
                min: r(self.stats.min),
                max: r(self.stats.max),
                ..self.stats.clone()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("need at least 2 steps per axis, got {0}")]
    TooFewSteps(usize),
    #[error("unknown input variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is used more than once")]
    DuplicateVariable(String),
    #[error("a sweep needs a system with exactly 3 inputs, this one has {0}")]
    InputCount(usize),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// Evaluates `fis` on a `steps x steps` grid over the full universes of `x`
/// and `y`, with `fixed` held constant.
pub fn sweep(
    fis: &FisDefinition,
    fixed: (&str, f64),
    x: &str,
    y: &str,
    steps: usize,
) -> Result<SurfaceGrid, SweepError> {
    if fis.inputs().len() != 3 {
        return Err(SweepError::InputCount(fis.inputs().len()));
    }
    if steps < 2 {
        return Err(SweepError::TooFewSteps(steps));
    }
    let (fixed_name, fixed_value) = fixed;
    let names = [fixed_name, x, y];
    let mut slots = [0usize; 3];
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(SweepError::DuplicateVariable(name.to_string()));
        }
        slots[i] = fis
            .input_index(name)
            .ok_or_else(|| SweepError::UnknownVariable(name.to_string()))?;
    }
    let fixed_var = &fis.inputs()[slots[0]];
    if !fixed_var.contains(fixed_value) {
        return Err(InferenceError::OutOfRange {
            variable: fixed_name.to_string(),
            value: fixed_value,
            lo: fixed_var.lo(),
            hi: fixed_var.hi(),
        }
        .into());
    }
    let axis = |slot: usize| {
        let var = &fis.inputs()[slot];
        Axis {
            variable: var.name().to_string(),
            lo: var.lo(),
            hi: var.hi(),
            steps,
        }
    };
    let x_axis = axis(slots[1]);
    let y_axis = axis(slots[2]);
    let xs = x_axis.coords();
    let ys = y_axis.coords();

    let values = ys
        .par_iter()
        .map(|&yv| {
            xs.iter()
                .map(|&xv| {
                    let mut input = [0.0; 3];
                    input[slots[0]] = fixed_value;
                    input[slots[1]] = xv;
                    input[slots[2]] = yv;
                    fis.infer(&input).map(|r| r.output)
                })
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let stats = grid_stats(&values);
    Ok(SurfaceGrid {
        fixed: FixedInput {
            variable: fixed_name.to_string(),
            value: fixed_value,
        },
        x_axis,
        y_axis,
        values,
        stats,
    })
}

pub fn is_non_decreasing(line: &[f64]) -> bool {
    line.windows(2).all(|w| w[1] - w[0] >= -MONOTONE_TOL)
}

pub fn is_non_increasing(line: &[f64]) -> bool {
    line.windows(2).all(|w| w[1] - w[0] <= MONOTONE_TOL)
}

/// Non-decreasing up to a single interior maximum, non-increasing after it,
/// with the peak strictly above both ends.
pub fn is_unimodal(line: &[f64]) -> bool {
    let n = line.len();
    if n < 3 {
        return false;
    }
    let peak = line
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > line[best] { i } else { best });
    peak > 0
        && peak < n - 1
        && line[peak] > line[0] + MONOTONE_TOL
        && line[peak] > line[n - 1] + MONOTONE_TOL
        && is_non_decreasing(&line[..=peak])
        && is_non_increasing(&line[peak..])
}

pub fn line_trend(line: &[f64]) -> Trend {
    lines_trend(std::iter::once(line))
}

fn lines_trend<'a, I>(lines: I) -> Trend
where
    I: IntoIterator<Item = &'a [f64]> + Clone,
{
    if lines.clone().into_iter().all(is_non_decreasing) {
        Trend::NonDecreasing
    } else if lines.clone().into_iter().all(is_non_increasing) {
        Trend::NonIncreasing
    } else if lines.into_iter().all(is_unimodal) {
        Trend::Unimodal
    } else {
        Trend::Mixed
    }
}

/// Extremes and per-axis trend verdicts of `values[iy][ix]`.
pub fn grid_stats(values: &[Vec<f64>]) -> GridStats {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut argmin = Cell { x: 0, y: 0 };
    let mut argmax = Cell { x: 0, y: 0 };
    for (y, row) in values.iter().enumerate() {
        for (x, &v) in row.iter().enumerate() {
            if v < min {
                min = v;
                argmin = Cell { x, y };
            }
            if v > max {
                max = v;
                argmax = Cell { x, y };
            }
        }
    }
    let width = values.first().map_or(0, Vec::len);
    let columns: Vec<Vec<f64>> = (0..width)
        .map(|x| values.iter().map(|row| row[x]).collect())
        .collect();
    GridStats {
        min,
        max,
        argmin,
        argmax,
        x_trend: lines_trend(values.iter().map(Vec::as_slice)),
        y_trend: lines_trend(columns.iter().map(Vec::as_slice)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// Serializes a grid.
///
/// CSV layout: a `fixed_var,fixed_value,x_var,y_var` header and its values,
/// then a line whose first cell is `y_var/x_var` followed by the x
/// coordinates, then one line per y coordinate (y value first). JSON is the
/// whole [`SurfaceGrid`]. All numbers carry 6 significant digits.
pub fn export_grid(grid: &SurfaceGrid, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Csv => export_csv(grid),
        ExportFormat::Json => {
            let mut out = serde_json::to_vec(&grid.rounded(EXPORT_DIGITS))
                .expect("grid serialization cannot fail");
            out.push(b'\n');
            out
        }
    }
}

fn export_csv(grid: &SurfaceGrid) -> Vec<u8> {
    let num = |v: f64| format_sig(v, EXPORT_DIGITS);
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    let io = "writing to memory cannot fail";
    w.write_record(["fixed_var", "fixed_value", "x_var", "y_var"]).expect(io);
    w.write_record([
        grid.fixed.variable.clone(),
        num(grid.fixed.value),
        grid.x_axis.variable.clone(),
        grid.y_axis.variable.clone(),
    ])
    .expect(io);
    let corner = format!("{}/{}", grid.y_axis.variable, grid.x_axis.variable);
    w.write_record(std::iter::once(corner).chain(grid.x_axis.coords().into_iter().map(num)))
        .expect(io);
    for (yv, row) in grid.y_axis.coords().into_iter().zip(&grid.values) {
        w.write_record(std::iter::once(num(yv)).chain(row.iter().map(|&v| num(v))))
            .expect(io);
    }
    w.into_inner().expect(io)
}

#[derive(Debug, Error)]
pub enum GridFormatError {
    #[error("invalid grid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("grid values are {rows} x {cols}, axes say {y_steps} x {x_steps}")]
    Shape {
        rows: usize,
        cols: usize,
        y_steps: usize,
        x_steps: usize,
    },
}

/// Reads a grid produced by [`export_grid`] in JSON form.
pub fn import_grid_json(bytes: &[u8]) -> Result<SurfaceGrid, GridFormatError> {
    let grid: SurfaceGrid = serde_json::from_slice(bytes)?;
    let rows = grid.values.len();
    let cols = grid.values.first().map_or(0, Vec::len);
    if rows != grid.y_axis.steps
        || grid.values.iter().any(|r| r.len() != grid.x_axis.steps)
    {
        return Err(GridFormatError::Shape {
            rows,
            cols,
            y_steps: grid.y_axis.steps,
            x_steps: grid.x_axis.steps,
        });
    }
    Ok(grid)
}
