//! Calibration anchors for the bundled permanence models.
//!
//! Each anchor pins one published observation about the model's response
//! surfaces to a measured number and a pass/fail verdict. Re-run
//! [`check_calibration`] after editing a rule table.

use std::fmt;

use serde::Serialize;

use crate::numfmt::format_sig;
use crate::permanence::{rule_table, RuleTable, DIVERS, GEN, INPUTS, NPV};
use crate::surface::{sweep, SurfaceGrid, DEFAULT_STEPS, MONOTONE_TOL};
use crate::{check_coverage, PermanenceInput, PermanenceModels, Scenario};

/// Representative fixed values (low, medium, high) per input.
pub fn fixed_values(variable: &str) -> [f64; 3] {
    match variable {
        NPV => [0.0, 10e6, 20e6],
        GEN => [0.0, 15.0, 30.0],
        DIVERS => [0.0, 2.5, 5.0],
        _ => panic!("not a permanence input: {variable}"),
    }
}

/// The two swept axes when `fixed` is held, in (x, y) order.
pub fn sweep_axes(fixed: &str) -> (&'static str, &'static str) {
    match fixed {
        NPV => (GEN, DIVERS),
        GEN => (NPV, DIVERS),
        DIVERS => (NPV, GEN),
        _ => panic!("not a permanence input: {fixed}"),
    }
}

pub const WORKED_EXAMPLE: PermanenceInput = PermanenceInput {
    npv: 20e6,
    gen: 18.0,
    divers: 4.0,
};
pub const WORKED_EXAMPLE_TARGET: f64 = 71.4;
pub const WORKED_EXAMPLE_TOL: f64 = 5.0;
/// NPV from which the stable incentive stays at or above 50%.
pub const HALF_INCENTIVE_NPV: f64 = 2e7;
pub const RUSPINI_TOL: f64 = 1e-9;
pub const COVERAGE_SAMPLES: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Between { lo: f64, hi: f64 },
    AtLeast { min: f64 },
    AtMost { max: f64 },
    Below { limit: f64 },
    Above { limit: f64 },
}

impl Target {
    pub fn accepts(self, v: f64) -> bool {
        match self {
            Target::Between { lo, hi } => (lo..=hi).contains(&v),
            Target::AtLeast { min } => v >= min,
            Target::AtMost { max } => v <= max,
            Target::Below { limit } => v < limit,
            Target::Above { limit } => v > limit,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Target::Between { lo, hi } => write!(f, "in [{lo}, {hi}]"),
            Target::AtLeast { min } => write!(f, ">= {min}"),
            Target::AtMost { max } => write!(f, "<= {max}"),
            Target::Below { limit } => write!(f, "< {limit}"),
            Target::Above { limit } => write!(f, "> {limit}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Anchor {
    pub id: String,
    pub description: String,
    pub target: Target,
    pub measured: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub anchors: Vec<Anchor>,
}

impl CalibrationReport {
    pub fn all_passed(&self) -> bool {
        self.anchors.iter().all(|a| a.passed)
    }

    pub fn get(&self, id: &str) -> Option<&Anchor> {
        self.anchors.iter().find(|a| a.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Anchor> {
        self.anchors.iter().filter(|a| !a.passed)
    }
}

impl fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.anchors.iter().map(|a| a.id.len()).max().unwrap_or(0);
        for a in &self.anchors {
            writeln!(
                f,
                "{} {:width$}  measured {:<12} target {:<14} {}",
                if a.passed { "PASS" } else { "FAIL" },
                a.id,
                format_sig(a.measured, 6),
                a.target.to_string(),
                a.description,
            )?;
        }
        let failed = self.failures().count();
        write!(f, "{} of {} anchors passed", self.anchors.len() - failed, self.anchors.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproductionGrid {
    pub scenario: Scenario,
    pub grid: SurfaceGrid,
}

/// Every (scenario, fixed input, fixed value) surface: 2 x 3 x 3 grids.
pub fn reproduction_grids(models: &PermanenceModels, steps: usize) -> Vec<ReproductionGrid> {
    let mut out = Vec::with_capacity(18);
    for scenario in Scenario::ALL {
        for fixed in INPUTS {
            for value in fixed_values(fixed) {
                out.push(ReproductionGrid {
                    scenario,
                    grid: surface(models, scenario, fixed, value, steps),
                });
            }
        }
    }
    out
}

fn surface(
    models: &PermanenceModels,
    scenario: Scenario,
    fixed: &str,
    value: f64,
    steps: usize,
) -> SurfaceGrid {
    let (x, y) = sweep_axes(fixed);
    sweep(models.system(scenario), (fixed, value), x, y, steps)
        .expect("shape-checked permanence systems sweep over their own universes")
}

/// Smallest step change along x over every row.
pub fn min_step_x(grid: &SurfaceGrid) -> f64 {
    grid.values
        .iter()
        .flat_map(|row| row.windows(2).map(|w| w[1] - w[0]))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest step change along y over every column.
pub fn min_step_y(grid: &SurfaceGrid) -> f64 {
    grid.values
        .windows(2)
        .flat_map(|rows| rows[0].iter().zip(&rows[1]).map(|(a, b)| b - a))
        .fold(f64::INFINITY, f64::min)
}

struct Builder {
    anchors: Vec<Anchor>,
}

impl Builder {
    fn push(&mut self, id: impl Into<String>, description: impl Into<String>, target: Target, measured: f64) {
        self.anchors.push(Anchor {
            id: id.into(),
            description: description.into(),
            target,
            measured,
            passed: target.accepts(measured),
        });
    }
}

fn min_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::INFINITY, f64::min)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Count of table cells breaking the stable-table orderings: non-decreasing
/// in NPV and in DIVERS everywhere, and in GEN at high NPV.
pub fn stable_table_violations(t: &RuleTable) -> usize {
    let mut bad = 0;
    for n in 0..3 {
        for g in 0..3 {
            for d in 0..3 {
                let v = t[n][g][d];
                if n < 2 && t[n + 1][g][d] < v {
                    bad += 1;
                }
                if d < 2 && t[n][g][d + 1] < v {
                    bad += 1;
                }
                if n == 2 && g < 2 && t[n][g + 1][d] < v {
                    bad += 1;
                }
            }
        }
    }
    bad
}

/// Count of cells where the growth consequent sits below the stable one.
pub fn dominance_violations(stable: &RuleTable, growth: &RuleTable) -> usize {
    stable
        .iter()
        .flatten()
        .flatten()
        .zip(growth.iter().flatten().flatten())
        .filter(|(s, g)| g < s)
        .count()
}

/// Runs every anchor against `models`.
pub fn check_calibration(models: &PermanenceModels) -> CalibrationReport {
    let mut b = Builder { anchors: Vec::new() };
    let steps = DEFAULT_STEPS;

    let worked = models
        .evaluate(Scenario::Stable, WORKED_EXAMPLE)
        .map_or(f64::NAN, |r| r.output);
    b.push(
        "worked_example",
        "stable incentive at NPV 20e6, GEN 18, DIVERS 4 (target 71.4)",
        Target::Between {
            lo: WORKED_EXAMPLE_TARGET - WORKED_EXAMPLE_TOL,
            hi: WORKED_EXAMPLE_TARGET + WORKED_EXAMPLE_TOL,
        },
        worked,
    );

    let g = surface(models, Scenario::Stable, NPV, 20e6, steps);
    b.push("stable_npv_high.min", "stable, NPV 20e6: floor around 60", Target::Between { lo: 55.0, hi: 65.0 }, g.stats.min);
    b.push("stable_npv_high.max", "stable, NPV 20e6: ceiling around 85", Target::Between { lo: 80.0, hi: 90.0 }, g.stats.max);
    b.push(
        "stable_npv_high.monotone_gen",
        "stable, NPV 20e6: smallest step along GEN",
        Target::AtLeast { min: -MONOTONE_TOL },
        min_step_x(&g),
    );
    b.push(
        "stable_npv_high.monotone_divers",
        "stable, NPV 20e6: smallest step along DIVERS",
        Target::AtLeast { min: -MONOTONE_TOL },
        min_step_y(&g),
    );

    let g = surface(models, Scenario::Stable, DIVERS, 2.5, steps);
    let npv_coords = g.x_axis.coords();
    let above = g
        .values
        .iter()
        .flat_map(|row| row.iter().zip(&npv_coords).filter(|(_, &x)| x >= HALF_INCENTIVE_NPV).map(|(&v, _)| v));
    let at_threshold = g.y_axis.coords().into_iter().map(|gen| {
        models
            .evaluate(Scenario::Stable, PermanenceInput::new(HALF_INCENTIVE_NPV, gen, 2.5))
            .map_or(f64::NAN, |r| r.output)
    });
    b.push(
        "stable_divers_mid.half_threshold",
        "stable, DIVERS 2.5: lowest incentive with NPV >= 2e7",
        Target::AtLeast { min: 50.0 },
        min_of(above.chain(at_threshold)),
    );
    b.push("stable_divers_mid.max", "stable, DIVERS 2.5: peak around 70", Target::Between { lo: 65.0, hi: 76.0 }, g.stats.max);

    let g = surface(models, Scenario::Stable, NPV, 0.0, steps);
    b.push("stable_npv_low.max", "stable, NPV 0: hardly reaches 30", Target::AtMost { max: 32.0 }, g.stats.max);
    b.push(
        "stable_npv_low.monotone_divers",
        "stable, NPV 0: smallest step along DIVERS on any GEN line",
        Target::AtLeast { min: -MONOTONE_TOL },
        min_step_y(&g),
    );
    let last = g.values.len() - 1;
    let gain = |ix: usize| g.values[last][ix] - g.values[0][ix];
    b.push(
        "stable_npv_low.divers_gain",
        "stable, NPV 0: DIVERS gain at GEN 0 minus gain at GEN 30",
        Target::AtLeast { min: -MONOTONE_TOL },
        gain(0) - gain(g.x_axis.steps - 1),
    );

    let g = surface(models, Scenario::Growth, NPV, 10e6, steps);
    b.push("growth_npv_mid.max", "growth, NPV 10e6: peak around 70", Target::Between { lo: 65.0, hi: 76.0 }, g.stats.max);
    let low_divers = g
        .values
        .iter()
        .zip(g.y_axis.coords())
        .filter(|(_, d)| *d <= 1.25)
        .flat_map(|(row, _)| row.iter().copied());
    b.push(
        "growth_npv_mid.low_divers_cap",
        "growth, NPV 10e6: highest incentive with DIVERS <= 1.25",
        Target::Below { limit: 50.0 },
        max_of(low_divers),
    );
    let line = g.row(g.y_axis.steps - 1);
    let peak_margin = if crate::surface::is_unimodal(line) {
        let top = max_of(line.iter().copied());
        (top - line[0]).min(top - line[line.len() - 1])
    } else {
        0.0
    };
    b.push(
        "growth_npv_mid.unimodal_gen",
        "growth, NPV 10e6, DIVERS 5: interior GEN peak height over the ends (0 if not unimodal)",
        Target::Above { limit: 0.0 },
        peak_margin,
    );

    let g = surface(models, Scenario::Growth, NPV, 20e6, steps);
    b.push("growth_npv_high.min", "growth, NPV 20e6: floor around 70", Target::Between { lo: 66.0, hi: 76.0 }, g.stats.min);
    b.push("growth_npv_high.max", "growth, NPV 20e6: ceiling above 93", Target::AtLeast { min: 93.0 }, g.stats.max);

    let mut dominance = f64::INFINITY;
    for fixed in INPUTS {
        for value in fixed_values(fixed) {
            let s = surface(models, Scenario::Stable, fixed, value, steps);
            let gr = surface(models, Scenario::Growth, fixed, value, steps);
            for (rs, rg) in s.values.iter().zip(&gr.values) {
                for (a, c) in rs.iter().zip(rg) {
                    dominance = dominance.min(c - a);
                }
            }
        }
    }
    b.push(
        "growth_dominance",
        "growth minus stable, lowest over the 9 shared grids",
        Target::AtLeast { min: -MONOTONE_TOL },
        dominance,
    );

    for scenario in Scenario::ALL {
        let fis = models.system(scenario);
        for var in fis.inputs().iter().chain(std::iter::once(fis.output())) {
            let report = check_coverage(var, COVERAGE_SAMPLES);
            let measured = if report.is_covered() {
                report.ruspini_deviation
            } else {
                f64::INFINITY
            };
            b.push(
                format!("coverage.{scenario}.{}", var.name()),
                format!("{scenario} {}: covered, largest |sum of degrees - 1|", var.name()),
                Target::AtMost { max: RUSPINI_TOL },
                measured,
            );
        }
    }

    let tables = Scenario::ALL.map(|s| rule_table(models.system(s)));
    for (scenario, table) in Scenario::ALL.iter().zip(&tables) {
        b.push(
            format!("table.{scenario}.complete"),
            format!("{scenario}: 27 AND rules, one per antecedent cell (1 = yes)"),
            Target::AtLeast { min: 1.0 },
            if table.is_ok() { 1.0 } else { 0.0 },
        );
    }
    if let [Ok(stable), Ok(growth)] = &tables {
        b.push(
            "table.stable.ordered",
            "stable table cells out of order in NPV, DIVERS, or GEN at high NPV",
            Target::AtMost { max: 0.0 },
            stable_table_violations(stable) as f64,
        );
        b.push(
            "table.growth_dominates",
            "table cells where growth is below stable",
            Target::AtMost { max: 0.0 },
            dominance_violations(stable, growth) as f64,
        );
    }

    CalibrationReport { anchors: b.anchors }
}
