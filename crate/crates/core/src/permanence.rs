//! The generics-lab permanence model: expected NPV, portfolio size (GEN) and
//! diversification (DIVERS) mapped to an incentive to remain (PERM-INCENT),
//! with one rule base per market scenario.
//!
//! The two systems are read from `permanence_stable.fis` and
//! `permanence_growth.fis` in the models directory, so rule tables can be
//! recalibrated without rebuilding. The directory defaults to the workspace
//! `models/` folder and can be overridden with `PERMADSS_MODELS_DIR`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::Connective;
use crate::{
    parse_fis, Clause, DefinitionError, FisDefinition, FuzzyRule, InferenceError, InferenceResult,
    ParseError,
};

pub const NPV: &str = "NPV";
pub const GEN: &str = "GEN";
pub const DIVERS: &str = "DIVERS";
pub const PERM_INCENT: &str = "PERM-INCENT";
/// Input variables in the order every bundled system declares them.
pub const INPUTS: [&str; 3] = [NPV, GEN, DIVERS];

pub const MODELS_DIR_ENV: &str = "PERMADSS_MODELS_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Stable,
    Growth,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::Stable, Scenario::Growth];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Stable => "stable",
            Scenario::Growth => "growth",
        }
    }

    pub fn file_name(self) -> String {
        format!("permanence_{}.fis", self.as_str())
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stable" => Ok(Scenario::Stable),
            "growth" => Ok(Scenario::Growth),
            other => Err(ModelError::UnknownScenario(other.to_string())),
        }
    }
}

/// Crisp inputs: expected NPV in euros, number of generics in the portfolio
/// and a 0-5 diversification score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermanenceInput {
    pub npv: f64,
    pub gen: f64,
    pub divers: f64,
}

impl PermanenceInput {
    pub fn new(npv: f64, gen: f64, divers: f64) -> Self {
        Self { npv, gen, divers }
    }

    /// Values in [`INPUTS`] order.
    pub fn values(&self) -> [f64; 3] {
        [self.npv, self.gen, self.divers]
    }

    fn from_values([npv, gen, divers]: [f64; 3]) -> Self {
        Self { npv, gen, divers }
    }
}

/// Field name of a [`PermanenceInput`] for a model variable name.
pub fn field_for_variable(variable: &str) -> &'static str {
    match variable {
        NPV => "npv",
        GEN => "gen",
        DIVERS => "divers",
        _ => "input",
    }
}

/// Dated cash flows `(period, amount)` discounted at a per-period rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CashFlowSchedule {
    pub flows: Vec<(u32, f64)>,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NpvError {
    #[error("discount rate {0} must be finite and greater than -1")]
    InvalidRate(f64),
    #[error("cash flow at period {period} is not finite")]
    NonFiniteFlow { period: u32 },
}

/// Net present value: sum over flows of `amount / (1 + rate)^period`.
pub fn npv(schedule: &CashFlowSchedule) -> Result<f64, NpvError> {
    let rate = schedule.rate;
    if !(rate.is_finite() && rate > -1.0) {
        return Err(NpvError::InvalidRate(rate));
    }
    let base = 1.0 + rate;
    schedule
        .flows
        .iter()
        .map(|&(period, amount)| {
            if !amount.is_finite() {
                return Err(NpvError::NonFiniteFlow { period });
            }
            let factor = match i32::try_from(period) {
                Ok(t) => base.powi(t),
                Err(_) => base.powf(period as f64),
            };
            Ok(amount / factor)
        })
        .sum()
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{scenario} model: {message}")]
    Shape { scenario: Scenario, message: String },
    #[error("unknown scenario `{0}` (expected stable or growth)")]
    UnknownScenario(String),
    #[error("{field} = {value} is outside the {variable} range [{lo}, {hi}]")]
    OutOfRange {
        field: &'static str,
        variable: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error(transparent)]
    Inference(InferenceError),
}

impl From<InferenceError> for ModelError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::OutOfRange {
                variable,
                value,
                lo,
                hi,
            } => ModelError::OutOfRange {
                field: field_for_variable(&variable),
                variable,
                value,
                lo,
                hi,
            },
            other => ModelError::Inference(other),
        }
    }
}

/// Directory holding the bundled `.fis` files.
pub fn models_dir() -> PathBuf {
    match std::env::var_os(MODELS_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models"),
    }
}

fn load_system(dir: &Path, scenario: Scenario) -> Result<FisDefinition, ModelError> {
    let path = dir.join(scenario.file_name());
    let text = std::fs::read_to_string(&path).map_err(|source| ModelError::Io {
        path: path.clone(),
        source,
    })?;
    let fis = parse_fis(&text).map_err(|source| ModelError::Parse { path, source })?;
    check_shape(scenario, &fis)?;
    Ok(fis)
}

fn check_shape(scenario: Scenario, fis: &FisDefinition) -> Result<(), ModelError> {
    let names: Vec<&str> = fis.inputs().iter().map(|v| v.name()).collect();
    if names != INPUTS {
        return Err(ModelError::Shape {
            scenario,
            message: format!("inputs must be {INPUTS:?}, found {names:?}"),
        });
    }
    if fis.output().name() != PERM_INCENT {
        return Err(ModelError::Shape {
            scenario,
            message: format!("output must be {PERM_INCENT}, found {}", fis.output().name()),
        });
    }
    Ok(())
}

/// Reads the scenario's system from the models directory.
pub fn build_permanence_fis(scenario: Scenario) -> Result<FisDefinition, ModelError> {
    load_system(&models_dir(), scenario)
}

/// Both scenario systems, loaded once and shared read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct PermanenceModels {
    stable: FisDefinition,
    growth: FisDefinition,
}

impl PermanenceModels {
    pub fn load(dir: &Path) -> Result<Self, ModelError> {
        Ok(Self {
            stable: load_system(dir, Scenario::Stable)?,
            growth: load_system(dir, Scenario::Growth)?,
        })
    }

    pub fn load_default() -> Result<Self, ModelError> {
        Self::load(&models_dir())
    }

    /// Wraps already-built systems, checking they have the expected
    /// variables.
    pub fn from_systems(stable: FisDefinition, growth: FisDefinition) -> Result<Self, ModelError> {
        check_shape(Scenario::Stable, &stable)?;
        check_shape(Scenario::Growth, &growth)?;
        Ok(Self { stable, growth })
    }

    pub fn system(&self, scenario: Scenario) -> &FisDefinition {
        match scenario {
            Scenario::Stable => &self.stable,
            Scenario::Growth => &self.growth,
        }
    }

    /// Incentive to remain, in percent, with the full inference trace.
    pub fn evaluate(
        &self,
        scenario: Scenario,
        input: PermanenceInput,
    ) -> Result<InferenceResult, ModelError> {
        Ok(self.system(scenario).infer(&input.values())?)
    }

    /// Snaps every field into its variable's universe.
    pub fn clamp(&self, scenario: Scenario, input: PermanenceInput) -> PermanenceInput {
        let fis = self.system(scenario);
        let mut values = input.values();
        for (v, var) in values.iter_mut().zip(fis.inputs()) {
            *v = if v.is_nan() {
                var.lo()
            } else {
                v.clamp(var.lo(), var.hi())
            };
        }
        PermanenceInput::from_values(values)
    }
}

static DEFAULT_MODELS: OnceLock<PermanenceModels> = OnceLock::new();

/// The models from [`models_dir`], loaded on first use.
pub fn default_models() -> Result<&'static PermanenceModels, ModelError> {
    if let Some(models) = DEFAULT_MODELS.get() {
        return Ok(models);
    }
    let models = PermanenceModels::load_default()?;
    Ok(DEFAULT_MODELS.get_or_init(|| models))
}

pub fn evaluate_permanence(
    scenario: Scenario,
    input: PermanenceInput,
) -> Result<InferenceResult, ModelError> {
    default_models()?.evaluate(scenario, input)
}

/// Consequent label numbers (1-based output label position) indexed by
/// `[npv][gen][divers]` label position.
pub type RuleTable = [[[usize; 3]; 3]; 3];

/// Extracts the complete 27-cell table of a permanence system. Fails unless
/// every rule is an unweighted AND over all three inputs and each antecedent
/// combination appears exactly once.
pub fn rule_table(fis: &FisDefinition) -> Result<RuleTable, String> {
    for var in fis.inputs() {
        if var.labels().len() != 3 {
            return Err(format!("{} must have 3 labels", var.name()));
        }
    }
    if fis.inputs().len() != 3 {
        return Err("expected exactly 3 inputs".into());
    }
    let mut table = [[[0usize; 3]; 3]; 3];
    for (i, rule) in fis.rules().iter().enumerate() {
        if rule.connective != Connective::And || rule.weight != 1.0 {
            return Err(format!("rule {i} must be an unweighted AND rule"));
        }
        if rule.antecedent.len() != 3 {
            return Err(format!("rule {i} must test all three inputs"));
        }
        let mut cell = [0usize; 3];
        for clause in &rule.antecedent {
            let v = fis
                .input_index(&clause.variable)
                .ok_or_else(|| format!("rule {i}: unknown variable {}", clause.variable))?;
            cell[v] = fis.inputs()[v]
                .label_index(&clause.label)
                .ok_or_else(|| format!("rule {i}: unknown label {}", clause.label))?;
        }
        let consequent = fis
            .output()
            .label_index(&rule.consequent.label)
            .ok_or_else(|| format!("rule {i}: unknown consequent {}", rule.consequent.label))?;
        let slot = &mut table[cell[0]][cell[1]][cell[2]];
        if *slot != 0 {
            return Err(format!("rule {i} repeats antecedent cell {cell:?}"));
        }
        *slot = consequent + 1;
    }
    if table.iter().flatten().flatten().any(|&c| c == 0) {
        return Err(format!("{} rules do not cover all 27 antecedent cells", fis.rules().len()));
    }
    Ok(table)
}

/// Rebuilds `fis` with its rules replaced by the 27 AND rules of `table`,
/// in npv / gen / divers order. Entries outside `1..=labels` are rejected
/// as unknown labels.
///
/// Panics unless `fis` has three inputs with three labels each.
pub fn with_rule_table(fis: &FisDefinition, table: &RuleTable) -> Result<FisDefinition, DefinitionError> {
    let inputs = fis.inputs();
    let output = fis.output();
    let label = |var: usize, i: usize| inputs[var].labels()[i].name.clone();
    let mut rules = Vec::with_capacity(27);
    for (n, plane) in table.iter().enumerate() {
        for (g, row) in plane.iter().enumerate() {
            for (d, &mf) in row.iter().enumerate() {
                let consequent = match mf.checked_sub(1).and_then(|i| output.labels().get(i)) {
                    Some(l) => l.name.clone(),
                    None => format!("mf{mf}"),
                };
                rules.push(FuzzyRule::and(
                    vec![
                        Clause::new(inputs[0].name(), label(0, n)),
                        Clause::new(inputs[1].name(), label(1, g)),
                        Clause::new(inputs[2].name(), label(2, d)),
                    ],
                    Clause::new(output.name(), consequent),
                ));
            }
        }
    }
    let mut builder = FisDefinition::builder(fis.name())
        .output(output.clone())
        .rules(rules)
        .operators(fis.operators())
        .resolution(fis.resolution());
    for var in inputs {
        builder = builder.input(var.clone());
    }
    builder.build()
}
