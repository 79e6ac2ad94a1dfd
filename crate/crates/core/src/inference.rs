//! Mamdani inference: fuzzification, antecedent operators, min implication,
//! max aggregation and centroid defuzzification over a sampled output universe.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::variable::is_identifier;
use crate::{DefinitionError, InferenceError, LinguisticVariable};

pub const DEFAULT_RESOLUTION: usize = 1001;
pub const MIN_RESOLUTION: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    And,
    Or,
}

impl Connective {
    pub fn keyword(self) -> &'static str {
        match self {
            Connective::And => "and",
            Connective::Or => "or",
        }
    }
}

/// One `<variable> is <label>` term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Clause {
    pub variable: String,
    pub label: String,
}

impl Clause {
    pub fn new(variable: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            variable: variable.into(),
            label: label.into(),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} is {}", self.variable, self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzyRule {
    pub antecedent: Vec<Clause>,
    pub connective: Connective,
    pub consequent: Clause,
    pub weight: f64,
}

impl FuzzyRule {
    pub fn new(antecedent: Vec<Clause>, connective: Connective, consequent: Clause) -> Self {
        Self {
            antecedent,
            connective,
            consequent,
            weight: 1.0,
        }
    }

    pub fn and(antecedent: Vec<Clause>, consequent: Clause) -> Self {
        Self::new(antecedent, Connective::And, consequent)
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

impl fmt::Display for FuzzyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "if ")?;
        for (i, clause) in self.antecedent.iter().enumerate() {
            if i > 0 {
                write!(f, " {} ", self.connective.keyword())?;
            }
            write!(f, "{clause}")?;
        }
        write!(f, " then {}", self.consequent)
    }
}

macro_rules! operator {
    ($(#[$doc:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            #[default]
            $($variant),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!(
                        "unsupported {} `{}` (expected {})",
                        stringify!($name),
                        other,
                        [$($text),+].join(" | ")
                    )),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

operator!(AndOp { Min => "min" });
operator!(OrOp { Max => "max" });
operator!(ImplicationOp { Min => "min" });
operator!(AggregationOp { Max => "max" });
operator!(DefuzzOp { Centroid => "centroid" });

/// Operator configuration. Only the classic Mamdani set is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Operators {
    pub and_op: AndOp,
    pub or_op: OrOp,
    pub implication: ImplicationOp,
    pub aggregation: AggregationOp,
    pub defuzz: DefuzzOp,
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledRule {
    clauses: Vec<(usize, usize)>,
    consequent: usize,
}

/// A complete, validated Mamdani system. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FisDefinition {
    name: String,
    inputs: Vec<LinguisticVariable>,
    output: LinguisticVariable,
    rules: Vec<FuzzyRule>,
    operators: Operators,
    resolution: usize,
    compiled: Vec<CompiledRule>,
}

#[derive(Debug, Clone)]
pub struct FisBuilder {
    name: String,
    inputs: Vec<LinguisticVariable>,
    output: Option<LinguisticVariable>,
    rules: Vec<FuzzyRule>,
    operators: Operators,
    resolution: usize,
}

impl FisBuilder {
    pub fn input(mut self, var: LinguisticVariable) -> Self {
        self.inputs.push(var);
        self
    }

    pub fn output(mut self, var: LinguisticVariable) -> Self {
        self.output = Some(var);
        self
    }

    pub fn rule(mut self, rule: FuzzyRule) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn rules(mut self, rules: impl IntoIterator<Item = FuzzyRule>) -> Self {
        self.rules.extend(rules);
        self
    }

    pub fn operators(mut self, operators: Operators) -> Self {
        self.operators = operators;
        self
    }

    pub fn resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn build(mut self) -> Result<FisDefinition, DefinitionError> {
        // AND and OR agree on one clause; keep a single spelling
        for rule in &mut self.rules {
            if rule.antecedent.len() == 1 {
                rule.connective = Connective::And;
            }
        }
        if !is_identifier(&self.name) {
            return Err(DefinitionError::InvalidName(self.name));
        }
        let output = self.output.ok_or(DefinitionError::NoOutput)?;
        if self.inputs.is_empty() {
            return Err(DefinitionError::NoInputs);
        }
        for (i, var) in self.inputs.iter().chain(std::iter::once(&output)).enumerate() {
            let seen = self.inputs[..i.min(self.inputs.len())]
                .iter()
                .any(|v| v.name() == var.name());
            if seen {
                return Err(DefinitionError::DuplicateVariable(var.name().to_string()));
            }
            if !var.is_covered() {
                return Err(DefinitionError::Uncovered(var.name().to_string()));
            }
        }
        if self.resolution < MIN_RESOLUTION {
            return Err(DefinitionError::ResolutionTooSmall(self.resolution));
        }
        if self.rules.is_empty() {
            return Err(DefinitionError::NoRules);
        }
        let compiled = self
            .rules
            .iter()
            .enumerate()
            .map(|(index, rule)| compile_rule(index, rule, &self.inputs, &output))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FisDefinition {
            name: self.name,
            inputs: self.inputs,
            output,
            rules: self.rules,
            operators: self.operators,
            resolution: self.resolution,
            compiled,
        })
    }
}

fn compile_rule(
    index: usize,
    rule: &FuzzyRule,
    inputs: &[LinguisticVariable],
    output: &LinguisticVariable,
) -> Result<CompiledRule, DefinitionError> {
    if rule.antecedent.is_empty() {
        return Err(DefinitionError::EmptyAntecedent { rule: index });
    }
    if !(rule.weight > 0.0 && rule.weight <= 1.0) {
        return Err(DefinitionError::InvalidWeight {
            rule: index,
            weight: rule.weight,
        });
    }
    let mut clauses = Vec::with_capacity(rule.antecedent.len());
    for clause in &rule.antecedent {
        let var = inputs
            .iter()
            .position(|v| v.name() == clause.variable)
            .ok_or_else(|| DefinitionError::UnknownVariable {
                rule: index,
                variable: clause.variable.clone(),
            })?;
        if clauses.iter().any(|&(v, _)| v == var) {
            return Err(DefinitionError::DuplicateClause {
                rule: index,
                variable: clause.variable.clone(),
            });
        }
        let label = inputs[var]
            .label_index(&clause.label)
            .ok_or_else(|| DefinitionError::UnknownLabel {
                rule: index,
                variable: clause.variable.clone(),
                label: clause.label.clone(),
            })?;
        clauses.push((var, label));
    }
    if rule.consequent.variable != output.name() {
        return Err(DefinitionError::ConsequentNotOutput {
            rule: index,
            variable: rule.consequent.variable.clone(),
        });
    }
    let consequent =
        output
            .label_index(&rule.consequent.label)
            .ok_or_else(|| DefinitionError::UnknownLabel {
                rule: index,
                variable: rule.consequent.variable.clone(),
                label: rule.consequent.label.clone(),
            })?;
    Ok(CompiledRule {
        clauses,
        consequent,
    })
}

/// Crisp-to-fuzzy mapping of one input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fuzzified {
    pub variable: String,
    /// `(label, degree)` in label order.
    pub degrees: Vec<(String, f64)>,
}

impl Fuzzified {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.degrees
            .iter()
            .find(|(name, _)| name == label)
            .map(|&(_, d)| d)
    }
}

fn check_range(var: &LinguisticVariable, x: f64) -> Result<(), InferenceError> {
    if var.contains(x) {
        Ok(())
    } else {
        Err(InferenceError::OutOfRange {
            variable: var.name().to_string(),
            value: x,
            lo: var.lo(),
            hi: var.hi(),
        })
    }
}

/// Degree of every label of `var` at `x`. Values outside the universe are
/// rejected rather than clamped.
pub fn fuzzify(var: &LinguisticVariable, x: f64) -> Result<Fuzzified, InferenceError> {
    check_range(var, x)?;
    Ok(Fuzzified {
        variable: var.name().to_string(),
        degrees: var
            .labels()
            .iter()
            .map(|l| (l.name.clone(), l.mf.eval(x)))
            .collect(),
    })
}

/// Antecedent strength of `rule`: min over clauses for AND, max for OR,
/// scaled by the rule weight.
pub fn firing_strength(rule: &FuzzyRule, fuzzified: &[Fuzzified]) -> Result<f64, InferenceError> {
    let mut degrees = Vec::with_capacity(rule.antecedent.len());
    for clause in &rule.antecedent {
        let input = fuzzified
            .iter()
            .find(|f| f.variable == clause.variable)
            .ok_or_else(|| InferenceError::MissingInput {
                variable: clause.variable.clone(),
            })?;
        let degree = input
            .get(&clause.label)
            .ok_or_else(|| InferenceError::UnknownLabel {
                variable: clause.variable.clone(),
                label: clause.label.clone(),
            })?;
        degrees.push(degree);
    }
    Ok(combine(rule.connective, degrees) * rule.weight)
}

fn combine(connective: Connective, degrees: impl IntoIterator<Item = f64>) -> f64 {
    match connective {
        Connective::And => degrees.into_iter().fold(1.0, f64::min),
        Connective::Or => degrees.into_iter().fold(0.0, f64::max),
    }
}

/// Centroid `sum(x * mu) / sum(mu)` with trapezoidal weights over uniformly
/// spaced samples. Needs at least [`MIN_RESOLUTION`] samples.
pub fn defuzz_centroid(samples: &[(f64, f64)]) -> Result<f64, InferenceError> {
    let n = samples.len();
    if n < MIN_RESOLUTION {
        return Err(InferenceError::InvalidSamples(format!(
            "{n} samples, need at least {MIN_RESOLUTION}"
        )));
    }
    let first = samples[0].0;
    let last = samples[n - 1].0;
    let step = (last - first) / (n - 1) as f64;
    if !(step.is_finite() && step > 0.0) {
        return Err(InferenceError::InvalidSamples(
            "sample abscissae must be finite and increasing".into(),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &(x, mu)) in samples.iter().enumerate() {
        if (x - (first + i as f64 * step)).abs() > 1e-6 * step {
            return Err(InferenceError::InvalidSamples(format!(
                "sample {i} at {x} breaks the uniform spacing"
            )));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(InferenceError::InvalidSamples(format!(
                "sample {i} has invalid membership {mu}"
            )));
        }
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        num += w * x * mu;
        den += w * mu;
    }
    if den == 0.0 {
        return Err(InferenceError::NoRuleFired);
    }
    Ok((num / den).clamp(first, last))
}

/// Crisp output plus the trace needed to explain it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceResult {
    pub output: f64,
    /// Firing strength per rule, indexed like [`FisDefinition::rules`].
    pub firing: Vec<f64>,
    /// Aggregated output set sampled at the system resolution, as `(x, mu)`.
    pub aggregate: Vec<(f64, f64)>,
}

impl FisDefinition {
    pub fn builder(name: impl Into<String>) -> FisBuilder {
        FisBuilder {
            name: name.into(),
            inputs: Vec::new(),
            output: None,
            rules: Vec::new(),
            operators: Operators::default(),
            resolution: DEFAULT_RESOLUTION,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn input(&self, name: &str) -> Option<&LinguisticVariable> {
        self.inputs.iter().find(|v| v.name() == name)
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|v| v.name() == name)
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.output
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn operators(&self) -> Operators {
        self.operators
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Same system sampled at a different output resolution.
    pub fn with_resolution(&self, resolution: usize) -> Result<Self, DefinitionError> {
        if resolution < MIN_RESOLUTION {
            return Err(DefinitionError::ResolutionTooSmall(resolution));
        }
        Ok(Self {
            resolution,
            ..self.clone()
        })
    }

    /// Output universe grid, first and last points exactly on the bounds.
    pub fn output_grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.output.lo(), self.output.hi());
        let n = self.resolution;
        let step = (hi - lo) / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
            .collect()
    }

    /// Runs the full pipeline on crisp values given in input-variable order.
    pub fn infer(&self, values: &[f64]) -> Result<InferenceResult, InferenceError> {
        if values.len() != self.inputs.len() {
            return Err(InferenceError::InputCount {
                expected: self.inputs.len(),
                got: values.len(),
            });
        }
        let degrees = self
            .inputs
            .iter()
            .zip(values)
            .map(|(var, &x)| {
                check_range(var, x)?;
                Ok(var.degrees(x))
            })
            .collect::<Result<Vec<_>, InferenceError>>()?;

        let firing: Vec<f64> = self
            .rules
            .iter()
            .zip(&self.compiled)
            .map(|(rule, compiled)| {
                let clause_degrees = compiled.clauses.iter().map(|&(v, l)| degrees[v][l]);
                combine(rule.connective, clause_degrees) * rule.weight
            })
            .collect();

        // Rules sharing a consequent clip the same set, so max over their
        // strengths first is identical to max over each clipped copy.
        let mut clip = vec![0.0f64; self.output.labels().len()];
        for (strength, compiled) in firing.iter().zip(&self.compiled) {
            let level = &mut clip[compiled.consequent];
            *level = level.max(*strength);
        }
        let active: Vec<_> = self
            .output
            .labels()
            .iter()
            .zip(&clip)
            .filter(|(_, &level)| level > 0.0)
            .map(|(label, &level)| (label.mf, level))
            .collect();

        let aggregate: Vec<(f64, f64)> = self
            .output_grid()
            .into_iter()
            .map(|x| {
                let mu = active
                    .iter()
                    .map(|(mf, level)| mf.eval(x).min(*level))
                    .fold(0.0, f64::max);
                (x, mu)
            })
            .collect();

        let output = defuzz_centroid(&aggregate)?;
        Ok(InferenceResult {
            output,
            firing,
            aggregate,
        })
    }

    /// Like [`FisDefinition::infer`] with values given by variable name. Every
    /// input must be supplied exactly once.
    pub fn infer_named(&self, inputs: &[(&str, f64)]) -> Result<InferenceResult, InferenceError> {
        let mut values = vec![None; self.inputs.len()];
        for &(name, x) in inputs {
            let idx = self
                .input_index(name)
                .ok_or_else(|| InferenceError::UnknownInput {
                    variable: name.to_string(),
                })?;
            if values[idx].replace(x).is_some() {
                return Err(InferenceError::DuplicateInput {
                    variable: name.to_string(),
                });
            }
        }
        let values = values
            .into_iter()
            .zip(&self.inputs)
            .map(|(x, var)| {
                x.ok_or_else(|| InferenceError::MissingInput {
                    variable: var.name().to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.infer(&values)
    }
}
