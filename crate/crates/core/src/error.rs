use thiserror::Error;

/// Errors from building membership functions and linguistic variables.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("breakpoints {params:?} must be finite and non-decreasing")]
    InvalidBreakpoints { params: Vec<f64> },
    #[error("empty universe [{lo}, {hi}]")]
    EmptyUniverse { lo: f64, hi: f64 },
    #[error("invalid identifier `{0}`")]
    InvalidName(String),
    #[error("variable `{variable}` has no labels")]
    NoLabels { variable: String },
    #[error("a symmetric partition needs at least 2 labels, got {count}")]
    TooFewLabels { count: usize },
    #[error("duplicate label `{label}` in variable `{variable}`")]
    DuplicateLabel { variable: String, label: String },
    #[error("support of label `{label}` lies outside the universe [{lo}, {hi}] of `{variable}`")]
    SupportOutsideUniverse {
        variable: String,
        label: String,
        lo: f64,
        hi: f64,
    },
    #[error("label `{label}` of `{variable}` peaks before the previous label")]
    LabelOrder { variable: String, label: String },
    #[error("variable `{variable}` has no label with positive degree at {at}")]
    Uncovered { variable: String, at: f64 },
}

/// Errors from assembling a [`crate::FisDefinition`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DefinitionError {
    #[error("invalid system name `{0}`")]
    InvalidName(String),
    #[error("system has no input variables")]
    NoInputs,
    #[error("system has no output variable")]
    NoOutput,
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{0}` does not cover its universe")]
    Uncovered(String),
    #[error("no rules")]
    NoRules,
    #[error("resolution {0} is below the minimum of 11 samples")]
    ResolutionTooSmall(usize),
    #[error("rule {rule}: empty antecedent")]
    EmptyAntecedent { rule: usize },
    #[error("rule {rule}: weight {weight} is outside (0, 1]")]
    InvalidWeight { rule: usize, weight: f64 },
    #[error("rule {rule}: unknown input variable `{variable}`")]
    UnknownVariable { rule: usize, variable: String },
    #[error("rule {rule}: unknown label `{label}` for variable `{variable}`")]
    UnknownLabel {
        rule: usize,
        variable: String,
        label: String,
    },
    #[error("rule {rule}: variable `{variable}` appears in more than one clause")]
    DuplicateClause { rule: usize, variable: String },
    #[error("rule {rule}: consequent `{variable}` is not the output variable")]
    ConsequentNotOutput { rule: usize, variable: String },
}

/// Errors raised while running inference.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("{variable} = {value} is outside the range [{lo}, {hi}]")]
    OutOfRange {
        variable: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("expected {expected} input values, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("missing input `{variable}`")]
    MissingInput { variable: String },
    #[error("unknown input `{variable}`")]
    UnknownInput { variable: String },
    #[error("input `{variable}` given more than once")]
    DuplicateInput { variable: String },
    #[error("unknown label `{label}` for `{variable}`")]
    UnknownLabel { variable: String, label: String },
    #[error("no rule fired: the aggregated output set is empty")]
    NoRuleFired,
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
}
