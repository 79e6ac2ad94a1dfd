//! Mamdani fuzzy inference and the generics-market permanence decision model.
//!
//! The engine layers are independent of the bundled model:
//!
//! * [`membership`] and [`variable`]: piecewise-linear fuzzy sets and
//!   linguistic variables, including symmetric (Ruspini) partitions.
//! * [`inference`]: fuzzify, fire, clip, aggregate and defuzzify.
//! * [`fis_text`]: the line-oriented text format systems ship in.
//! * [`permanence`]: the NPV / GEN / DIVERS to PERM-INCENT model for the
//!   stable and growth scenarios, plus the NPV helper.
//! * [`surface`]: two-input response surfaces and their CSV/JSON export.
//! * [`calibration`]: the anchor checks run against the bundled models.

pub mod calibration;
mod error;
pub mod fis_text;
pub mod inference;
pub mod membership;
pub mod numfmt;
pub mod permanence;
pub mod surface;
pub mod variable;

pub use error::{DefinitionError, FuzzyError, InferenceError};
pub use fis_text::{parse_fis, serialize_fis, ParseError};
pub use inference::{
    defuzz_centroid, firing_strength, fuzzify, Clause, Connective, FisDefinition, FuzzyRule,
    Fuzzified, InferenceResult, Operators,
};
pub use membership::MembershipFunction;
pub use permanence::{
    npv, CashFlowSchedule, ModelError, PermanenceInput, PermanenceModels, Scenario,
};
pub use surface::{export_grid, grid_stats, sweep, ExportFormat, GridStats, SurfaceGrid, Trend};
pub use variable::{check_coverage, make_symmetric_partition, CoverageReport, Label, LinguisticVariable};
