//! Problem registry, time loop, diagnostics and steady states.

pub mod benchmarks;
pub mod diagnostics;
pub mod problem;
pub mod steady;
pub mod stepper;

pub use benchmarks::{BenchmarkId, Ex3Case};
pub use diagnostics::DiagnosticsRecord;
pub use problem::{CflMode, ProblemSpec, RkOrder, SimConfig, SpeciesSpec, TimeStep};
pub use stepper::{ErrorReport, RunOutput, Solver, State, ERROR_RULE_POINTS};
