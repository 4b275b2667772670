//! Experiment configuration, dispatch, report persistence and the
//! self-verification suite.

pub mod config;
pub mod run;
pub mod verify;

pub use config::{ExperimentConfig, ExperimentKind, InitialData, Parameters};
pub use run::{error_json, run, run_path, RunOutcome, VERSION};
pub use verify::{verify_suite, Fault, GroupResult, GroupStatus, VerifyOptions, VerifySummary};
