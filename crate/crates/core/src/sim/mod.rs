// SPDX-License-Identifier: Apache-2.0

//! Deterministic discrete-event queue simulator.

pub mod analysis;
mod engine;
pub mod oracle;
pub mod process;
pub mod scenario;
pub mod trace;

pub use engine::{run, LossEvent, LossKind, RunOutput, RunStats};
pub use oracle::{DepartureLog, OracleDrain};
pub use scenario::{ArrivalProcess, DrainProcess, Scenario, ScenarioError};
pub use trace::{write_csv, TraceRecord};
