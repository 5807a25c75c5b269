//! Scenario files, CSV plot data, the worked-example table and simulation
//! drivers on top of `fasttrack-core`.

pub mod curves;
pub mod derive;
pub mod error;
pub mod output;
pub mod scenario;
pub mod simulate;
pub mod table1;

pub use error::{CliError, Result};
pub use fasttrack_core as core;
