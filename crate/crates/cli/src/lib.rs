//! Configuration, orchestration and CSV output for the `levsg` command.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod scenario;

pub use commands::{execute, load_config, Mode, Outcome, Task};
pub use config::{parse_config, ConfigError, RunConfig};
pub use error::CliError;
pub use scenario::EtaSource;
