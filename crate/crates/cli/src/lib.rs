//! Command implementations of the `pdvoice` tool.

pub mod classify;
pub mod config;
pub mod correlate;
pub mod error;
pub mod extract;
pub mod pipeline;
pub mod regress;
pub mod synth;

pub use config::{RunConfig, Target, Wrapper};
pub use error::{CliError, Result};
