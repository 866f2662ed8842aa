//! Command-line front-end: problem and result files, CSV export, SVG rendering
//! and the `solve`, `check`, `sample` and `render` subcommands.

pub mod commands;
pub mod csv;
pub mod error;
pub mod files;
pub mod svg;

pub use commands::{run, Cli, Command};
pub use error::CliError;
