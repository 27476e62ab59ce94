//! File formats, model persistence, run configuration and the command
//! implementations behind the `shiftguard` binary.

pub mod config;
pub mod formats;
pub mod io;
pub mod persist;
pub mod pipeline;

pub use config::RunConfig;
pub use persist::Model;
