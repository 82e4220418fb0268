//! Command-line harness around the `unilearn` crate: configured experiment
//! runs, the ε × k convergence sweep, and modulation-mask emission.
//!
//! Everything the binary does lives here so integration tests can drive the
//! same code paths directly.

pub mod artifacts;
pub mod config;
pub mod experiments;
pub mod modulations;
pub mod sweep;
