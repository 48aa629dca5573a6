//! Average age of information (AoI) of frame slotted ALOHA with reservation
//! and data slots (FSA-RD).
//!
//! - [`analytic`] evaluates the closed-form average AoI.
//! - [`sim`] is a slot-accurate Monte Carlo simulator for FSA-RD and a
//!   slotted ALOHA baseline.
//! - [`sweep`] searches frame size and reservation probability (analytic) or
//!   transmission probability (simulated) for the lowest average AoI.
//! - [`output`] and [`cli`] expose everything as CSV/JSON on the command line.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod sim;
pub mod sweep;

pub use config::SystemConfig;
pub use error::{AnalyticError, ConfigError, OutputError, SimError, SweepError};
