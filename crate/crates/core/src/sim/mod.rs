//! Slot-accurate Monte Carlo simulation of FSA-RD and slotted ALOHA.
//!
//! Time is slotted; an update generated at the start of slot `g` and received
//! at the end of slot `r` sets the receiver's age to `r + 1 - g` in slot
//! `r + 1`. Every other slot the age grows by one. Ages start at 1.
//!
//! Every replication draws from its own deterministic ChaCha streams, one
//! for protocol decisions and one per user for arrivals, so `(seed, config)`
//! fixes the output regardless of thread count.

mod age;
mod aloha;
mod fsard;
mod rng;
mod stats;
mod trace;

pub use aloha::simulate_slotted_aloha;
pub use fsard::{resolve_reservation_slot, simulate_fsard, simulate_fsard_traced, FrameOutcome};
pub use stats::{
    aggregate_replications, SimConfig, SimSetup, SimStats, CI_Z, DEFAULT_WARMUP_FRAMES,
};
pub use trace::{TraceEvent, TraceRow, TRACE_ROW_LIMIT};
