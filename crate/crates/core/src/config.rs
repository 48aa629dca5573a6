use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Parameters of a symmetric FSA-RD network.
///
/// Each frame has `frame_size` slots: one reservation slot split into
/// `mini_slots` mini-slots, followed by `frame_size - 1` data slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// N
    pub num_users: u32,
    /// M
    pub frame_size: u32,
    /// V
    pub mini_slots: u32,
    /// ρ, per-slot update generation probability.
    pub arrival_prob: f64,
    /// γ, probability that a user holding an update reserves.
    pub reservation_prob: f64,
}

impl SystemConfig {
    pub fn new(
        num_users: u32,
        frame_size: u32,
        mini_slots: u32,
        arrival_prob: f64,
        reservation_prob: f64,
    ) -> Result<Self, ConfigError> {
        let cfg = Self {
            num_users,
            frame_size,
            mini_slots,
            arrival_prob,
            reservation_prob,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_users < 1 {
            return Err(ConfigError::new("users", self.num_users, "[1, inf)"));
        }
        if self.frame_size < 2 {
            return Err(ConfigError::new("frame", self.frame_size, "[2, inf)"));
        }
        if self.mini_slots < 1 {
            return Err(ConfigError::new("minislots", self.mini_slots, "[1, inf)"));
        }
        check_probability("rho", self.arrival_prob)?;
        check_probability("gamma", self.reservation_prob)?;
        Ok(())
    }

    /// Number of data slots per frame.
    pub fn data_slots(&self) -> u32 {
        self.frame_size - 1
    }
}

/// Accepts values in (0, 1]; rejects NaN.
pub fn check_probability(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(ConfigError::new(field, value, "(0,1]"))
    }
}
