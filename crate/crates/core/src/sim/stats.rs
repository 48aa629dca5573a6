use serde::{Deserialize, Serialize};

use super::age::AgeTracker;
use crate::config::SystemConfig;
use crate::error::{ConfigError, SimError};

/// Default number of discarded warm-up frames.
pub const DEFAULT_WARMUP_FRAMES: u64 = 10_000;

/// 1.96: two-sided 95% normal quantile.
pub const CI_Z: f64 = 1.96;

/// Run length and seeding of a Monte Carlo experiment.
///
/// For slotted ALOHA a frame is a single slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon_frames: u64,
    pub warmup_frames: u64,
    pub seed: u64,
    pub replications: u32,
}

impl SimConfig {
    pub fn new(horizon_frames: u64, seed: u64) -> Self {
        Self {
            horizon_frames,
            warmup_frames: DEFAULT_WARMUP_FRAMES,
            seed,
            replications: 1,
        }
    }

    pub fn with_warmup(mut self, warmup_frames: u64) -> Self {
        self.warmup_frames = warmup_frames;
        self
    }

    pub fn with_replications(mut self, replications: u32) -> Self {
        self.replications = replications;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon_frames < 1 {
            return Err(ConfigError::new(
                "frames",
                self.horizon_frames as f64,
                "[1, inf)",
            ));
        }
        if self.replications < 1 {
            return Err(ConfigError::new(
                "replications",
                self.replications,
                "[1, inf)",
            ));
        }
        Ok(())
    }

    pub fn total_frames(&self) -> u64 {
        self.warmup_frames.saturating_add(self.horizon_frames)
    }

    /// Total slot count, guarded against overflow of the slot index.
    pub(crate) fn total_slots(&self, frame_size: u32) -> Result<u64, SimError> {
        self.warmup_frames
            .checked_add(self.horizon_frames)
            .and_then(|f| f.checked_mul(u64::from(frame_size)))
            // Leave headroom for arrival look-ahead past the horizon.
            .filter(|&slots| slots < u64::MAX / 4)
            .ok_or(SimError::Overflow {
                frames: self.total_frames(),
                frame_size,
            })
    }
}

/// Which protocol and parameters produced a [`SimStats`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum SimSetup {
    Fsard(SystemConfig),
    Aloha { users: u32, rho: f64, tau: f64 },
}

impl SimSetup {
    pub fn users(&self) -> u32 {
        match self {
            SimSetup::Fsard(cfg) => cfg.num_users,
            SimSetup::Aloha { users, .. } => *users,
        }
    }

    /// Slots per frame; 1 for slotted ALOHA.
    pub fn frame_size(&self) -> u32 {
        match self {
            SimSetup::Fsard(cfg) => cfg.frame_size,
            SimSetup::Aloha { .. } => 1,
        }
    }
}

/// Time-average AoI and renewal statistics of one or more replications.
///
/// All times are in slots. The optional moments are `None` when nothing was
/// delivered (or no inter-delivery interval completed) while measuring.
/// For slotted ALOHA the renewal interval is the inter-delivery time, so
/// `mean_y` equals `mean_interdeparture`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub setup: SimSetup,
    pub horizon_frames: u64,
    pub warmup_frames: u64,
    pub replications: u32,
    pub mean_aoi: f64,
    pub per_user_aoi: Vec<f64>,
    pub mean_service: Option<f64>,
    pub mean_interdeparture: Option<f64>,
    pub mean_y: Option<f64>,
    pub mean_y2: Option<f64>,
    pub ci_halfwidth: f64,
    /// Measured slots per user, summed over replications.
    pub slots_measured: u64,
    pub deliveries: u64,
    pub intervals: u64,
}

/// Per-user delivery bookkeeping shared by both protocol engines.
#[derive(Debug, Clone)]
pub(crate) struct UserRecord {
    pub(crate) age: AgeTracker,
    /// (reception slot, renewal boundary slot) of the previous delivery.
    last: Option<(u64, u64)>,
}

impl UserRecord {
    pub(crate) fn new() -> Self {
        Self {
            age: AgeTracker::new(),
            last: None,
        }
    }
}

/// Raw sums of one replication.
#[derive(Debug, Default, Clone)]
pub(crate) struct RunTally {
    deliveries: u64,
    service_sum: u128,
    intervals: u64,
    x_sum: u128,
    y_sum: u128,
    y2_sum: u128,
}

impl RunTally {
    /// Records a delivery at `reception_slot` whose renewal interval closes
    /// at slot `renewal_end` (frame end for FSA-RD, the next slot for ALOHA).
    pub(crate) fn deliver(
        &mut self,
        user: &mut UserRecord,
        reception_slot: u64,
        generated: u64,
        renewal_end: u64,
        measured: bool,
    ) -> u64 {
        let service = user.age.deliver(reception_slot, generated, measured);
        if measured {
            self.deliveries += 1;
            self.service_sum += u128::from(service);
            if let Some((prev_rx, prev_end)) = user.last {
                let x = u128::from(reception_slot - prev_rx);
                let y = u128::from(renewal_end - prev_end);
                self.intervals += 1;
                self.x_sum += x;
                self.y_sum += y;
                self.y2_sum += y * y;
            }
        }
        user.last = Some((reception_slot, renewal_end));
        service
    }

    pub(crate) fn finish(self, users: &[UserRecord], setup: SimSetup, sim: &SimConfig) -> SimStats {
        let per_user_aoi: Vec<f64> = users
            .iter()
            .map(|u| u.age.area() as f64 / u.age.measured_slots() as f64)
            .collect();
        let total_area: u128 = users.iter().map(|u| u.age.area()).sum();
        let slots_measured = users.first().map_or(0, |u| u.age.measured_slots());
        let mean_aoi = total_area as f64 / (slots_measured as f64 * users.len() as f64);

        let ratio = |sum: u128, count: u64| (count > 0).then(|| sum as f64 / count as f64);
        SimStats {
            setup,
            horizon_frames: sim.horizon_frames,
            warmup_frames: sim.warmup_frames,
            replications: 1,
            mean_aoi,
            per_user_aoi,
            mean_service: ratio(self.service_sum, self.deliveries),
            mean_interdeparture: ratio(self.x_sum, self.intervals),
            mean_y: ratio(self.y_sum, self.intervals),
            mean_y2: ratio(self.y2_sum, self.intervals),
            ci_halfwidth: 0.0,
            slots_measured,
            deliveries: self.deliveries,
            intervals: self.intervals,
        }
    }
}

/// Pools replications of the same experiment.
///
/// Means are weighted by measured slots (AoI), deliveries (service time) or
/// completed intervals (inter-delivery and renewal moments), summed in
/// replication order. `ci_halfwidth` is `1.96 · s / √R` with `s` the sample
/// standard deviation of the per-replication mean AoI, and 0 for `R = 1`.
pub fn aggregate_replications(stats: &[SimStats]) -> Result<SimStats, SimError> {
    let first = stats.first().ok_or(SimError::EmptyAggregate)?;
    for (index, s) in stats.iter().enumerate() {
        if s.setup != first.setup
            || s.horizon_frames != first.horizon_frames
            || s.warmup_frames != first.warmup_frames
            || s.per_user_aoi.len() != first.per_user_aoi.len()
        {
            return Err(SimError::MismatchedReplications { index });
        }
    }

    let slots: u64 = stats.iter().map(|s| s.slots_measured).sum();
    let deliveries: u64 = stats.iter().map(|s| s.deliveries).sum();
    let intervals: u64 = stats.iter().map(|s| s.intervals).sum();
    let replications: u32 = stats.iter().map(|s| s.replications).sum();

    let slot_weighted = |value: &dyn Fn(&SimStats) -> f64| {
        stats
            .iter()
            .map(|s| value(s) * s.slots_measured as f64)
            .sum::<f64>()
            / slots as f64
    };
    let mean_aoi = slot_weighted(&|s| s.mean_aoi);
    let per_user_aoi = (0..first.per_user_aoi.len())
        .map(|u| slot_weighted(&|s| s.per_user_aoi[u]))
        .collect();

    let count_weighted = |value: &dyn Fn(&SimStats) -> Option<f64>,
                          weight: &dyn Fn(&SimStats) -> u64| {
        let total: u64 = stats.iter().map(weight).sum();
        (total > 0).then(|| {
            stats
                .iter()
                .filter_map(|s| value(s).map(|v| v * weight(s) as f64))
                .sum::<f64>()
                / total as f64
        })
    };

    let n = stats.len() as f64;
    let ci_halfwidth = if stats.len() < 2 {
        0.0
    } else {
        let mean = stats.iter().map(|s| s.mean_aoi).sum::<f64>() / n;
        let var = stats
            .iter()
            .map(|s| (s.mean_aoi - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        CI_Z * var.sqrt() / n.sqrt()
    };

    Ok(SimStats {
        setup: first.setup,
        horizon_frames: first.horizon_frames,
        warmup_frames: first.warmup_frames,
        replications,
        mean_aoi,
        per_user_aoi,
        mean_service: count_weighted(&|s| s.mean_service, &|s| s.deliveries),
        mean_interdeparture: count_weighted(&|s| s.mean_interdeparture, &|s| s.intervals),
        mean_y: count_weighted(&|s| s.mean_y, &|s| s.intervals),
        mean_y2: count_weighted(&|s| s.mean_y2, &|s| s.intervals),
        ci_halfwidth,
        slots_measured: slots,
        deliveries,
        intervals,
    })
}
