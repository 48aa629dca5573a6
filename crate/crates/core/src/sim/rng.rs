use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream carrying protocol decisions (reservations, mini-slots, attempts).
pub(crate) const PROTOCOL_LANE: u32 = 0;

/// Independent random stream for one (replication, lane) pair.
///
/// All streams share the key derived from `seed` and differ in the ChaCha
/// stream id, so replications never overlap and each user's arrivals are
/// identical across runs that differ only in protocol parameters.
pub(crate) fn stream(seed: u64, replication: u32, lane: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(replication) << 32) | u64::from(lane));
    rng
}

pub(crate) fn user_lane(user: usize) -> u32 {
    1 + user as u32
}

/// Lanes used only to fill in trace detail, so tracing never perturbs the
/// streams that drive the simulation.
pub(crate) fn trace_lane(user: usize) -> u32 {
    (1 << 31) | user as u32
}

/// Number of failures before the first success of a `p`-coin, drawn by
/// inversion from a single uniform.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GeometricGap {
    ln_fail: f64,
}

impl GeometricGap {
    pub(crate) fn new(p: f64) -> Self {
        debug_assert!(p > 0.0 && p <= 1.0);
        Self {
            ln_fail: (-p).ln_1p(),
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.ln_fail == f64::NEG_INFINITY {
            return 0;
        }
        // u in (0, 1]; Pr(gap >= g) = Pr(u <= (1-p)^g) = (1-p)^g.
        let u = 1.0 - rng.random::<f64>();
        // Saturates at u64::MAX for astronomically long gaps.
        (u.ln() / self.ln_fail).floor() as u64
    }
}

/// Slots at which a Bernoulli(ρ)-per-slot source generates updates.
///
/// Inter-arrival gaps are sampled as geometric variates, which is the same
/// law as flipping a ρ-coin at the start of every slot.
pub(crate) struct Arrivals {
    rng: ChaCha8Rng,
    gap: GeometricGap,
    next: u64,
}

impl Arrivals {
    pub(crate) fn new(rho: f64, mut rng: ChaCha8Rng) -> Self {
        let gap = GeometricGap::new(rho);
        let next = gap.sample(&mut rng);
        Self { rng, gap, next }
    }

    /// Slot of the next arrival.
    pub(crate) fn peek(&self) -> u64 {
        self.next
    }

    pub(crate) fn pop(&mut self) -> u64 {
        let slot = self.next;
        self.next = slot
            .saturating_add(1)
            .saturating_add(self.gap.sample(&mut self.rng));
        slot
    }
}

/// Latest arrival of each frame of a Bernoulli(ρ)-per-slot source.
///
/// Counting back from the last slot of a frame, the offset of the latest
/// arrival is geometric, and it is absent when that offset reaches the frame
/// length. Frames are disjoint, so one draw per frame suffices.
pub(crate) struct FrameArrivals {
    rng: ChaCha8Rng,
    gap: GeometricGap,
}

impl FrameArrivals {
    pub(crate) fn new(rho: f64, rng: ChaCha8Rng) -> Self {
        Self {
            rng,
            gap: GeometricGap::new(rho),
        }
    }

    /// Latest arrival slot in `end - frame_size .. end`, if any.
    pub(crate) fn latest(&mut self, end: u64, frame_size: u64) -> Option<u64> {
        let offset = self.gap.sample(&mut self.rng);
        (offset < frame_size).then(|| end - 1 - offset)
    }
}

/// Earlier arrivals of a frame, given its latest one: slots before the
/// latest arrival are independent Bernoulli(ρ) trials.
pub(crate) fn earlier_arrivals(
    rho: f64,
    start: u64,
    latest: u64,
    rng: &mut ChaCha8Rng,
    mut on_arrival: impl FnMut(u64),
) {
    let coin = Bernoulli::new(rho).expect("rho validated in (0,1]");
    for slot in start..latest {
        if coin.sample(rng) {
            on_arrival(slot);
        }
    }
}
