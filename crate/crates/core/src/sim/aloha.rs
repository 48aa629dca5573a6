//! Slotted ALOHA baseline with Bernoulli arrivals.
//!
//! Each user buffers only its newest update. A user holding an update
//! transmits in a slot with probability τ, including the slot in which the
//! update arrived; the slot succeeds iff exactly one user transmits. Collided
//! updates stay buffered until delivered or replaced.
//!
//! The engine jumps from event to event: arrivals and transmission attempts
//! are generated as geometric gaps, and idle slots only advance the age.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::rng::{stream, user_lane, Arrivals, GeometricGap, PROTOCOL_LANE};
use super::stats::{aggregate_replications, RunTally, SimConfig, SimSetup, SimStats, UserRecord};
use crate::config::check_probability;
use crate::error::{ConfigError, SimError};

struct Station {
    arrivals: Arrivals,
    buffered: Option<u64>,
    next_attempt: u64,
    record: UserRecord,
}

impl Station {
    fn next_event(&self) -> u64 {
        match self.buffered {
            Some(_) => self.arrivals.peek().min(self.next_attempt),
            None => self.arrivals.peek(),
        }
    }
}

/// Simulates `users` slotted ALOHA stations; `sim.horizon_frames` and
/// `sim.warmup_frames` count slots.
pub fn simulate_slotted_aloha(
    users: u32,
    rho: f64,
    tau: f64,
    sim: &SimConfig,
) -> Result<SimStats, SimError> {
    if users < 1 {
        return Err(ConfigError::new("users", users, "[1, inf)").into());
    }
    check_probability("rho", rho)?;
    check_probability("tau", tau)?;
    sim.validate()?;
    sim.total_slots(1)?;

    let runs = (0..sim.replications)
        .into_par_iter()
        .map(|r| run_replication(users, rho, tau, sim, r))
        .collect::<Vec<_>>();
    aggregate_replications(&runs)
}

fn run_replication(users: u32, rho: f64, tau: f64, sim: &SimConfig, replication: u32) -> SimStats {
    let warmup = sim.warmup_frames;
    let end = sim.total_frames();
    let backoff = GeometricGap::new(tau);
    let mut protocol: ChaCha8Rng = stream(sim.seed, replication, PROTOCOL_LANE);
    let mut stations: Vec<Station> = (0..users as usize)
        .map(|u| Station {
            arrivals: Arrivals::new(rho, stream(sim.seed, replication, user_lane(u))),
            buffered: None,
            next_attempt: u64::MAX,
            record: UserRecord::new(),
        })
        .collect();

    let mut tally = RunTally::default();
    let mut flushed = warmup == 0;
    let mut transmitters = Vec::with_capacity(stations.len());

    loop {
        let t = stations
            .iter()
            .map(Station::next_event)
            .min()
            .unwrap_or(u64::MAX);
        if !flushed && t >= warmup {
            for st in &mut stations {
                st.record.age.advance_to(warmup, false);
            }
            flushed = true;
        }
        if t >= end {
            break;
        }
        let measured = t >= warmup;

        for st in &mut stations {
            if st.arrivals.peek() == t {
                st.arrivals.pop();
                if st.buffered.is_none() {
                    st.next_attempt = t + backoff.sample(&mut protocol);
                }
                st.buffered = Some(t);
            }
        }

        transmitters.clear();
        transmitters.extend(
            stations
                .iter()
                .enumerate()
                .filter(|(_, st)| st.buffered.is_some() && st.next_attempt == t)
                .map(|(id, _)| id),
        );

        if let [winner] = transmitters[..] {
            let st = &mut stations[winner];
            let generated = st.buffered.take().expect("transmitter holds an update");
            tally.deliver(&mut st.record, t, generated, t + 1, measured);
        } else {
            for &id in &transmitters {
                stations[id].next_attempt = t + 1 + backoff.sample(&mut protocol);
            }
        }
    }

    let records: Vec<UserRecord> = stations
        .into_iter()
        .map(|mut st| {
            st.record.age.advance_to(end, true);
            st.record
        })
        .collect();
    tally.finish(&records, SimSetup::Aloha { users, rho, tau }, sim)
}
