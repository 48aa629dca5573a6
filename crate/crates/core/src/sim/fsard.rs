//! Frame-level engine for FSA-RD.
//!
//! Frame `k` occupies slots `kM .. kM + M`. Its first slot is the reservation
//! slot, the remaining `M - 1` are data slots. Only the latest update that
//! arrived during frame `k - 1` may be sent in frame `k`; it is dropped at
//! the end of frame `k` whether or not it got through.

use std::io::Write;

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{earlier_arrivals, stream, trace_lane, user_lane, FrameArrivals, PROTOCOL_LANE};
use super::stats::{aggregate_replications, RunTally, SimConfig, SimSetup, SimStats, UserRecord};
use super::trace::{FrameTracer, TraceEvent, TRACE_ROW_LIMIT};
use crate::config::SystemConfig;
use crate::error::SimError;

/// Result of one reservation slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameOutcome {
    /// Users that sent a reservation packet, in the order given.
    pub contenders: Vec<usize>,
    /// Mini-slot picked by each contender (parallel to `contenders`).
    pub choices: Vec<u32>,
    /// Contenders alone in their mini-slot, by increasing mini-slot index.
    pub winners: Vec<usize>,
}

impl FrameOutcome {
    /// `(user, α)` for winners that get a data slot; α = 2 is the first data
    /// slot. Winners beyond the `data_slots` available get nothing.
    pub fn grants(&self, data_slots: u32) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.winners
            .iter()
            .take(data_slots as usize)
            .enumerate()
            .map(|(rank, &user)| (user, rank as u32 + 2))
    }
}

/// Each contender picks one of `mini_slots` uniformly; a mini-slot picked by
/// more than one contender is a collision and all of its reservations fail.
pub fn resolve_reservation_slot<R: Rng + ?Sized>(
    contenders: &[usize],
    mini_slots: u32,
    rng: &mut R,
) -> FrameOutcome {
    assert!(mini_slots >= 1, "at least one mini-slot is required");
    let choices: Vec<u32> = contenders
        .iter()
        .map(|_| rng.random_range(0..mini_slots))
        .collect();

    let mut occupants = vec![0u32; mini_slots as usize];
    let mut owner = vec![usize::MAX; mini_slots as usize];
    for (&user, &slot) in contenders.iter().zip(&choices) {
        occupants[slot as usize] += 1;
        owner[slot as usize] = user;
    }
    let winners = occupants
        .iter()
        .zip(&owner)
        .filter(|(&count, _)| count == 1)
        .map(|(_, &user)| user)
        .collect();

    FrameOutcome {
        contenders: contenders.to_vec(),
        choices,
        winners,
    }
}

struct Station {
    arrivals: FrameArrivals,
    /// Latest arrival in the frame being played, sent in the next frame.
    latest_arrival_this_frame: Option<u64>,
    /// Update eligible in the current frame.
    candidate_generation_slot: Option<u64>,
    record: UserRecord,
}

/// Simulates FSA-RD for `sim.replications` independent replications and
/// pools them.
pub fn simulate_fsard(cfg: &SystemConfig, sim: &SimConfig) -> Result<SimStats, SimError> {
    cfg.validate()?;
    sim.validate()?;
    sim.total_slots(cfg.frame_size)?;
    let runs = (0..sim.replications)
        .into_par_iter()
        .map(|r| run_replication::<std::io::Sink>(cfg, sim, r, None))
        .collect::<Result<Vec<_>, _>>()?;
    aggregate_replications(&runs)
}

/// Like [`simulate_fsard`], additionally writing a slot-level trace of
/// replication 0 (warm-up included) to `out`.
pub fn simulate_fsard_traced<W: Write>(
    cfg: &SystemConfig,
    sim: &SimConfig,
    out: W,
) -> Result<SimStats, SimError> {
    cfg.validate()?;
    sim.validate()?;
    let rows = sim
        .total_slots(cfg.frame_size)?
        .saturating_mul(u64::from(cfg.num_users));
    if rows > TRACE_ROW_LIMIT {
        return Err(SimError::TraceTooLong {
            rows,
            limit: TRACE_ROW_LIMIT,
        });
    }
    let mut tracer = FrameTracer::new(out, cfg.num_users as usize);
    let mut runs = vec![run_replication(cfg, sim, 0, Some(&mut tracer))?];
    tracer.finish()?;
    for r in 1..sim.replications {
        runs.push(run_replication::<std::io::Sink>(cfg, sim, r, None)?);
    }
    aggregate_replications(&runs)
}

fn run_replication<W: Write>(
    cfg: &SystemConfig,
    sim: &SimConfig,
    replication: u32,
    mut tracer: Option<&mut FrameTracer<W>>,
) -> Result<SimStats, SimError> {
    let frame = u64::from(cfg.frame_size);
    let total_frames = sim.total_frames();
    let data_slots = cfg.data_slots();

    let mut protocol = stream(sim.seed, replication, PROTOCOL_LANE);
    let reserve = Bernoulli::new(cfg.reservation_prob).expect("gamma validated");
    let mut stations: Vec<Station> = (0..cfg.num_users as usize)
        .map(|u| Station {
            arrivals: FrameArrivals::new(
                cfg.arrival_prob,
                stream(sim.seed, replication, user_lane(u)),
            ),
            latest_arrival_this_frame: None,
            candidate_generation_slot: None,
            record: UserRecord::new(),
        })
        .collect();

    let mut trace_rngs: Vec<_> = match tracer {
        Some(_) => (0..stations.len())
            .map(|u| stream(sim.seed, replication, trace_lane(u)))
            .collect(),
        None => Vec::new(),
    };

    let mut tally = RunTally::default();
    let mut contenders = Vec::with_capacity(stations.len());

    for k in 0..total_frames {
        let start = k * frame;
        let end = start + frame;
        let measured = k >= sim.warmup_frames;
        if k == sim.warmup_frames {
            for st in &mut stations {
                st.record.age.advance_to(start, false);
            }
        }
        if let Some(t) = tracer.as_deref_mut() {
            t.begin_frame(start, stations.iter().map(|s| s.record.age.age_at(start)));
        }

        contenders.clear();
        for (id, st) in stations.iter_mut().enumerate() {
            st.candidate_generation_slot = st.latest_arrival_this_frame.take();
            if st.candidate_generation_slot.is_some() && reserve.sample(&mut protocol) {
                contenders.push(id);
            }
        }

        let outcome = resolve_reservation_slot(&contenders, cfg.mini_slots, &mut protocol);
        debug_assert!(outcome.winners.len() <= cfg.mini_slots as usize);

        for (user, alpha) in outcome.grants(data_slots) {
            let st = &mut stations[user];
            let generated = st
                .candidate_generation_slot
                .take()
                .expect("winners hold a candidate");
            let reception = start + u64::from(alpha) - 1;
            let age = tally.deliver(&mut st.record, reception, generated, end, measured);
            if let Some(t) = tracer.as_deref_mut() {
                t.event(start, user, TraceEvent::ReserveWin);
                t.delivered(reception, user, age);
            }
        }

        if let Some(t) = tracer.as_deref_mut() {
            for &user in &contenders {
                if stations[user].candidate_generation_slot.is_some() {
                    t.event(start, user, TraceEvent::ReserveFail);
                }
            }
        }

        for st in &mut stations {
            st.latest_arrival_this_frame = st.arrivals.latest(end, frame);
        }
        if let Some(t) = tracer.as_deref_mut() {
            for (id, st) in stations.iter().enumerate() {
                if let Some(latest) = st.latest_arrival_this_frame {
                    earlier_arrivals(
                        cfg.arrival_prob,
                        start,
                        latest,
                        &mut trace_rngs[id],
                        |slot| t.event(slot, id, TraceEvent::Arrival),
                    );
                    t.event(latest, id, TraceEvent::Arrival);
                }
            }
        }

        if let Some(t) = tracer.as_deref_mut() {
            t.end_frame(cfg.frame_size)?;
        }
    }

    let horizon_end = total_frames * frame;
    let records: Vec<UserRecord> = stations
        .into_iter()
        .map(|mut st| {
            st.record.age.advance_to(horizon_end, true);
            st.record
        })
        .collect();
    Ok(tally.finish(&records, SimSetup::Fsard(*cfg), sim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    /// Always yields zero, so every contender picks mini-slot 0.
    struct ZeroRng;

    impl RngCore for ZeroRng {
        fn next_u32(&mut self) -> u32 {
            0
        }
        fn next_u64(&mut self) -> u64 {
            0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0);
        }
    }

    #[test]
    fn lone_contender_wins() {
        let mut rng = stream(1, 0, 0);
        let out = resolve_reservation_slot(&[7], 3, &mut rng);
        assert_eq!(out.winners, vec![7]);
        assert_eq!(out.grants(4).collect::<Vec<_>>(), vec![(7, 2)]);
    }

    #[test]
    fn shared_mini_slot_collides() {
        let out = resolve_reservation_slot(&[1, 2], 4, &mut ZeroRng);
        assert_eq!(out.choices, vec![0, 0]);
        assert!(out.winners.is_empty());
    }

    #[test]
    fn winners_are_ordered_by_mini_slot() {
        let mut rng = stream(5, 0, 0);
        for _ in 0..200 {
            let out = resolve_reservation_slot(&[0, 1, 2, 3, 4], 6, &mut rng);
            let slots: Vec<u32> = out
                .winners
                .iter()
                .map(|w| out.choices[out.contenders.iter().position(|c| c == w).unwrap()])
                .collect();
            assert!(slots.windows(2).all(|p| p[0] < p[1]), "{out:?}");
        }
    }

    #[test]
    fn overflow_winners_get_no_data_slot() {
        let out = FrameOutcome {
            contenders: vec![3, 1, 2],
            choices: vec![0, 1, 2],
            winners: vec![3, 1, 2],
        };
        assert_eq!(out.grants(2).collect::<Vec<_>>(), vec![(3, 2), (1, 3)]);
    }

    #[test]
    fn single_user_full_load_is_periodic() {
        let cfg = SystemConfig::new(1, 2, 1, 1.0, 1.0).unwrap();
        let sim = SimConfig::new(1000, 3).with_warmup(10);
        let stats = simulate_fsard(&cfg, &sim).unwrap();
        assert_eq!(stats.mean_aoi, 3.5);
        assert_eq!(stats.mean_service, Some(3.0));
        assert_eq!(stats.mean_interdeparture, Some(2.0));
        assert_eq!(stats.mean_y, Some(2.0));
        assert_eq!(stats.slots_measured, 2000);
    }

    #[test]
    fn trace_rows_follow_the_age_law() {
        let cfg = SystemConfig::new(3, 3, 2, 0.4, 0.8).unwrap();
        let sim = SimConfig::new(40, 11).with_warmup(0);
        let mut buf = Vec::new();
        let traced = simulate_fsard_traced(&cfg, &sim, &mut buf).unwrap();
        assert_eq!(traced, simulate_fsard(&cfg, &sim).unwrap());

        let mut reader = csv::Reader::from_reader(buf.as_slice());
        let rows: Vec<super::super::trace::TraceRow> =
            reader.deserialize().collect::<Result<_, _>>().unwrap();
        let mut last: Vec<Option<(u64, u64)>> = vec![None; 3];
        let mut delivered_at: Vec<Option<u64>> = vec![None; 3];
        let mut area = 0u64;
        for row in &rows {
            if let Some((slot, aoi)) = last[row.user] {
                if slot != row.slot {
                    assert_eq!(row.slot, slot + 1);
                    if delivered_at[row.user] == Some(slot) {
                        assert!(row.aoi <= aoi + 1);
                    } else {
                        assert_eq!(row.aoi, aoi + 1, "{row:?}");
                    }
                    area += row.aoi;
                } else {
                    assert_eq!(row.aoi, aoi);
                }
            } else {
                assert_eq!(row.aoi, 1);
                area += row.aoi;
            }
            if row.event == TraceEvent::Delivered {
                delivered_at[row.user] = Some(row.slot);
            }
            last[row.user] = Some((row.slot, row.aoi));
        }
        assert_eq!(last[0].unwrap().0, 119);
        let mean = area as f64 / (120.0 * 3.0);
        assert!((mean - traced.mean_aoi).abs() < 1e-12);
    }

    #[test]
    fn oversized_trace_is_refused() {
        let cfg = SystemConfig::new(50, 10, 4, 0.1, 0.5).unwrap();
        let sim = SimConfig::new(1_000_000, 1);
        assert!(matches!(
            simulate_fsard_traced(&cfg, &sim, std::io::sink()),
            Err(SimError::TraceTooLong { .. })
        ));
    }
}
