//! Slot-level CSV trace of short FSA-RD runs.
//!
//! Columns are `slot,user,aoi,event`. A slot/user pair with no event gets a
//! single `none` row; a pair with several events (an arrival in the
//! reservation slot and a reservation result, say) gets one row per event.
//! `aoi` is δ at that slot.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Upper bound on slot × user rows for a traced run.
pub const TRACE_ROW_LIMIT: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEvent {
    None,
    Arrival,
    ReserveFail,
    ReserveWin,
    Delivered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub slot: u64,
    pub user: usize,
    pub aoi: u64,
    pub event: TraceEvent,
}

/// Collects the events of one frame, then expands them into rows.
pub(crate) struct FrameTracer<W: Write> {
    out: csv::Writer<W>,
    start: u64,
    start_ages: Vec<u64>,
    /// (reception slot, age right after reception) per user.
    resets: Vec<Option<(u64, u64)>>,
    events: Vec<(u64, usize, TraceEvent)>,
}

impl<W: Write> FrameTracer<W> {
    pub(crate) fn new(out: W, users: usize) -> Self {
        Self {
            out: csv::Writer::from_writer(out),
            start: 0,
            start_ages: vec![0; users],
            resets: vec![None; users],
            events: Vec::new(),
        }
    }

    pub(crate) fn begin_frame(&mut self, start: u64, ages: impl Iterator<Item = u64>) {
        self.start = start;
        self.start_ages.clear();
        self.start_ages.extend(ages);
        self.resets.iter_mut().for_each(|r| *r = None);
        self.events.clear();
    }

    pub(crate) fn event(&mut self, slot: u64, user: usize, event: TraceEvent) {
        self.events.push((slot, user, event));
    }

    pub(crate) fn delivered(&mut self, slot: u64, user: usize, new_age: u64) {
        self.resets[user] = Some((slot, new_age));
        self.event(slot, user, TraceEvent::Delivered);
    }

    pub(crate) fn end_frame(&mut self, frame_size: u32) -> Result<(), SimError> {
        self.events.sort_by_key(|&(slot, user, _)| (slot, user));
        let mut pending = self.events.iter().peekable();
        for slot in self.start..self.start + u64::from(frame_size) {
            for user in 0..self.start_ages.len() {
                let aoi = match self.resets[user] {
                    Some((rx, reset)) if slot > rx => reset + (slot - rx - 1),
                    _ => self.start_ages[user] + (slot - self.start),
                };
                let mut wrote = false;
                while let Some(&&(s, u, event)) = pending.peek() {
                    if (s, u) != (slot, user) {
                        break;
                    }
                    self.out.serialize(TraceRow {
                        slot,
                        user,
                        aoi,
                        event,
                    })?;
                    wrote = true;
                    pending.next();
                }
                if !wrote {
                    self.out.serialize(TraceRow {
                        slot,
                        user,
                        aoi,
                        event: TraceEvent::None,
                    })?;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn finish(mut self) -> Result<(), SimError> {
        self.out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
