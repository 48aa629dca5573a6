//! Closed-form average age of FSA-RD.
//!
//! The age process of a tagged user renews at the end of every frame in which
//! one of its updates is delivered. With `Y` the renewal interval and `S` the
//! service time of the delivered update, the average age is
//!
//! ```text
//! Δ = E[Y²] / (2 E[Y]) + E[S] - 1/2
//! ```
//!
//! `Y = W + K` splits into the wait `W` for the next frame that has an update
//! and the remainder `K` until a frame delivers it; `S = l + α` splits into the
//! generation offset `l` before the transmission frame and the frame slot `α`
//! of reception.

use serde::{Deserialize, Serialize};

use super::binomial::binomial_pmf;
use super::occupancy::SingletonTable;
use crate::config::{check_probability, SystemConfig};
use crate::error::{AnalyticError, ConfigError};

/// Relative tolerance between the closed form and the renewal composition.
pub const CROSS_CHECK_RTOL: f64 = 1e-10;

/// p = 1 − (1 − ρ)^M: probability that a user has an update to send in a frame.
pub fn frame_arrival_prob(rho: f64, frame_size: u32) -> Result<f64, ConfigError> {
    check_probability("rho", rho)?;
    if frame_size < 1 {
        return Err(ConfigError::new("frame", frame_size, "[1, inf)"));
    }
    Ok(-(frame_size as f64 * (-rho).ln_1p()).exp_m1())
}

/// (1 − ρ)^M, computed without losing digits for small ρ.
fn no_arrival_prob(rho: f64, frame_size: u32) -> f64 {
    (frame_size as f64 * (-rho).ln_1p()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaitingMoments {
    pub e_w: f64,
    pub e_w2: f64,
}

/// Moments of the wait for the first frame holding an update, in slots.
///
/// The wait is `xM` with probability `(1-p)^x p`.
pub fn waiting_moments(p: f64, frame_size: u32) -> Result<WaitingMoments, ConfigError> {
    check_probability("p", p)?;
    let m = frame_size as f64;
    Ok(WaitingMoments {
        e_w: (1.0 - p) * m / p,
        e_w2: (p * p - 3.0 * p + 2.0) * m * m / (p * p),
    })
}

/// Distribution over the number of *other* users that reserve in a frame,
/// together with the singleton table needed to resolve their contention.
struct Contention {
    /// `others[j]` = Pr(j other users reserve), marginalized over how many
    /// other users hold an update.
    others: Vec<f64>,
    singletons: SingletonTable,
}

impl Contention {
    fn new(cfg: &SystemConfig) -> Result<Self, AnalyticError> {
        cfg.validate()?;
        let p = frame_arrival_prob(cfg.arrival_prob, cfg.frame_size)?;
        let others_count = cfg.num_users - 1;

        let holding = binomial_pmf(others_count, p);
        let mut others = vec![0.0; others_count as usize + 1];
        for (n1, &w1) in holding.iter().enumerate() {
            if w1 == 0.0 {
                continue;
            }
            for (n2, w2) in binomial_pmf(n1 as u32, cfg.reservation_prob)
                .into_iter()
                .enumerate()
            {
                others[n2] += w1 * w2;
            }
        }

        Ok(Self {
            others,
            singletons: SingletonTable::new(cfg.num_users, cfg.mini_slots),
        })
    }

    /// Iterates `(n2, Pr(n2 others reserve), singleton pmf of n2 + 1 contenders)`.
    fn cases(&self) -> impl Iterator<Item = (usize, f64, &super::SingletonPmf)> {
        self.others.iter().enumerate().map(|(n2, &w)| {
            let pmf = self
                .singletons
                .get(n2 as u32 + 1)
                .expect("table covers all contender counts");
            (n2, w, pmf)
        })
    }
}

/// p_s: probability that a reserving user's update is delivered in the frame.
///
/// Sums over the number of other users holding an update, the number of
/// those that reserve, and the number of singleton mini-slots; a reserving
/// user is one of `n2 + 1` exchangeable contenders, and at most `M - 1` of
/// the singletons get a data slot.
pub fn reservation_success_prob(cfg: &SystemConfig) -> Result<f64, AnalyticError> {
    Ok(success_prob_from(&Contention::new(cfg)?, cfg.data_slots()))
}

fn success_prob_from(contention: &Contention, data_slots: u32) -> f64 {
    let data_slots = data_slots as usize;
    let mut p_s = 0.0;
    for (n2, weight, pmf) in contention.cases() {
        let contenders = (n2 + 1) as f64;
        let delivered: f64 = pmf
            .probs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n3, &pr)| pr * n3.min(data_slots) as f64)
            .sum();
        p_s += weight * delivered / contenders;
    }
    p_s
}

/// φ_α for α = 2..=M: probability that a reserving user is delivered in
/// frame slot α (data slot α − 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSlotPmf {
    /// `phi[i]` holds φ_{i + FIRST_DATA_SLOT}.
    phi: Vec<f64>,
}

impl DataSlotPmf {
    /// Frame slot index of the first data slot.
    pub const FIRST_DATA_SLOT: u32 = 2;

    /// φ_α; zero outside `2..=M`.
    pub fn get(&self, alpha: u32) -> f64 {
        alpha
            .checked_sub(Self::FIRST_DATA_SLOT)
            .and_then(|i| self.phi.get(i as usize))
            .copied()
            .unwrap_or(0.0)
    }

    /// `(α, φ_α)` pairs in increasing α.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.phi
            .iter()
            .enumerate()
            .map(|(i, &p)| (i as u32 + Self::FIRST_DATA_SLOT, p))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phi
    }

    pub fn total(&self) -> f64 {
        self.phi.iter().sum()
    }

    /// Σ α φ_α.
    pub fn weighted_slot_sum(&self) -> f64 {
        self.iter().map(|(alpha, p)| alpha as f64 * p).sum()
    }
}

pub fn data_slot_success_pmf(cfg: &SystemConfig) -> Result<DataSlotPmf, AnalyticError> {
    Ok(data_slot_pmf_from(&Contention::new(cfg)?, cfg.data_slots()))
}

fn data_slot_pmf_from(contention: &Contention, data_slots: u32) -> DataSlotPmf {
    let data_slots = data_slots as usize;
    let mut phi = vec![0.0; data_slots];
    for (n2, weight, pmf) in contention.cases() {
        let share = weight / (n2 + 1) as f64;
        // The tagged user is a singleton ranked r-th (1-based) with
        // probability Pr(N_s >= r) / (n2 + 1).
        let ranks = pmf.max_singletons().min(data_slots);
        let mut tail = pmf.tail(ranks + 1);
        for rank in (1..=ranks).rev() {
            tail += pmf.prob(rank);
            phi[rank - 1] += share * tail;
        }
    }
    DataSlotPmf { phi }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceMoments {
    /// E[l], mean generation offset before the transmission frame.
    pub e_l: f64,
    /// E[α], mean reception slot within the transmission frame.
    pub e_alpha: f64,
    pub e_s: f64,
}

pub fn service_moments(cfg: &SystemConfig) -> Result<ServiceMoments, AnalyticError> {
    let contention = Contention::new(cfg)?;
    let phi = data_slot_pmf_from(&contention, cfg.data_slots());
    let p_s = success_prob_from(&contention, cfg.data_slots());
    service_from_parts(cfg, p_s, &phi)
}

fn service_from_parts(
    cfg: &SystemConfig,
    p_s: f64,
    phi: &DataSlotPmf,
) -> Result<ServiceMoments, AnalyticError> {
    if p_s.is_nan() || p_s <= 0.0 {
        return Err(AnalyticError::Degenerate(format!(
            "reservation success probability is {p_s}; no update is ever delivered"
        )));
    }
    let rho = cfg.arrival_prob;
    let m = cfg.frame_size as f64;
    let p = frame_arrival_prob(rho, cfg.frame_size)?;
    let e_l = 1.0 / rho - m * no_arrival_prob(rho, cfg.frame_size) / p;
    let e_alpha = phi.weighted_slot_sum() / p_s;
    Ok(ServiceMoments {
        e_l,
        e_alpha,
        e_s: e_l + e_alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalMoments {
    pub e_k: f64,
    pub e_k2: f64,
    pub e_y: f64,
    pub e_y2: f64,
}

pub fn renewal_moments(cfg: &SystemConfig) -> Result<RenewalMoments, AnalyticError> {
    let p_s = reservation_success_prob(cfg)?;
    renewal_from_parts(cfg, p_s)
}

fn renewal_from_parts(cfg: &SystemConfig, p_s: f64) -> Result<RenewalMoments, AnalyticError> {
    let q = cfg.reservation_prob * p_s;
    if !q.is_finite() || q <= 0.0 {
        return Err(AnalyticError::Degenerate(format!(
            "per-attempt delivery probability γ·p_s = {q}"
        )));
    }
    let m = cfg.frame_size as f64;
    let p = frame_arrival_prob(cfg.arrival_prob, cfg.frame_size)?;
    let WaitingMoments { e_w, e_w2 } = waiting_moments(p, cfg.frame_size)?;

    // E[K] = qM + (1-q)(M + E[W] + E[K])
    let e_k = (m + (1.0 - q) * e_w) / q;
    // E[K²] = qM² + (1-q)(M² + E[K²] + E[W²]) + (1-q)(2E[K]E[W] + 2M(E[K] + E[W]))
    let e_k2 = (m * m + (1.0 - q) * (e_w2 + 2.0 * e_k * e_w + 2.0 * m * (e_k + e_w))) / q;
    let e_y = e_w + e_k;
    let e_y2 = m * m / q + 2.0 * m * m * (1.0 / q - p) / (q * p * p) + m * m * (1.0 - p) / (q * p);

    Ok(RenewalMoments {
        e_k,
        e_k2,
        e_y,
        e_y2,
    })
}

/// Every quantity of the closed-form chain for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub p: f64,
    pub p_s: f64,
    /// φ_α for α = 2..=M.
    pub phi: Vec<f64>,
    pub e_l: f64,
    pub e_alpha: f64,
    pub e_s: f64,
    pub e_w: f64,
    pub e_w2: f64,
    pub e_k: f64,
    pub e_k2: f64,
    pub e_y: f64,
    pub e_y2: f64,
    pub aaoi: f64,
}

/// Average AoI in slots.
///
/// Evaluated with the fully expanded closed form and checked against the
/// renewal composition `E[Y²]/(2E[Y]) + E[S] − 1/2`.
pub fn average_aoi(cfg: &SystemConfig) -> Result<AnalyticReport, AnalyticError> {
    let contention = Contention::new(cfg)?;
    let p = frame_arrival_prob(cfg.arrival_prob, cfg.frame_size)?;
    let p_s = success_prob_from(&contention, cfg.data_slots());
    let phi = data_slot_pmf_from(&contention, cfg.data_slots());
    let service = service_from_parts(cfg, p_s, &phi)?;
    let renewal = renewal_from_parts(cfg, p_s)?;
    let waiting = waiting_moments(p, cfg.frame_size)?;

    let m = cfg.frame_size as f64;
    let rho = cfg.arrival_prob;
    let gamma = cfg.reservation_prob;
    let closed = m / (gamma * p_s * p) - m * no_arrival_prob(rho, cfg.frame_size) / p + 1.0 / rho
        - (m + 1.0) / 2.0
        + phi.weighted_slot_sum() / p_s;
    let composed = renewal.e_y2 / (2.0 * renewal.e_y) + service.e_s - 0.5;

    if !closed.is_finite() || (closed - composed).abs() > CROSS_CHECK_RTOL * composed.abs() {
        return Err(AnalyticError::CrossCheck { closed, composed });
    }

    Ok(AnalyticReport {
        p,
        p_s,
        phi: phi.phi,
        e_l: service.e_l,
        e_alpha: service.e_alpha,
        e_s: service.e_s,
        e_w: waiting.e_w,
        e_w2: waiting.e_w2,
        e_k: renewal.e_k,
        e_k2: renewal.e_k2,
        e_y: renewal.e_y,
        e_y2: renewal.e_y2,
        aaoi: closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u32, m: u32, v: u32, rho: f64, gamma: f64) -> SystemConfig {
        SystemConfig::new(n, m, v, rho, gamma).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn frame_arrival_examples() {
        assert_eq!(frame_arrival_prob(1.0, 5).unwrap(), 1.0);
        assert!(close(frame_arrival_prob(0.3, 1).unwrap(), 0.3, 1e-15));
        assert!(close(
            frame_arrival_prob(0.01, 5).unwrap(),
            1.0 - 0.99f64.powi(5),
            1e-15
        ));
        assert!(close(
            frame_arrival_prob(0.01, 5).unwrap(),
            0.049_009_950_1,
            1e-12
        ));
    }

    #[test]
    fn frame_arrival_domain() {
        assert_eq!(frame_arrival_prob(0.0, 3).unwrap_err().field, "rho");
        assert_eq!(frame_arrival_prob(1.2, 3).unwrap_err().field, "rho");
        assert_eq!(frame_arrival_prob(0.5, 0).unwrap_err().field, "frame");
    }

    #[test]
    fn waiting_examples() {
        assert_eq!(
            waiting_moments(1.0, 4).unwrap(),
            WaitingMoments {
                e_w: 0.0,
                e_w2: 0.0
            }
        );
        let w = waiting_moments(0.5, 2).unwrap();
        assert!(close(w.e_w, 2.0, 1e-15) && close(w.e_w2, 12.0, 1e-15));
        let w = waiting_moments(0.5, 4).unwrap();
        assert!(close(w.e_w, 4.0, 1e-15) && close(w.e_w2, 48.0, 1e-15));
        assert!(waiting_moments(0.0, 4).is_err());
    }

    #[test]
    fn success_prob_examples() {
        assert!(close(
            reservation_success_prob(&cfg(1, 3, 2, 0.5, 1.0)).unwrap(),
            1.0,
            1e-15
        ));
        assert!(close(
            reservation_success_prob(&cfg(2, 3, 2, 1.0, 1.0)).unwrap(),
            0.5,
            1e-15
        ));
        assert!(close(
            reservation_success_prob(&cfg(2, 2, 2, 1.0, 1.0)).unwrap(),
            0.25,
            1e-15
        ));
    }

    #[test]
    fn lone_user_always_succeeds() {
        for m in 2..8 {
            for v in 1..6 {
                let p_s = reservation_success_prob(&cfg(1, m, v, 0.2, 1.0)).unwrap();
                assert!(close(p_s, 1.0, 1e-15), "m={m} v={v}");
            }
        }
    }

    #[test]
    fn data_slot_examples() {
        let phi = data_slot_success_pmf(&cfg(1, 4, 3, 0.5, 1.0)).unwrap();
        assert_eq!(phi.as_slice().len(), 3);
        assert!(close(phi.get(2), 1.0, 1e-15));
        assert_eq!(phi.get(3), 0.0);
        assert_eq!(phi.get(4), 0.0);
        assert_eq!(phi.get(1), 0.0);
        assert_eq!(phi.get(5), 0.0);

        let phi = data_slot_success_pmf(&cfg(2, 3, 2, 1.0, 1.0)).unwrap();
        assert!(close(phi.get(2), 0.25, 1e-15));
        assert!(close(phi.get(3), 0.25, 1e-15));
    }

    #[test]
    fn data_slot_mass_equals_success_prob() {
        for &(n, m, v, rho, gamma) in &[
            (30, 5, 4, 0.02, 0.3),
            (7, 2, 6, 0.4, 0.9),
            (50, 12, 3, 0.08, 0.15),
            (3, 9, 8, 1.0, 1.0),
        ] {
            let c = cfg(n, m, v, rho, gamma);
            let phi = data_slot_success_pmf(&c).unwrap();
            let p_s = reservation_success_prob(&c).unwrap();
            assert!(close(phi.total(), p_s, 1e-12), "{c:?}");
        }
    }

    #[test]
    fn service_examples() {
        let s = service_moments(&cfg(1, 2, 1, 1.0, 1.0)).unwrap();
        assert!(
            close(s.e_l, 1.0, 1e-15) && close(s.e_alpha, 2.0, 1e-15) && close(s.e_s, 3.0, 1e-15)
        );
        let s = service_moments(&cfg(1, 2, 1, 0.5, 1.0)).unwrap();
        assert!(close(s.e_l, 4.0 / 3.0, 1e-14));
        assert!(close(s.e_s, 10.0 / 3.0, 1e-14));
    }

    #[test]
    fn renewal_examples() {
        let r = renewal_moments(&cfg(1, 3, 1, 1.0, 1.0)).unwrap();
        assert!(close(r.e_k, 3.0, 1e-14) && close(r.e_y, 3.0, 1e-14) && close(r.e_y2, 9.0, 1e-13));
        let r = renewal_moments(&cfg(1, 2, 1, 0.5, 1.0)).unwrap();
        assert!(close(r.e_k, 2.0, 1e-14));
        assert!(close(r.e_y, 8.0 / 3.0, 1e-14));
        assert!(r.e_y2 >= r.e_y * r.e_y);
    }

    #[test]
    fn second_moment_closed_form_matches_composition() {
        for &(n, m, v, rho, gamma) in &[
            (30, 5, 4, 0.02, 0.3),
            (4, 3, 2, 0.7, 0.6),
            (12, 8, 5, 0.005, 1.0),
        ] {
            let c = cfg(n, m, v, rho, gamma);
            let p = frame_arrival_prob(rho, m).unwrap();
            let w = waiting_moments(p, m).unwrap();
            let r = renewal_moments(&c).unwrap();
            let composed = w.e_w2 + r.e_k2 + 2.0 * w.e_w * r.e_k;
            assert!((r.e_y2 - composed).abs() <= 1e-10 * r.e_y2, "{c:?}");
            let direct = m as f64 / (gamma * reservation_success_prob(&c).unwrap() * p);
            assert!((r.e_y - direct).abs() <= 1e-10 * direct);
        }
    }

    #[test]
    fn hand_derived_ages() {
        let r = average_aoi(&cfg(1, 2, 1, 1.0, 1.0)).unwrap();
        assert!(close(r.aaoi, 3.5, 1e-12));
        let r = average_aoi(&cfg(1, 3, 1, 1.0, 1.0)).unwrap();
        assert!(close(r.aaoi, 4.0, 1e-12));
    }

    #[test]
    fn guaranteed_collision_is_degenerate() {
        // Two always-active users and a single mini-slot never deliver.
        let c = cfg(2, 3, 1, 1.0, 1.0);
        assert_eq!(reservation_success_prob(&c).unwrap(), 0.0);
        assert!(matches!(average_aoi(&c), Err(AnalyticError::Degenerate(_))));
        assert!(matches!(
            renewal_moments(&c),
            Err(AnalyticError::Degenerate(_))
        ));
        assert!(matches!(
            service_moments(&c),
            Err(AnalyticError::Degenerate(_))
        ));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let bad = SystemConfig {
            num_users: 3,
            frame_size: 4,
            mini_slots: 2,
            arrival_prob: 1.5,
            reservation_prob: 0.5,
        };
        assert!(matches!(average_aoi(&bad), Err(AnalyticError::Config(e)) if e.field == "rho"));
    }

    #[test]
    fn report_bounds() {
        let r = average_aoi(&cfg(30, 5, 4, 0.02, 0.3)).unwrap();
        assert!(r.aaoi >= 1.0);
        assert!(1.0 <= r.e_l && r.e_l <= 5.0);
        assert!(2.0 <= r.e_alpha && r.e_alpha <= 5.0);
        assert!(close(r.e_s, r.e_l + r.e_alpha, 1e-12));
        assert!(close(r.e_y, r.e_w + r.e_k, 1e-12));
        assert_eq!(r.phi.len(), 4);
    }
}
