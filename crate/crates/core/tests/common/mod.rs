//! Brute-force reference computations shared by the integration tests.

#![allow(dead_code)]

use fsard_aoi::SystemConfig;

/// Singleton-count distribution by walking all `v^k` placements.
pub fn enumerate_singletons(k: u32, v: u32) -> Vec<f64> {
    let total = (v as u64).pow(k);
    let mut counts = vec![0u64; k as usize + 1];
    let mut occupancy = vec![0u32; v as usize];
    for code in 0..total {
        occupancy.iter_mut().for_each(|c| *c = 0);
        let mut rest = code;
        for _ in 0..k {
            occupancy[(rest % v as u64) as usize] += 1;
            rest /= v as u64;
        }
        counts[occupancy.iter().filter(|&&c| c == 1).count()] += 1;
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

fn frame_arrival_prob(cfg: &SystemConfig) -> f64 {
    1.0 - (1.0 - cfg.arrival_prob).powi(cfg.frame_size as i32)
}

/// φ_α for α = 2..=M, by enumerating the mini-slot choice of every other
/// user (silent, or reserving in one of V mini-slots) and of a tagged user
/// that reserves. Winners are served in mini-slot order.
pub fn enumerate_phi(cfg: &SystemConfig) -> Vec<f64> {
    let v = cfg.mini_slots as usize;
    let others = cfg.num_users as usize - 1;
    let reserve = frame_arrival_prob(cfg) * cfg.reservation_prob;
    let mut phi = vec![0.0; cfg.frame_size as usize - 1];
    let states = (v + 1) as u64;
    let mut choice = vec![0usize; others];
    for code in 0..states.pow(others as u32) {
        let mut rest = code;
        let mut weight = 1.0;
        for c in choice.iter_mut() {
            *c = (rest % states) as usize;
            rest /= states;
            weight *= if *c == v {
                1.0 - reserve
            } else {
                reserve / v as f64
            };
        }
        for tagged in 0..v {
            let mut occupancy = vec![0u32; v];
            occupancy[tagged] += 1;
            for &c in choice.iter().filter(|&&c| c < v) {
                occupancy[c] += 1;
            }
            if occupancy[tagged] != 1 {
                continue;
            }
            let rank = occupancy[..tagged].iter().filter(|&&c| c == 1).count();
            if rank < phi.len() {
                phi[rank] += weight / v as f64;
            }
        }
    }
    phi
}

/// Mean offset between the latest arrival of a frame and the frame end,
/// counting the last slot as 1.
pub fn mean_offset(cfg: &SystemConfig) -> f64 {
    let rho = cfg.arrival_prob;
    let total: f64 = (1..=cfg.frame_size)
        .map(|l| l as f64 * rho * (1.0 - rho).powi(l as i32 - 1))
        .sum();
    total / frame_arrival_prob(cfg)
}

/// Average age assembled from enumerated φ, the offset sum and the renewal
/// interval taken as M times a geometric number of frames.
pub fn reference_aaoi(cfg: &SystemConfig) -> f64 {
    let phi = enumerate_phi(cfg);
    let p_s: f64 = phi.iter().sum();
    let e_alpha: f64 = phi
        .iter()
        .enumerate()
        .map(|(i, f)| (i + 2) as f64 * f)
        .sum::<f64>()
        / p_s;
    let success = frame_arrival_prob(cfg) * cfg.reservation_prob * p_s;
    let m = cfg.frame_size as f64;
    let e_y = m / success;
    let e_y2 = m * m * (2.0 - success) / (success * success);
    e_y2 / (2.0 * e_y) + mean_offset(cfg) + e_alpha - 0.5
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
