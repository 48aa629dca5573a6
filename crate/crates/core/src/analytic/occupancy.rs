//! Distribution of the number of singleton mini-slots.
//!
//! When `k` contenders each pick one of `v` mini-slots uniformly, a mini-slot
//! chosen by exactly one contender is a successful reservation. The count of
//! such mini-slots is the classical "singleton cells" occupancy statistic.
//!
//! [`singleton_pmf`] evaluates it with a ball-by-ball dynamic program over
//! `(singleton cells, collided cells)`; every transition weight is a
//! nonnegative ratio, so there is no cancellation. [`singleton_pmf_closed`]
//! evaluates the alternating inclusion-exclusion sum and is only suitable for
//! small instances; it reports when its rounding error bound gets too large.

use serde::{Deserialize, Serialize};

use crate::error::{AnalyticError, ConfigError};

/// Largest tolerated absolute rounding-error bound of the alternating sum.
pub const CLOSED_FORM_ERROR_LIMIT: f64 = 1e-10;

/// Pr(N_s = n) for `contenders` balls in `cells` cells, `n = 0..=min(k, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingletonPmf {
    contenders: u32,
    cells: u32,
    probs: Vec<f64>,
}

impl SingletonPmf {
    pub fn contenders(&self) -> u32 {
        self.contenders
    }

    pub fn cells(&self) -> u32 {
        self.cells
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Zero outside the support.
    pub fn prob(&self, singletons: usize) -> f64 {
        self.probs.get(singletons).copied().unwrap_or(0.0)
    }

    /// Pr(N_s >= from).
    pub fn tail(&self, from: usize) -> f64 {
        self.probs.iter().skip(from).sum()
    }

    /// Largest possible singleton count, `min(k, v)`.
    pub fn max_singletons(&self) -> usize {
        self.probs.len() - 1
    }
}

/// Exact singleton-count distribution via the occupancy dynamic program.
///
/// # Panics
///
/// If `cells` is zero.
pub fn singleton_pmf(contenders: u32, cells: u32) -> SingletonPmf {
    SingletonTable::new(contenders, cells)
        .pmfs
        .pop()
        .expect("table always holds k = 0")
}

/// Singleton distributions for every contender count `0..=max_contenders`,
/// produced by a single pass of the dynamic program.
#[derive(Debug, Clone)]
pub struct SingletonTable {
    pmfs: Vec<SingletonPmf>,
}

impl SingletonTable {
    pub fn new(max_contenders: u32, cells: u32) -> Self {
        assert!(cells >= 1, "at least one mini-slot is required");
        let v = cells as usize;
        let width = v + 1;
        let inv_v = 1.0 / cells as f64;

        // state[s * width + d]: probability of s singleton and d collided cells.
        let mut state = vec![0.0; width * width];
        state[0] = 1.0;
        let mut next = vec![0.0; width * width];

        let mut pmfs = Vec::with_capacity(max_contenders as usize + 1);
        pmfs.push(SingletonPmf {
            contenders: 0,
            cells,
            probs: vec![1.0],
        });

        for k in 1..=max_contenders {
            next.iter_mut().for_each(|x| *x = 0.0);
            for s in 0..=v {
                for d in 0..=(v - s) {
                    let pr = state[s * width + d];
                    if pr == 0.0 {
                        continue;
                    }
                    let empty = v - s - d;
                    if empty > 0 {
                        next[(s + 1) * width + d] += pr * empty as f64 * inv_v;
                    }
                    if s > 0 {
                        next[(s - 1) * width + d + 1] += pr * s as f64 * inv_v;
                    }
                    if d > 0 {
                        next[s * width + d] += pr * d as f64 * inv_v;
                    }
                }
            }
            std::mem::swap(&mut state, &mut next);

            let support = (k as usize).min(v);
            let probs = (0..=support)
                .map(|s| state[s * width..s * width + (v - s) + 1].iter().sum())
                .collect();
            pmfs.push(SingletonPmf {
                contenders: k,
                cells,
                probs,
            });
        }

        Self { pmfs }
    }

    pub fn get(&self, contenders: u32) -> Option<&SingletonPmf> {
        self.pmfs.get(contenders as usize)
    }

    pub fn max_contenders(&self) -> u32 {
        self.pmfs.len() as u32 - 1
    }
}

/// Singleton-count distribution from the alternating closed form
///
/// ```text
/// Pr(N_s = n) = (-1)^n v! k! / (v^k n!) * Σ_{m=n}^{min(v,k)} (-1)^m (v-m)^(k-m) / ((m-n)! (v-m)! (k-m)!)
/// ```
///
/// The terms alternate in sign and grow factorially, so this is an oracle for
/// small `k` and `v` only. Returns [`AnalyticError::LossOfPrecision`] when the
/// accumulated rounding bound exceeds [`CLOSED_FORM_ERROR_LIMIT`].
pub fn singleton_pmf_closed(contenders: u32, cells: u32) -> Result<SingletonPmf, AnalyticError> {
    if contenders < 1 {
        return Err(ConfigError::new("contenders", contenders, "[1, inf)").into());
    }
    if cells < 1 {
        return Err(ConfigError::new("minislots", cells, "[1, inf)").into());
    }
    let k = contenders as usize;
    let v = cells as usize;
    let support = k.min(v);

    let fact = factorials(k.max(v));
    // v! k! / v^k, accumulated as a product to keep the magnitude moderate.
    let mut scale = fact[v];
    for i in 1..=k {
        scale *= i as f64 / v as f64;
    }

    let mut probs = Vec::with_capacity(support + 1);
    let mut worst_bound: f64 = 0.0;
    for n in 0..=support {
        let mut sum = 0.0;
        let mut magnitude = 0.0;
        for m in n..=support {
            let term =
                ((v - m) as f64).powi((k - m) as i32) / (fact[m - n] * fact[v - m] * fact[k - m]);
            sum += if m % 2 == 0 { term } else { -term };
            magnitude += term;
        }
        let prefactor = scale / fact[n];
        let value = if n % 2 == 0 {
            prefactor * sum
        } else {
            -prefactor * sum
        };
        let terms = (support - n + 1) as f64;
        let bound = f64::EPSILON * prefactor * magnitude * (terms + 2.0);
        worst_bound = worst_bound.max(bound);
        probs.push(value);
    }

    if worst_bound > CLOSED_FORM_ERROR_LIMIT {
        return Err(AnalyticError::LossOfPrecision {
            contenders,
            cells,
            bound: worst_bound,
            limit: CLOSED_FORM_ERROR_LIMIT,
        });
    }

    Ok(SingletonPmf {
        contenders,
        cells,
        probs,
    })
}

fn factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    for i in 1..=n {
        out.push(out[i - 1] * i as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_probs(pmf: &SingletonPmf, expected: &[f64], tol: f64) {
        assert_eq!(pmf.probs().len(), expected.len(), "{pmf:?}");
        for (got, want) in pmf.probs().iter().zip(expected) {
            assert!((got - want).abs() <= tol, "{pmf:?} vs {expected:?}");
        }
    }

    #[test]
    fn lone_contender_is_always_a_singleton() {
        assert_probs(&singleton_pmf(1, 4), &[0.0, 1.0], 0.0);
        assert_probs(&singleton_pmf_closed(1, 4).unwrap(), &[0.0, 1.0], 1e-15);
    }

    #[test]
    fn two_contenders_two_cells() {
        assert_probs(&singleton_pmf(2, 2), &[0.5, 0.0, 0.5], 1e-15);
    }

    #[test]
    fn three_contenders_two_cells() {
        assert_probs(&singleton_pmf(3, 2), &[0.25, 0.75, 0.0], 1e-15);
    }

    #[test]
    fn two_contenders_four_cells_closed_form() {
        assert_probs(
            &singleton_pmf_closed(2, 4).unwrap(),
            &[0.25, 0.0, 0.75],
            1e-15,
        );
    }

    #[test]
    fn no_contenders_means_no_singletons() {
        assert_probs(&singleton_pmf(0, 3), &[1.0], 0.0);
    }

    #[test]
    fn single_cell_collides_beyond_one_contender() {
        assert_probs(&singleton_pmf(5, 1), &[1.0, 0.0], 0.0);
    }

    #[test]
    fn one_short_of_all_singletons_is_impossible() {
        for k in 2..12 {
            for v in 1..12 {
                let pmf = singleton_pmf(k, v);
                assert_eq!(pmf.prob(k as usize - 1), 0.0, "k={k} v={v}");
            }
        }
    }

    #[test]
    fn table_rows_match_individual_evaluations() {
        let table = SingletonTable::new(9, 5);
        assert_eq!(table.max_contenders(), 9);
        for k in 0..=9 {
            assert_eq!(table.get(k).unwrap(), &singleton_pmf(k, 5));
        }
        assert!(table.get(10).is_none());
    }

    #[test]
    fn large_instances_stay_normalized() {
        let pmf = singleton_pmf(200, 64);
        let total: f64 = pmf.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(pmf.probs().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn closed_form_flags_cancellation() {
        let err = singleton_pmf_closed(60, 40).unwrap_err();
        assert!(
            matches!(err, AnalyticError::LossOfPrecision { .. }),
            "{err}"
        );
    }

    #[test]
    fn closed_form_rejects_empty_contention() {
        assert!(singleton_pmf_closed(0, 3).is_err());
    }

    #[test]
    fn tail_sums() {
        let pmf = singleton_pmf(3, 2);
        assert!((pmf.tail(0) - 1.0).abs() < 1e-15);
        assert!((pmf.tail(1) - 0.75).abs() < 1e-15);
        assert_eq!(pmf.tail(5), 0.0);
    }
}
