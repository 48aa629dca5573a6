/// Binomial(n, p) probabilities for `0..=n`.
///
/// Weights are built from the successive ratio
/// `Pr(j+1) / Pr(j) = (n-j)/(j+1) * p/(1-p)` in the log domain, so no
/// factorial of `n` is ever formed and large `n` neither overflows nor
/// underflows to an all-zero vector.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    debug_assert!((0.0..=1.0).contains(&p));
    let len = n as usize + 1;
    if p <= 0.0 {
        let mut out = vec![0.0; len];
        out[0] = 1.0;
        return out;
    }
    if p >= 1.0 {
        let mut out = vec![0.0; len];
        out[n as usize] = 1.0;
        return out;
    }

    let log_odds = p.ln() - (-p).ln_1p();
    let mut log_weights = Vec::with_capacity(len);
    let mut current = n as f64 * (-p).ln_1p();
    log_weights.push(current);
    for j in 0..n {
        current += ((n - j) as f64 / (j + 1) as f64).ln() + log_odds;
        log_weights.push(current);
    }
    log_weights.into_iter().map(f64::exp).collect()
}
