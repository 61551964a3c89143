//! Sample-size formulas of the learner and its subroutines.
//!
//! Each formula takes a multiplier; `1.0` gives the exact counts the
//! analysis calls for.  Results are clamped to at least one.

fn ceil_count(x: f64) -> u64 {
    if x.is_nan() || x <= 1.0 {
        1
    } else {
        x.ceil() as u64
    }
}

fn qpow(q: u32, e: usize) -> f64 {
    (q as f64).powi(e as i32)
}

/// Constant check: `ceil(q^k ln(2/delta))`.
pub fn check_const_samples(q: u32, k: usize, delta: f64, mult: f64) -> u64 {
    ceil_count(mult * qpow(q, k) * (2.0 / delta).ln())
}

/// Relevance check, per value in `F_p`: `ceil(2 q^(2k) ln(p/delta))`.
pub fn check_rc_samples(q: u32, p: u32, k: usize, delta: f64, mult: f64) -> u64 {
    ceil_count(mult * 2.0 * qpow(q, 2 * k) * (p as f64 / delta).ln())
}

/// Correlation check, per value in `F_q`: `ceil((2 q^4 / rho^2) ln(q/delta))`.
pub fn check_cor_samples(q: u32, rho: f64, delta: f64, mult: f64) -> u64 {
    ceil_count(mult * 2.0 * qpow(q, 4) / (rho * rho) * (q as f64 / delta).ln())
}

/// Projection trials: `ceil(q^(k+2) ln(4/delta))`.
pub fn add_rc_trials(q: u32, k: usize, delta: f64, mult: f64) -> u64 {
    ceil_count(mult * qpow(q, k + 2) * (4.0 / delta).ln())
}

/// Rows of a split-and-list instance: `ceil((8 q^6 / rho^2) ln 4)`.
pub fn ldme_rows(q: u32, rho: f64, mult: f64) -> u64 {
    ceil_count(mult * 8.0 * qpow(q, 6) / (rho * rho) * 4f64.ln())
}

/// Repeats per split configuration: `ceil(log2(2/delta))`.
pub fn ldme_repeats(delta: f64) -> u64 {
    ceil_count((2.0 / delta).log2())
}

/// LDME runs per projection in the learner: `ceil(log2(4/delta))`.
pub fn add_rc_ldme_repeats(delta: f64) -> u64 {
    ceil_count((4.0 / delta).log2())
}
