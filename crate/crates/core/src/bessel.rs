//! Integer-order Bessel functions of the first kind, `J_q(m)` for real `m >= 0`.
//!
//! Two evaluation routes:
//!
//! - the ascending series `J_q(m) = (m/2)^q * sum_n (-1)^n (m/2)^(2n) / (n! (q+n)!)`,
//!   used for `m <= 2` and for orders `q >= m^2` where the alternating terms
//!   cannot cancel badly;
//! - Miller's backward recurrence `J_{k-1} = (2k/m) J_k - J_{k+1}` started well
//!   above both the requested order and the turning point `k ~ m`. The
//!   unnormalized sequence is scaled so that `J_0^2 + 2 sum_k J_k^2 = 1`; the
//!   overall sign comes from `J_0 + 2 sum_k J_{2k} = 1`.

use crate::error::{domain, Result};

/// Largest order accepted by [`bessel_j`].
pub const MAX_ORDER: u64 = 1_000_000;

/// Argument at or below which the ascending series is used for every order.
const SERIES_LIMIT: f64 = 2.0;

/// Rescaling threshold for the unnormalized backward recurrence.
const RESCALE_AT: f64 = 1e150;

/// `J_0(m) .. J_{q_max}(m)` for one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRow {
    m: f64,
    values: Vec<f64>,
}

impl BesselRow {
    pub fn argument(&self) -> f64 {
        self.m
    }

    pub fn q_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `J_q(m)` for any signed order; orders beyond the row are treated as 0.
    pub fn get(&self, q: i64) -> f64 {
        let k = q.unsigned_abs() as usize;
        let v = self.values.get(k).copied().unwrap_or(0.0);
        if q < 0 && k % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

fn check_argument(m: f64) -> Result<()> {
    if m.is_finite() && m >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("Bessel argument must be finite and >= 0, got {m}")))
    }
}

/// `J_q(m)`; negative orders through `J_{-q} = (-1)^q J_q`.
pub fn bessel_j(q: i64, m: f64) -> Result<f64> {
    check_argument(m)?;
    if q.unsigned_abs() > MAX_ORDER {
        return Err(domain(format!("Bessel order {q} exceeds {MAX_ORDER}")));
    }
    Ok(jn(q, m))
}

/// Row of `J_0(m) .. J_{q_max}(m)`.
pub fn bessel_row(m: f64, q_max: usize) -> Result<BesselRow> {
    check_argument(m)?;
    Ok(row_unchecked(m, q_max))
}

/// Unvalidated single-order evaluation for internal callers with `m >= 0`.
pub(crate) fn jn(q: i64, m: f64) -> f64 {
    let k = q.unsigned_abs();
    let v = if uses_series(k, m) {
        series(k, m)
    } else {
        miller(m, k as usize)[k as usize]
    };
    if q < 0 && k % 2 == 1 {
        -v
    } else {
        v
    }
}

pub(crate) fn row_unchecked(m: f64, q_max: usize) -> BesselRow {
    let values = if m == 0.0 {
        let mut v = vec![0.0; q_max + 1];
        v[0] = 1.0;
        v
    } else if m <= SERIES_LIMIT {
        (0..=q_max as u64).map(|k| series(k, m)).collect()
    } else {
        miller(m, q_max)
    };
    BesselRow { m, values }
}

fn uses_series(k: u64, m: f64) -> bool {
    m <= SERIES_LIMIT || k as f64 >= m * m
}

/// Ascending series for `J_k(m)`, `k >= 0`.
fn series(k: u64, m: f64) -> f64 {
    if m == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * m;
    // (m/2)^k / k!, accumulated factor by factor so it underflows gracefully.
    let mut lead = 1.0;
    for i in 1..=k {
        lead *= half / i as f64;
        if lead == 0.0 {
            return 0.0;
        }
    }
    let x = half * half;
    let mut term = lead;
    let mut sum = lead;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -x / (n * (k as f64 + n));
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-3 * sum.abs() || term == 0.0 {
            break;
        }
    }
    sum
}

/// Starting order for the backward recurrence.
fn miller_start(m: f64, q_max: usize) -> usize {
    let base = q_max.max(m.ceil() as usize);
    base + (20.0 + m + 8.0 * m.cbrt()).ceil() as usize
}

/// Normalized backward recurrence returning `J_0(m) .. J_{q_max}(m)`, `m > 0`.
fn miller(m: f64, q_max: usize) -> Vec<f64> {
    let start = miller_start(m, q_max);
    let mut out = vec![0.0; q_max + 1];
    let two_over_m = 2.0 / m;

    let mut upper = 0.0; // f_{k+1}
    let mut current = 1.0; // f_k
    let mut sum_sq = 0.0;
    let mut even_sum = 0.0;
    let mut k = start;
    loop {
        if k <= q_max {
            out[k] = current;
        }
        if k == 0 {
            sum_sq += current * current;
            even_sum += current;
            break;
        }
        sum_sq += 2.0 * current * current;
        if k.is_multiple_of(2) {
            even_sum += 2.0 * current;
        }
        let lower = (k as f64) * two_over_m * current - upper;
        upper = current;
        current = lower;
        k -= 1;
        if current.abs() > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            current *= s;
            upper *= s;
            sum_sq *= s * s;
            even_sum *= s;
            for v in out.iter_mut().skip(k + 1) {
                *v *= s;
            }
        }
    }
    let scale = sum_sq.sqrt().recip().copysign(even_sum);
    for v in &mut out {
        *v *= scale;
    }
    out
}
