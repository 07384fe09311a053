//! Perturbative series for the transition amplitudes.
//!
//! Expanding `exp(j(chi T + conj(chi) T^dagger))` order by order, a photon
//! takes `k` unit steps, `n_u` up with weight `j chi` and `n_d` down with weight
//! `j conj(chi)`, each path carrying `1/k!`. There are `k!/(n_u! n_d!)` paths
//! with the same step counts, so the amplitude to move by `q >= 0` is
//!
//! ```text
//! A_q = sum_s (j chi)^(q+s) (j conj(chi))^s / ((q+s)! s!)  ->  (j exp(j theta))^q J_q(m)
//! ```
//!
//! On the half-line the paths that touch the zero node are forbidden. Each
//! such path ending at `q` pairs with a mirror path ending at `-q` whose steps
//! after the first visit to zero are swapped, which amounts to subtracting
//! `exp(2 j theta q) A_{-q-q0}` from `A_{q-q0}`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::classical_pm::{j_pow, ModulatorSpec};
use crate::error::{domain, Result};

/// Largest order for which paths are enumerated one by one.
pub const MAX_ENUMERATION_ORDER: usize = 12;

/// `1 / (a! b!)`.
fn inverse_factorials(a: u64, b: u64) -> f64 {
    let mut v = 1.0;
    for i in 2..=a {
        v /= i as f64;
    }
    for i in 2..=b {
        v /= i as f64;
    }
    v
}

/// Order-`p` contribution to the sideband-`q` coefficient of the adjoint
/// expansion, without the bias phase:
/// `(j^p / p!) binom(p, s) chi^s conj(chi)^(p-s)` with `2s - p = q`.
pub fn adjoint_term(q: i64, spec: &ModulatorSpec, p: u64) -> Complex64 {
    let p_signed = p as i64;
    if q.abs() > p_signed || (p_signed + q) % 2 != 0 {
        return Complex64::new(0.0, 0.0);
    }
    let up = ((p_signed + q) / 2) as u64;
    let down = p - up;
    let chi = spec.tone.chi();
    j_pow(p_signed)
        * inverse_factorials(up, down)
        * chi.powi(up as i32)
        * chi.conj().powi(down as i32)
}

/// `exp(j phi_b) sum_{p=0}^{p_max} adjoint_term(q, p)`.
pub fn adjoint_expansion(q: i64, spec: &ModulatorSpec, p_max: u64) -> Result<Complex64> {
    if q.unsigned_abs() > p_max {
        return Err(domain(format!("expansion order {p_max} cannot reach sideband {q}")));
    }
    let sum: Complex64 = (0..=p_max).map(|p| adjoint_term(q, spec, p)).sum();
    Ok(spec.bias_factor() * sum)
}

/// The `s`-th term of the path sum for a shift by `q` (either sign): the
/// paths of order `|q| + 2s` with `s` steps against the net direction.
pub fn path_term(q: i64, spec: &ModulatorSpec, s: u64) -> Complex64 {
    let j = Complex64::new(0.0, 1.0);
    let chi = spec.tone.chi();
    let (forward, backward) = if q >= 0 {
        (j * chi, j * chi.conj())
    } else {
        (j * chi.conj(), j * chi)
    };
    let k = q.unsigned_abs();
    forward.powi((k + s) as i32) * backward.powi(s as i32) * inverse_factorials(k + s, s)
}

/// Path sum `sum_{s=0}^{s_max} path_term(q, s)`; the bias phase is not included.
pub fn path_amplitude(q: i64, spec: &ModulatorSpec, s_max: u64) -> Complex64 {
    (0..=s_max).map(|s| path_term(q, spec, s)).sum()
}

/// Half-line amplitude `q0 -> q` (reduced indices) from path sums with the
/// forbidden paths subtracted; equals `D_{q,q0} exp(-j phi_b)` as `s_max` grows.
pub fn forbidden_path_corrected(q: i64, q0: i64, spec: &ModulatorSpec, s_max: u64) -> Result<Complex64> {
    if q < 1 || q0 < 1 {
        return Err(domain(format!("reduced indices must be >= 1, got q = {q}, q0 = {q0}")));
    }
    let direct = path_amplitude(q - q0, spec, s_max);
    let mirrored = path_amplitude(-q - q0, spec, s_max);
    let swap = Complex64::from_polar(1.0, 2.0 * spec.tone.phase() * q as f64);
    Ok(direct - swap * mirrored)
}

/// Number of paths of one order sharing an end node and step counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathCount {
    pub end: i64,
    pub up: usize,
    pub down: usize,
    pub count: u64,
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ENUMERATION_ORDER {
        Err(domain(format!(
            "path enumeration is limited to order {MAX_ENUMERATION_ORDER}, got {order}"
        )))
    } else {
        Ok(())
    }
}

/// Enumerates every up/down sequence of `order` steps from `start`, keeping
/// only those whose nodes all satisfy `allowed`.
fn enumerate(start: i64, order: usize, allowed: impl Fn(i64) -> bool) -> Vec<PathCount> {
    let mut tally: BTreeMap<(i64, usize, usize), u64> = BTreeMap::new();
    for word in 0u32..(1 << order) {
        let mut node = start;
        let mut up = 0;
        let mut ok = true;
        for bit in 0..order {
            if word >> bit & 1 == 1 {
                node += 1;
                up += 1;
            } else {
                node -= 1;
            }
            if !allowed(node) {
                ok = false;
                break;
            }
        }
        if ok {
            *tally.entry((node, up, order - up)).or_insert(0) += 1;
        }
    }
    tally
        .into_iter()
        .map(|((end, up, down), count)| PathCount { end, up, down, count })
        .collect()
}

/// Unrestricted paths of the given order, grouped by `(up, down)`; `end` is the
/// net offset `up - down`.
pub fn path_counts(order: usize) -> Result<Vec<PathCount>> {
    check_order(order)?;
    Ok(enumerate(0, order, |_| true))
}

/// Paths of the given order starting at reduced index `q0` that never visit a
/// node below 1; `end` is the final reduced index.
pub fn allowed_path_counts(q0: i64, order: usize) -> Result<Vec<PathCount>> {
    check_order(order)?;
    if q0 < 1 {
        return Err(domain(format!("start node must be >= 1, got {q0}")));
    }
    Ok(enumerate(q0, order, |n| n >= 1))
}
