//! The positive-frequency scattering operator.
//!
//! Restricting the generator to modes `n >= 1` turns each residue class
//! `{q*N - r0 : q >= 1}` into a half-infinite chain. Its single-photon
//! transition amplitudes are the classical ones minus a reflected term:
//!
//! ```text
//! D_{q,q0} = exp(j phi_b) (j exp(j theta))^(q-q0) [J_{q-q0}(m) - (-1)^q0 J_{q+q0}(m)],  q >= 1
//! ```
//!
//! and `D_{q,q0} = 0` for `q <= 0`. The matrix `D` is unitary on each class
//! and classes never mix.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bessel::{self, BesselRow};
use crate::classical_pm::{self, carson_window, ModulatorSpec, DEFAULT_SAFETY};
use crate::error::{domain, Result};
use crate::modes::{decompose, IndexDecomposition, ModeIndex};

/// Upper limit on the single-photon tail tolerance.
pub const MAX_TAIL_TOL: f64 = 1e-6;

/// Initial Carson safety margin for single-photon windows; doubled as needed.
const ROW_SAFETY: usize = 20;

/// One output line of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumLine {
    pub mode: ModeIndex,
    pub amplitude: Complex64,
    pub probability: f64,
}

impl SpectrumLine {
    pub fn new(mode: ModeIndex, amplitude: Complex64) -> Self {
        SpectrumLine {
            mode,
            amplitude,
            probability: amplitude.norm_sqr(),
        }
    }
}

/// A line of the unrestricted model, which may sit at a non-positive mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveLine {
    pub mode: i64,
    pub order: i64,
    pub amplitude: Complex64,
    pub probability: f64,
    pub physical: bool,
}

/// Column `q0` of `D` restricted to `q = 1..=q_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumTransitionRow {
    pub decomposition: IndexDecomposition,
    pub step: u64,
    /// `(q, D_{q,q0})` for every `q >= 1` with a nonzero amplitude.
    pub entries: Vec<(u64, Complex64)>,
    /// Probability carried by the omitted orders `q > q_max`.
    pub tail_bound: f64,
}

impl QuantumTransitionRow {
    pub fn lines(&self) -> Vec<SpectrumLine> {
        self.entries
            .iter()
            .map(|&(q, amp)| {
                let mode = ModeIndex::new(self.decomposition.mode(q, self.step) as i64)
                    .expect("q >= 1 and r0 < N give a positive mode");
                SpectrumLine::new(mode, amp)
            })
            .collect()
    }
}

fn check_q0(q0: i64) -> Result<()> {
    if q0 < 1 {
        Err(domain(format!("input reduced index q0 must be >= 1, got {q0}")))
    } else {
        Ok(())
    }
}

/// `D_{q,q0}` from a precomputed Bessel row covering order `q + q0`.
fn d_from_row(q: i64, q0: i64, spec: &ModulatorSpec, row: &BesselRow) -> Complex64 {
    if q < 1 {
        return Complex64::new(0.0, 0.0);
    }
    let parity = if q0 % 2 == 0 { 1.0 } else { -1.0 };
    let bracket = row.get(q - q0) - parity * row.get(q + q0);
    spec.bias_factor() * spec.tone.sideband_phase(q - q0) * bracket
}

/// Transition amplitude `D_{q,q0}` of the positive-frequency operator.
pub fn d_coefficient(q: i64, q0: i64, spec: &ModulatorSpec) -> Result<Complex64> {
    check_q0(q0)?;
    if q < 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let row = bessel::row_unchecked(spec.index(), (q + q0) as usize);
    Ok(d_from_row(q, q0, spec, &row))
}

/// `D_{q,q0}` for `q = 1..=q_max` together with the next `look_ahead` orders' probability.
fn column(q0: i64, spec: &ModulatorSpec, q_max: usize, look_ahead: usize) -> (Vec<Complex64>, f64) {
    let row = bessel::row_unchecked(spec.index(), q_max + look_ahead + q0 as usize);
    let values = (1..=q_max as i64).map(|q| d_from_row(q, q0, spec, &row)).collect();
    let tail = (q_max + 1..=q_max + look_ahead)
        .map(|q| d_from_row(q as i64, q0, spec, &row).norm_sqr())
        .sum();
    (values, tail)
}

fn check_tail_tol(tail_tol: f64) -> Result<()> {
    if tail_tol > 0.0 && tail_tol <= MAX_TAIL_TOL {
        Ok(())
    } else {
        Err(domain(format!("tail tolerance must lie in (0, {MAX_TAIL_TOL:e}], got {tail_tol}")))
    }
}

/// Transition row for a photon in mode `n0`, grown until the omitted
/// probability is at most `tail_tol`.
pub fn transition_row(n0: ModeIndex, spec: &ModulatorSpec, tail_tol: f64) -> Result<QuantumTransitionRow> {
    check_tail_tol(tail_tol)?;
    let step = spec.step();
    let decomposition = decompose(n0, step)?;
    let q0 = decomposition.q0 as i64;
    let m = spec.index();
    let look_ahead = carson_window(m, DEFAULT_SAFETY);

    let mut q_max = carson_window(m, ROW_SAFETY) + q0 as usize;
    let (values, tail) = loop {
        let (values, tail) = column(q0, spec, q_max, look_ahead);
        if tail <= tail_tol {
            break (values, tail);
        }
        q_max *= 2;
    };
    let entries = values
        .into_iter()
        .zip(1u64..)
        .filter(|(amp, _)| *amp != Complex64::new(0.0, 0.0))
        .map(|(amp, q)| (q, amp))
        .collect();
    Ok(QuantumTransitionRow {
        decomposition,
        step,
        entries,
        tail_bound: tail,
    })
}

/// Output spectrum of a single photon entering in mode `n0`.
pub fn scatter_single_photon(n0: ModeIndex, spec: &ModulatorSpec, tail_tol: f64) -> Result<Vec<SpectrumLine>> {
    Ok(transition_row(n0, spec, tail_tol)?.lines())
}

/// Linear canonical transformation of a multimode coherent amplitude set.
///
/// Input modes are grouped by residue class; each class is transformed
/// independently with a fixed summation order, so the result does not depend
/// on how the classes are scheduled across threads.
pub fn scatter_coherent(
    alpha: &BTreeMap<ModeIndex, Complex64>,
    spec: &ModulatorSpec,
    tail_tol: f64,
) -> Result<BTreeMap<ModeIndex, Complex64>> {
    check_tail_tol(tail_tol)?;
    let step = spec.step();
    let mut classes: BTreeMap<u64, Vec<(ModeIndex, Complex64)>> = BTreeMap::new();
    for (&n, &a) in alpha {
        classes.entry(decompose(n, step)?.r0).or_default().push((n, a));
    }
    let classes: Vec<_> = classes.into_values().collect();
    let partial: Vec<Result<BTreeMap<ModeIndex, Complex64>>> = classes
        .par_iter()
        .map(|members| {
            let mut out = BTreeMap::new();
            for &(n0, a) in members {
                for line in scatter_single_photon(n0, spec, tail_tol)? {
                    *out.entry(line.mode).or_insert_with(Complex64::default) += line.amplitude * a;
                }
            }
            Ok(out)
        })
        .collect();
    let mut out = BTreeMap::new();
    for class in partial {
        out.extend(class?);
    }
    Ok(out)
}

/// `|sum_{q=1}^{q_max} conj(D_{q,p0}) D_{q,q0} - delta_{p0,q0}|`.
pub fn unitarity_defect(p0: i64, q0: i64, spec: &ModulatorSpec, q_max: usize) -> Result<f64> {
    check_q0(p0)?;
    check_q0(q0)?;
    let needed = carson_window(spec.index(), DEFAULT_SAFETY) + p0.max(q0) as usize;
    if q_max < needed {
        return Err(domain(format!("q_max = {q_max} is below the required {needed}")));
    }
    let row = bessel::row_unchecked(spec.index(), q_max + p0.max(q0) as usize);
    let overlap: Complex64 = (1..=q_max as i64)
        .map(|q| d_from_row(q, p0, spec, &row).conj() * d_from_row(q, q0, spec, &row))
        .sum();
    let delta = if p0 == q0 { 1.0 } else { 0.0 };
    Ok((overlap - delta).norm())
}

/// Unrestricted single-photon spectrum `C_q` at modes `n0 + q*N`, `|q| <= q_window`.
///
/// Lines at modes `<= 0` are kept and flagged unphysical.
pub fn naive_scatter_single_photon(n0: ModeIndex, spec: &ModulatorSpec, q_window: usize) -> Result<Vec<NaiveLine>> {
    let minimum = carson_window(spec.index(), 0);
    if q_window < minimum {
        return Err(domain(format!("q_window = {q_window} is below Carson's window {minimum}")));
    }
    let step = spec.step() as i64;
    let w = q_window as i64;
    Ok((-w..=w)
        .filter_map(|q| {
            let amplitude = classical_pm::coefficient(q, spec);
            if amplitude == Complex64::new(0.0, 0.0) {
                return None;
            }
            let mode = n0.as_i64() + q * step;
            Some(NaiveLine {
                mode,
                order: q,
                amplitude,
                probability: amplitude.norm_sqr(),
                physical: mode >= 1,
            })
        })
        .collect())
}
