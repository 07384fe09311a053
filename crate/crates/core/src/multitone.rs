//! Several RF tones driving the same modulator.
//!
//! The exact operator exponentiates the sum of the per-tone generators. Three
//! approximations are offered:
//!
//! - [`two_tone_spectrum`]: the factored product `S_N S_M` (tone 2 applied
//!   first), exact per factor on the positive-frequency modes, which drops
//!   the commutator of the two generators;
//! - [`multitone_large_carrier`]: the product of classical Bessel factors,
//!   valid far above the zero mode;
//! - [`multitone_small_m`]: carrier plus first-order sidebands for small indices.
//!
//! [`combined_oracle`] evaluates the exact operator on a finite window.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::bessel;
use crate::classical_pm::{carson_window, reduce_angle, ModulationTone, ModulatorSpec, DEFAULT_SAFETY};
use crate::error::{domain, Error, Result};
use crate::modes::ModeIndex;
use crate::oracle::{self, GeneratorMatrix};
use crate::scattering::{scatter_single_photon, SpectrumLine};

/// Largest modulation index accepted by [`multitone_small_m`].
pub const SMALL_INDEX_LIMIT: f64 = 0.2;

/// Ordered tones plus a shared bias phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneSet {
    tones: Vec<ModulationTone>,
    bias_phase: f64,
}

impl ToneSet {
    pub fn new(tones: Vec<ModulationTone>, bias_phase: f64) -> Result<Self> {
        if tones.is_empty() {
            return Err(domain("a tone set needs at least one tone"));
        }
        if !bias_phase.is_finite() {
            return Err(domain(format!("bias phase must be finite, got {bias_phase}")));
        }
        Ok(ToneSet {
            tones,
            bias_phase: reduce_angle(bias_phase),
        })
    }

    pub fn tones(&self) -> &[ModulationTone] {
        &self.tones
    }

    pub fn bias_phase(&self) -> f64 {
        self.bias_phase
    }

    pub fn len(&self) -> usize {
        self.tones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tones.is_empty()
    }

    /// Same tones in reverse order.
    pub fn reversed(&self) -> ToneSet {
        ToneSet {
            tones: self.tones.iter().rev().copied().collect(),
            bias_phase: self.bias_phase,
        }
    }

    fn bias_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.bias_phase)
    }

    /// Largest modulation index among the tones.
    pub fn max_index(&self) -> f64 {
        self.tones.iter().map(|t| t.index()).fold(0.0, f64::max)
    }
}

fn into_lines(amplitudes: BTreeMap<i64, Complex64>) -> Result<Vec<SpectrumLine>> {
    amplitudes
        .into_iter()
        .filter(|(_, a)| *a != Complex64::new(0.0, 0.0))
        .map(|(mode, a)| Ok(SpectrumLine::new(ModeIndex::new(mode)?, a)))
        .collect()
}

/// Factored two-tone spectrum: tone 2 (step `M`) acts first, then tone 1
/// (step `N`) on every resulting line; lines meeting on a mode are added.
pub fn two_tone_spectrum(n0: ModeIndex, tones: &ToneSet, tail_tol: f64) -> Result<Vec<SpectrumLine>> {
    if tones.len() != 2 {
        return Err(domain(format!("two-tone spectrum needs exactly 2 tones, got {}", tones.len())));
    }
    let first = ModulatorSpec::new(tones.tones[1], 0.0)?;
    let second = ModulatorSpec::new(tones.tones[0], 0.0)?;
    let bias = tones.bias_factor();
    let mut out: BTreeMap<i64, Complex64> = BTreeMap::new();
    for inner in scatter_single_photon(n0, &first, tail_tol)? {
        for outer in scatter_single_photon(inner.mode, &second, tail_tol)? {
            *out.entry(outer.mode.as_i64()).or_default() += outer.amplitude * inner.amplitude;
        }
    }
    for a in out.values_mut() {
        *a *= bias;
    }
    into_lines(out)
}

/// Classical product form: amplitude at `n0 + sum_i q_i N_i` is
/// `exp(j phi_b) prod_i (j exp(j theta_i))^q_i J_q_i(m_i)`, `|q_i| <= q_window_per_tone`,
/// summed over index tuples landing on the same mode.
pub fn multitone_large_carrier(
    n0: ModeIndex,
    tones: &ToneSet,
    q_window_per_tone: usize,
) -> Result<Vec<SpectrumLine>> {
    let w = q_window_per_tone as i64;
    let mut offsets: BTreeMap<i64, Complex64> = BTreeMap::from([(0, tones.bias_factor())]);
    for tone in &tones.tones {
        let row = bessel::row_unchecked(tone.index(), q_window_per_tone);
        let factors: Vec<(i64, Complex64)> = (-w..=w)
            .map(|q| (q * tone.step() as i64, tone.sideband_phase(q) * row.get(q)))
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        let mut next: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&offset, &a) in &offsets {
            for &(shift, c) in &factors {
                *next.entry(offset + shift).or_default() += a * c;
            }
        }
        offsets = next;
    }
    if let Some((&lowest, _)) = offsets.iter().next() {
        let mode = n0.as_i64() + lowest;
        if mode < 1 {
            return Err(Error::UnphysicalMode(mode));
        }
    }
    into_lines(
        offsets
            .into_iter()
            .map(|(offset, a)| (n0.as_i64() + offset, a))
            .collect(),
    )
}

/// Carrier and first-order sidebands for small modulation indices; every
/// second-order line is omitted.
pub fn multitone_small_m(n0: ModeIndex, tones: &ToneSet) -> Result<Vec<SpectrumLine>> {
    if let Some(t) = tones.tones.iter().find(|t| t.index() > SMALL_INDEX_LIMIT) {
        return Err(domain(format!(
            "small-index approximation needs m <= {SMALL_INDEX_LIMIT}, got {}",
            t.index()
        )));
    }
    let widest = tones.tones.iter().map(|t| t.step()).max().unwrap_or(0);
    if n0.get() <= widest {
        return Err(domain(format!("carrier mode {n0} must exceed the largest step {widest}")));
    }
    let j0: Vec<f64> = tones.tones.iter().map(|t| bessel::jn(0, t.index())).collect();
    let bias = tones.bias_factor();
    let n = n0.as_i64();
    let j = Complex64::new(0.0, 1.0);

    let mut out: BTreeMap<i64, Complex64> = BTreeMap::new();
    out.insert(n, bias * j0.iter().product::<f64>());
    for (k, tone) in tones.tones.iter().enumerate() {
        let others: f64 = j0
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, v)| v)
            .product();
        let weight = bias * j * (0.5 * tone.index()) * others;
        let step = tone.step() as i64;
        *out.entry(n + step).or_default() += weight * Complex64::from_polar(1.0, tone.phase());
        *out.entry(n - step).or_default() += weight * Complex64::from_polar(1.0, -tone.phase());
    }
    into_lines(out)
}

/// Smallest window accepted by [`combined_oracle`].
pub fn minimum_combined_window(n0: ModeIndex, tones: &ToneSet) -> usize {
    n0.get() as usize
        + tones
            .tones
            .iter()
            .map(|t| t.step() as usize * carson_window(t.index(), DEFAULT_SAFETY))
            .sum::<usize>()
}

/// Exact multitone amplitudes over modes `1..=size` for input mode `n0`,
/// from the exponential of the summed generators.
pub fn combined_oracle(n0: ModeIndex, tones: &ToneSet, size: usize) -> Result<Vec<Complex64>> {
    let needed = minimum_combined_window(n0, tones);
    if size < needed {
        return Err(domain(format!("window of {size} modes is below the required {needed}")));
    }
    let mut g = GeneratorMatrix::zeros(size);
    for tone in &tones.tones {
        g.add_tone(tone)?;
    }
    g.add_bias(tones.bias_phase);
    let column = oracle::exponentiate(&g)?.column(n0)?;
    let edge = tones.tones.iter().map(oracle::edge_width).max().unwrap_or(0);
    oracle::check_leakage(&column, edge)?;
    Ok(column)
}

/// `max_n |approx(n) - exact(n)|` over every mode present in either; `exact`
/// holds modes `1..=exact.len()` and lines outside it count in full.
pub fn max_deviation(lines: &[SpectrumLine], exact: &[Complex64]) -> f64 {
    let mut approx: BTreeMap<u64, Complex64> = BTreeMap::new();
    for l in lines {
        *approx.entry(l.mode.get()).or_default() += l.amplitude;
    }
    let inside = exact
        .iter()
        .zip(1u64..)
        .map(|(e, n)| (approx.get(&n).copied().unwrap_or_default() - e).norm());
    let outside = approx
        .range(exact.len() as u64 + 1..)
        .map(|(_, a)| a.norm());
    inside.chain(outside).fold(0.0, f64::max)
}

/// Total probability carried by a list of lines.
pub fn total_probability(lines: &[SpectrumLine]) -> f64 {
    lines.iter().map(|l| l.probability).sum()
}
