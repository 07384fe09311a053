//! Classical phase-modulator algebra.
//!
//! A tone of index `m`, phase `theta` and step `N`, together with the bias
//! phase `phi_b`, maps the carrier onto sideband `q` with amplitude
//!
//! ```text
//! C_q = exp(j phi_b) (j exp(j theta))^q J_q(m)
//! ```
//!
//! Read as an operator on single photons this is the unrestricted model: it
//! happily produces sidebands at non-positive mode indices. Offsets here are
//! carrier-relative signed integers; deciding which are physical is left to
//! [`crate::scattering`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bessel;
use crate::error::{domain, Result};

/// Safety margin added to Carson's rule for default truncation windows.
pub const DEFAULT_SAFETY: usize = 40;

/// Reduces an angle to `(-pi, pi]`.
pub(crate) fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `j^q`, exact for every integer `q`.
pub(crate) fn j_pow(q: i64) -> Complex64 {
    match q.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// One sinusoidal drive tone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationTone {
    index: f64,
    phase: f64,
    step: u64,
}

impl ModulationTone {
    /// `index` is the modulation index `m >= 0`, `phase` the RF phase in
    /// radians and `step` the modulation frequency in mode units (`N >= 1`).
    pub fn new(index: f64, phase: f64, step: u64) -> Result<Self> {
        if !(index.is_finite() && index >= 0.0) {
            return Err(domain(format!("modulation index must be finite and >= 0, got {index}")));
        }
        if !phase.is_finite() {
            return Err(domain(format!("tone phase must be finite, got {phase}")));
        }
        if step == 0 {
            return Err(domain("frequency step N must be >= 1"));
        }
        Ok(ModulationTone {
            index,
            phase: reduce_angle(phase),
            step,
        })
    }

    pub fn index(&self) -> f64 {
        self.index
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Coupling constant `chi = exp(j theta) m / 2` of the generator.
    pub fn chi(&self) -> Complex64 {
        Complex64::from_polar(0.5 * self.index, self.phase)
    }

    /// `(j exp(j theta))^q`.
    pub fn sideband_phase(&self, q: i64) -> Complex64 {
        j_pow(q) * Complex64::from_polar(1.0, q as f64 * self.phase)
    }
}

/// Full single-tone device: one tone plus the diagonal bias phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatorSpec {
    pub tone: ModulationTone,
    bias_phase: f64,
}

impl ModulatorSpec {
    pub fn new(tone: ModulationTone, bias_phase: f64) -> Result<Self> {
        if !bias_phase.is_finite() {
            return Err(domain(format!("bias phase must be finite, got {bias_phase}")));
        }
        Ok(ModulatorSpec {
            tone,
            bias_phase: reduce_angle(bias_phase),
        })
    }

    /// Shorthand for `ModulatorSpec::new(ModulationTone::new(m, theta, step)?, phi_b)`.
    pub fn from_parts(index: f64, phase: f64, step: u64, bias_phase: f64) -> Result<Self> {
        Self::new(ModulationTone::new(index, phase, step)?, bias_phase)
    }

    pub fn bias_phase(&self) -> f64 {
        self.bias_phase
    }

    pub fn index(&self) -> f64 {
        self.tone.index
    }

    pub fn step(&self) -> u64 {
        self.tone.step
    }

    /// `exp(j phi_b)`.
    pub fn bias_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.bias_phase)
    }
}

/// Modulation index `m = pi V_m / V_pi`.
pub fn modulation_index(v_m: f64, v_pi: f64) -> Result<f64> {
    if !(v_pi.is_finite() && v_pi > 0.0) {
        return Err(domain(format!("V_pi must be > 0, got {v_pi}")));
    }
    if !(v_m.is_finite() && v_m >= 0.0) {
        return Err(domain(format!("drive amplitude V_m must be >= 0, got {v_m}")));
    }
    Ok(PI * v_m / v_pi)
}

/// Classical sideband coefficient `C_q`.
pub fn coefficient(q: i64, spec: &ModulatorSpec) -> Complex64 {
    spec.bias_factor() * spec.tone.sideband_phase(q) * bessel::jn(q, spec.index())
}

/// Coefficient of the inverse transformation, `conj(C_{-q})`.
pub fn inverse_coefficient(q: i64, spec: &ModulatorSpec) -> Complex64 {
    coefficient(-q, spec).conj()
}

/// Truncation half-width `ceil(m) + 1 + safety` from Carson's rule.
pub fn carson_window(m: f64, safety: usize) -> usize {
    m.max(0.0).ceil() as usize + 1 + safety
}

/// `sum_{|q| > half_width} J_q(m)^2`, summed explicitly from the row.
pub(crate) fn bessel_tail_mass(m: f64, half_width: usize) -> f64 {
    let extra = carson_window(m, DEFAULT_SAFETY);
    let row = bessel::row_unchecked(m, half_width + extra);
    2.0 * row.values()[half_width + 1..].iter().map(|v| v * v).sum::<f64>()
}

/// A truncated list of sideband coefficients `q_min..=q_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandCoefficients {
    q_min: i64,
    values: Vec<Complex64>,
    tail_bound: f64,
}

impl SidebandCoefficients {
    /// `C_q` for `|q| <= half_width`.
    pub fn forward(spec: &ModulatorSpec, half_width: usize) -> Self {
        Self::build(spec, half_width, coefficient)
    }

    /// Inverse coefficients `conj(C_{-q})` for `|q| <= half_width`.
    pub fn inverse(spec: &ModulatorSpec, half_width: usize) -> Self {
        Self::build(spec, half_width, inverse_coefficient)
    }

    fn build(spec: &ModulatorSpec, half_width: usize, f: fn(i64, &ModulatorSpec) -> Complex64) -> Self {
        let w = half_width as i64;
        SidebandCoefficients {
            q_min: -w,
            values: (-w..=w).map(|q| f(q, spec)).collect(),
            tail_bound: bessel_tail_mass(spec.index(), half_width),
        }
    }

    pub fn q_min(&self) -> i64 {
        self.q_min
    }

    pub fn q_max(&self) -> i64 {
        self.q_min + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Probability mass outside the stored window.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn get(&self, q: i64) -> Complex64 {
        let i = q - self.q_min;
        if i < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.values.get(i as usize).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.q_min + i as i64, *c))
    }

    /// `out[q] = sum_n C_{q-n} alpha[n]` over carrier-relative offsets.
    ///
    /// Offsets that receive only exact zeros are left out of the result.
    pub fn convolve(&self, alpha: &BTreeMap<i64, Complex64>) -> BTreeMap<i64, Complex64> {
        let mut out = BTreeMap::new();
        for (&n, &a) in alpha {
            for (q, c) in self.iter() {
                let term = c * a;
                if term != Complex64::new(0.0, 0.0) {
                    *out.entry(n + q).or_insert_with(Complex64::default) += term;
                }
            }
        }
        out
    }
}

/// Multimode field after the unrestricted modulator, `sum_n C_{q-n} alpha_n`.
pub fn convolve_multimode(
    alpha: &BTreeMap<i64, Complex64>,
    spec: &ModulatorSpec,
    q_window: usize,
) -> BTreeMap<i64, Complex64> {
    SidebandCoefficients::forward(spec, q_window).convolve(alpha)
}
