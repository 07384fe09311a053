//! Mode bookkeeping on the one-dimensional quantization grid.
//!
//! Right-moving modes in a periodic box of length `L` are labelled by a
//! positive integer `n` and have angular frequency `2*pi*n*c/L`. A modulation
//! tone of frequency step `N` couples mode `n` to `n +- N`, so the modes
//! reachable from `n0` form the residue class `{q*N - r0 : q >= 1}` where
//! `n0 = q0*N - r0`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Error, Result};

/// Relative distance to the nearest grid point accepted by [`mode_of_frequency`].
pub const GRID_TOLERANCE: f64 = 1e-9;

/// A physical (positive-frequency, right-moving) mode index, always `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex(u64);

impl ModeIndex {
    pub fn new(n: i64) -> Result<Self> {
        if n < 1 {
            Err(Error::NonPositive(n))
        } else {
            Ok(ModeIndex(n as u64))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn as_i64(self) -> i64 {
        self.0 as i64
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<i64> for ModeIndex {
    type Error = Error;

    fn try_from(n: i64) -> Result<Self> {
        ModeIndex::new(n)
    }
}

/// Quantization length and propagation speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationFrame {
    length: f64,
    speed: f64,
}

impl QuantizationFrame {
    pub fn new(length: f64, speed: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(domain(format!("quantization length must be > 0, got {length}")));
        }
        if !(speed.is_finite() && speed > 0.0) {
            return Err(domain(format!("propagation speed must be > 0, got {speed}")));
        }
        Ok(QuantizationFrame { length, speed })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Angular frequency spacing `2*pi*c/L` between neighbouring modes.
    pub fn spacing(&self) -> f64 {
        2.0 * PI * self.speed / self.length
    }

    pub fn frequency_of_mode(&self, n: ModeIndex) -> f64 {
        n.get() as f64 * self.spacing()
    }

    pub fn mode_of_frequency(&self, omega: f64) -> Result<ModeIndex> {
        mode_of_frequency(omega, self)
    }
}

/// Maps an angular frequency onto its mode index.
///
/// The ratio `omega*L/(2*pi*c)` must lie within [`GRID_TOLERANCE`] (relative)
/// of an integer, and that integer must be positive.
pub fn mode_of_frequency(omega: f64, frame: &QuantizationFrame) -> Result<ModeIndex> {
    if !omega.is_finite() {
        return Err(domain(format!("frequency must be finite, got {omega}")));
    }
    let ratio = omega * frame.length / (2.0 * PI * frame.speed);
    let nearest = ratio.round();
    if (ratio - nearest).abs() > GRID_TOLERANCE * nearest.abs().max(1.0) {
        return Err(Error::NotOnGrid { ratio });
    }
    if nearest > i64::MAX as f64 {
        return Err(domain(format!("mode index {nearest} out of range")));
    }
    ModeIndex::new(nearest as i64)
}

/// `n0 = q0*N - r0` with `q0 >= 1` and `0 <= r0 < N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexDecomposition {
    pub q0: u64,
    pub r0: u64,
}

impl IndexDecomposition {
    /// Mode index `q*N - r0` of reduced index `q` in this residue class.
    pub fn mode(&self, q: u64, step: u64) -> u64 {
        q * step - self.r0
    }

    pub fn reconstruct(&self, step: u64) -> u64 {
        self.mode(self.q0, step)
    }
}

pub fn decompose(n0: ModeIndex, step: u64) -> Result<IndexDecomposition> {
    if step == 0 {
        return Err(domain("frequency step N must be >= 1"));
    }
    let n = n0.get();
    let q0 = n.div_ceil(step);
    Ok(IndexDecomposition {
        q0,
        r0: q0 * step - n,
    })
}
