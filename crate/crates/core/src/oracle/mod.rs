//! Independent routes to the transition amplitudes.
//!
//! - [`exponentiate`] computes `exp(jG)` for the generator restricted to the
//!   one-photon sector over modes `1..=size`, whose columns are the exact
//!   positive-frequency amplitudes (up to truncation at the window edge).
//! - [`adjoint_expansion`] and [`path_amplitude`] sum the perturbative series
//!   of the unrestricted operator term by term.
//! - [`forbidden_path_corrected`] removes the paths that cross the zero mode
//!   by subtracting their phase-swapped mirror images.

mod expm;
mod paths;

use ndarray::Array2;
use num_complex::Complex64;

use crate::classical_pm::{carson_window, ModulationTone, ModulatorSpec, DEFAULT_SAFETY};
use crate::error::{domain, Error, Result};
use crate::modes::ModeIndex;

pub use expm::{exponentiate, RESIDUAL_LIMIT};
pub use paths::{
    adjoint_expansion, adjoint_term, allowed_path_counts, forbidden_path_corrected, path_amplitude,
    path_counts, path_term, PathCount, MAX_ENUMERATION_ORDER,
};

/// Edge leakage above which a window is reported as too small.
pub const LEAKAGE_LIMIT: f64 = 1e-13;

/// Carson safety margin defining the edge band checked for leakage.
const EDGE_SAFETY: usize = 5;

/// Hermitian generator `chi T_N + conj(chi) T_N^dagger + phi_b N_ph` on the
/// one-photon sector over modes `1..=size`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    entries: Array2<Complex64>,
}

impl GeneratorMatrix {
    pub fn zeros(size: usize) -> Self {
        GeneratorMatrix {
            entries: Array2::zeros((size, size)),
        }
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    /// Entry coupling mode `to` from mode `from` (both 1-based).
    pub fn entry(&self, to: usize, from: usize) -> Complex64 {
        self.entries[[to - 1, from - 1]]
    }

    /// Adds the hopping terms of one tone: `chi` at `(n+N, n)` and its
    /// conjugate at `(n, n+N)` for `1 <= n <= size - N`.
    pub fn add_tone(&mut self, tone: &ModulationTone) -> Result<()> {
        let step = tone.step() as usize;
        if self.size() <= step {
            return Err(domain(format!(
                "window of {} modes cannot hold a band at offset {step}",
                self.size()
            )));
        }
        let chi = tone.chi();
        for n in 0..self.size() - step {
            self.entries[[n + step, n]] += chi;
            self.entries[[n, n + step]] += chi.conj();
        }
        Ok(())
    }

    pub fn add_bias(&mut self, bias_phase: f64) {
        for n in 0..self.size() {
            self.entries[[n, n]] += bias_phase;
        }
    }

    pub fn is_hermitian(&self) -> bool {
        let n = self.size();
        (0..n).all(|a| (0..n).all(|b| self.entries[[a, b]] == self.entries[[b, a]].conj()))
    }
}

/// Generator of a single-tone modulator over modes `1..=size`.
pub fn build_generator(spec: &ModulatorSpec, size: usize) -> Result<GeneratorMatrix> {
    let mut g = GeneratorMatrix::zeros(size);
    g.add_tone(&spec.tone)?;
    g.add_bias(spec.bias_phase());
    Ok(g)
}

/// `exp(jG)` over modes `1..=size`; column `n0` holds the output amplitudes
/// of a photon entering in mode `n0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    entries: Array2<Complex64>,
}

impl TransitionMatrix {
    pub(crate) fn from_entries(entries: Array2<Complex64>) -> Self {
        TransitionMatrix { entries }
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn entry(&self, to: usize, from: usize) -> Complex64 {
        self.entries[[to - 1, from - 1]]
    }

    /// Amplitudes over modes `1..=size` for input mode `n0`.
    pub fn column(&self, n0: ModeIndex) -> Result<Vec<Complex64>> {
        let idx = n0.get() as usize;
        if idx > self.size() {
            return Err(domain(format!("mode {n0} lies outside the {}-mode window", self.size())));
        }
        Ok(self.entries.column(idx - 1).to_vec())
    }

    /// `max |(S^dagger S - I)_{ab}|`.
    pub fn unitarity_residual(&self) -> f64 {
        expm::unitarity_residual(&self.entries)
    }
}

/// Smallest window accepted by [`oracle_column`] for input mode `n0`.
pub fn minimum_window(n0: ModeIndex, spec: &ModulatorSpec) -> usize {
    n0.get() as usize + spec.step() as usize * carson_window(spec.index(), DEFAULT_SAFETY)
}

/// Probability in the top `edge` modes of a column.
pub(crate) fn edge_leakage(column: &[Complex64], edge: usize) -> f64 {
    let start = column.len().saturating_sub(edge);
    column[start..].iter().map(|z| z.norm_sqr()).sum()
}

/// Rejects a column whose top `edge` modes carry more than [`LEAKAGE_LIMIT`].
pub(crate) fn check_leakage(column: &[Complex64], edge: usize) -> Result<()> {
    let leakage = edge_leakage(column, edge);
    if leakage > LEAKAGE_LIMIT {
        Err(Error::Truncation { leakage })
    } else {
        Ok(())
    }
}

pub(crate) fn edge_width(tone: &ModulationTone) -> usize {
    tone.step() as usize * carson_window(tone.index(), EDGE_SAFETY)
}

/// Ground-truth amplitudes for a photon in mode `n0`: column `n0` of the
/// exponentiated generator over modes `1..=size`.
pub fn oracle_column(n0: ModeIndex, spec: &ModulatorSpec, size: usize) -> Result<Vec<Complex64>> {
    let needed = minimum_window(n0, spec);
    if size < needed {
        return Err(domain(format!("window of {size} modes is below the required {needed}")));
    }
    let s = exponentiate(&build_generator(spec, size)?)?;
    let column = s.column(n0)?;
    check_leakage(&column, edge_width(&spec.tone))?;
    Ok(column)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn spec(m: f64, theta: f64, step: u64, phi_b: f64) -> ModulatorSpec {
        ModulatorSpec::from_parts(m, theta, step, phi_b).unwrap()
    }

    #[test]
    fn generator_without_drive_is_diagonal() {
        let g = build_generator(&spec(0.0, 0.0, 1, 0.4), 6).unwrap();
        for a in 1..=6 {
            for b in 1..=6 {
                let want = if a == b { 0.4 } else { 0.0 };
                assert_eq!(g.entry(a, b), Complex64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn generator_band_structure() {
        let s = spec(5.0, FRAC_PI_4, 2, 0.3);
        let g = build_generator(&s, 10).unwrap();
        assert!(g.is_hermitian());
        let chi = Complex64::from_polar(2.5, FRAC_PI_4);
        for a in 1..=10usize {
            for b in 1..=10usize {
                let want = if a == b {
                    Complex64::new(0.3, 0.0)
                } else if a == b + 2 {
                    chi
                } else if b == a + 2 {
                    chi.conj()
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((g.entry(a, b) - want).norm() < 1e-15, "({a},{b})");
            }
        }
    }

    #[test]
    fn generator_needs_room_for_band() {
        assert!(build_generator(&spec(1.0, 0.0, 4, 0.0), 4).is_err());
        assert!(build_generator(&spec(1.0, 0.0, 4, 0.0), 5).is_ok());
    }

    #[test]
    fn column_without_drive() {
        let s = spec(0.0, 0.0, 1, 0.9);
        let n0 = ModeIndex::new(4).unwrap();
        let col = oracle_column(n0, &s, minimum_window(n0, &s)).unwrap();
        for (i, z) in col.iter().enumerate() {
            let want = if i == 3 { s.bias_factor() } else { Complex64::new(0.0, 0.0) };
            assert!((z - want).norm() < 1e-15);
        }
    }

    #[test]
    fn column_window_too_small() {
        let s = spec(2.0, 0.0, 1, 0.0);
        let n0 = ModeIndex::new(4).unwrap();
        assert!(oracle_column(n0, &s, minimum_window(n0, &s) - 1).is_err());
    }

    #[test]
    fn leakage_detection() {
        let s = spec(5.0, 0.0, 1, 0.0);
        let n0 = ModeIndex::new(6).unwrap();
        // A window ending just past the carrier leaks heavily into its edge band.
        let col = exponentiate(&build_generator(&s, 14).unwrap()).unwrap().column(n0).unwrap();
        assert!(matches!(check_leakage(&col, edge_width(&s.tone)), Err(Error::Truncation { .. })));
        let col = oracle_column(n0, &s, minimum_window(n0, &s)).unwrap();
        assert!(edge_leakage(&col, edge_width(&s.tone)) <= LEAKAGE_LIMIT);
    }
}
