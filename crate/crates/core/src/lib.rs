//! Quantum scattering model of electro-optic phase modulation.
//!
//! A sinusoidally driven phase modulator moves photons between equally
//! spaced frequency modes. Classically the carrier is spread into sidebands
//! with Bessel-function amplitudes `C_q`; taken literally as a quantum
//! operator this leaks probability into modes of zero or negative frequency.
//! The physical operator acts only on positive-frequency modes and its
//! single-photon transition amplitudes `D_{q,q0}` subtract a reflected
//! Bessel term from the classical one.
//!
//! Modules:
//!
//! - [`modes`]: frequency/mode-index bookkeeping and the `n0 = q0*N - r0`
//!   decomposition.
//! - [`bessel`]: integer-order Bessel functions of the first kind.
//! - [`classical_pm`]: modulation index, classical sideband coefficients and
//!   multimode convolution (the unrestricted operator).
//! - [`scattering`]: the positive-frequency operator: `D` coefficients,
//!   single-photon spectra, coherent-state transforms, unitarity checks.
//! - [`oracle`]: independent routes to the same numbers (matrix exponential of
//!   the generator, adjoint expansion, diagrammatic path sums).
//! - [`multitone`]: several simultaneous RF tones.

pub mod bessel;
pub mod classical_pm;
mod error;
pub mod modes;
pub mod multitone;
pub mod oracle;
pub mod scattering;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use classical_pm::{ModulationTone, ModulatorSpec};
pub use modes::ModeIndex;
pub use scattering::SpectrumLine;
