//! Photoionization of hydrogen by Laguerre-Gaussian pulses carrying orbital
//! angular momentum.
//!
//! * [`angular`]: exact Clebsch-Gordan algebra, harmonic decompositions and
//!   selection rules of the `p·A` and `A²` interaction terms.
//! * [`quadrature`]: brute-force sphere quadrature used as an independent
//!   oracle for everything in [`angular`].
//! * [`beam`]: Laguerre-Gaussian vector potential with a `sin²` envelope.
//! * [`tdse`]: split-operator propagation of the electron on a 3D grid.
//! * [`analysis`]: spherical-harmonic spectra, angular momentum and
//!   selection-rule compliance of simulated states.
//! * [`config`]: run configuration files.
//!
//! Numerical code is generic over [`Real`] (`f32`/`f64`); the `*64` aliases
//! below fix the scalar to `f64`.

pub mod analysis;
pub mod angular;
pub mod beam;
pub mod config;
pub mod quadrature;
pub mod scalar;
pub mod tdse;

pub use scalar::Real;

pub type HarmonicExpansion64 = angular::HarmonicExpansion<f64>;
pub type Polarization64 = angular::Polarization<f64>;
pub type PulseConfig64 = beam::PulseConfig<f64>;
pub type GridSpec64 = tdse::GridSpec<f64>;
pub type Wavefunction64 = tdse::Wavefunction<f64>;
pub type PropagatorConfig64 = tdse::PropagatorConfig<f64>;
pub type SphericalSpectrum64 = analysis::SphericalSpectrum<f64>;
