//! Exact angular-momentum algebra: Clebsch-Gordan coefficients, harmonic
//! decompositions of the interaction's angular factors, and the selection
//! rules they imply.

pub mod cg;
pub mod coupling;
pub mod expansion;
pub mod harmonics;
pub mod polarization;
pub mod rules;

pub use cg::{clebsch_gordan, clebsch_gordan_exact, SignedSqrt};
pub use coupling::{
    hi_angular_coupling, hi_emission_coupling, hi_operator, hii_angular_coupling, hii_operator,
    matrix_element, ponderomotive_operator,
};
pub use expansion::{
    expand_sin_power_phase, product_expansion, sin_squared_expansion, AngularFactor,
    ExpansionTerm, HarmonicExpansion, HarmonicIndex,
};
pub use harmonics::{spherical_harmonic, spherical_harmonics_upto};
pub use polarization::{Polarization, PolarizationRecord};
pub use rules::{derive_selection_rules, ponderomotive_rules, HamiltonianPart, SelectionRuleSet};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngularError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("(sin θ)^{sin_power} e^{{i{azimuthal}φ}} has no finite harmonic expansion (needs n ≥ |m| and n − |m| even)")]
    NotBandLimited { sin_power: u32, azimuthal: i32 },
}
