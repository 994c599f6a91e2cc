//! Selection rules for the linear (`p·A`) and quadratic (`A²`) interaction
//! terms of a beam with winding number `ℓ`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::expansion::HarmonicIndex;
use super::polarization::{Polarization, PolarizationRecord};
use crate::scalar::{lit, Real};

/// Weights below this magnitude are treated as an absent polarization component.
const POLARIZATION_ZERO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HamiltonianPart {
    /// Linear term `−q(p·A + A·p)/2m`.
    HI,
    /// Quadratic term `q²A²/2m`.
    HII,
}

impl fmt::Display for HamiltonianPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HamiltonianPart::HI => f.write_str("HI"),
            HamiltonianPart::HII => f.write_str("HII"),
        }
    }
}

/// Allowed `(ΔL, ΔM)` for one interaction term, `ΔX = X_final − X_initial`.
///
/// A transition is allowed iff `|ΔL| ≤ max_abs_delta_l`,
/// `ΔL + parity_offset` is even and `ΔM ∈ delta_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRuleSet {
    pub part: HamiltonianPart,
    pub ell: i32,
    /// `false` for the time-independent (ponderomotive) part of `A²`.
    pub oscillating: bool,
    pub max_abs_delta_l: i32,
    pub parity_offset: i32,
    pub delta_m: BTreeSet<i32>,
    /// The polarization prefactor of this term is zero (e.g. `α² + β² = 0`
    /// for circular light in the quadratic term): the angular rule holds but
    /// the term does not act.
    pub amplitude_vanishes: bool,
    pub polarization: PolarizationRecord,
}

impl SelectionRuleSet {
    /// Absorption-side predicate.
    pub fn allows(&self, initial: HarmonicIndex, final_: HarmonicIndex) -> bool {
        let dl = final_.l() - initial.l();
        let dm = final_.m() - initial.m();
        dl.abs() <= self.max_abs_delta_l
            && (dl + self.parity_offset).rem_euclid(2) == 0
            && self.delta_m.contains(&dm)
    }

    /// Predicate for the complex-conjugate (emission) partner: `ΔM → −ΔM`.
    pub fn allows_emission(&self, initial: HarmonicIndex, final_: HarmonicIndex) -> bool {
        self.allows(final_, initial)
    }

    /// Every allowed `(ΔL, ΔM)` class.
    pub fn classes(&self) -> Vec<(i32, i32)> {
        let mut out = Vec::new();
        for dl in -self.max_abs_delta_l..=self.max_abs_delta_l {
            if (dl + self.parity_offset).rem_euclid(2) != 0 {
                continue;
            }
            for &dm in &self.delta_m {
                out.push((dl, dm));
            }
        }
        out
    }

    pub fn polarization<T: Real>(&self) -> Polarization<T> {
        self.polarization
            .to_polarization()
            .expect("stored polarization is normalized")
    }
}

impl fmt::Display for SelectionRuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parity = if self.parity_offset.rem_euclid(2) == 0 {
            "even"
        } else {
            "odd"
        };
        let dms: Vec<String> = self.delta_m.iter().map(|d| d.to_string()).collect();
        let label = if self.oscillating {
            self.part.to_string()
        } else {
            format!("{} (static)", self.part)
        };
        write!(
            f,
            "{label}: |ΔL| ≤ {}, ΔL {parity}, ΔM ∈ {{{}}}",
            self.max_abs_delta_l,
            dms.join(", ")
        )?;
        if self.amplitude_vanishes {
            write!(f, " [term vanishes for this polarization]")?;
        }
        Ok(())
    }
}

/// Derives the rule set of one interaction term.
///
/// Linear term: `|ΔL| ≤ |ℓ|+1`, `ΔL + |ℓ| + 1` even, `ΔM ∈ {ℓ+1, ℓ−1}`
/// restricted by the polarization (`ℓ+1` needs `α − iβ ≠ 0`, `ℓ−1` needs
/// `α + iβ ≠ 0`). Quadratic oscillating term: `|ΔL| ≤ 2|ℓ|`, `ΔL` even,
/// `ΔM = 2ℓ`.
pub fn derive_selection_rules<T: Real>(
    ell: i32,
    pol: &Polarization<T>,
    part: HamiltonianPart,
) -> SelectionRuleSet {
    let tol = lit::<T>(POLARIZATION_ZERO);
    let abs_ell = ell.abs();
    match part {
        HamiltonianPart::HI => {
            let mut delta_m = BTreeSet::new();
            if pol.raising_weight().norm() > tol {
                delta_m.insert(ell + 1);
            }
            if pol.lowering_weight().norm() > tol {
                delta_m.insert(ell - 1);
            }
            SelectionRuleSet {
                part,
                ell,
                oscillating: true,
                max_abs_delta_l: abs_ell + 1,
                parity_offset: abs_ell + 1,
                amplitude_vanishes: delta_m.is_empty(),
                delta_m,
                polarization: pol.into(),
            }
        }
        HamiltonianPart::HII => SelectionRuleSet {
            part,
            ell,
            oscillating: true,
            max_abs_delta_l: 2 * abs_ell,
            parity_offset: 0,
            delta_m: BTreeSet::from([2 * ell]),
            amplitude_vanishes: pol.quadratic_amplitude().norm() <= tol,
            polarization: pol.into(),
        },
    }
}

/// Rule of the time-independent part of `A²` (the ponderomotive well):
/// `|ΔL| ≤ 2|ℓ|`, `ΔL` even, `ΔM = 0`.
pub fn ponderomotive_rules<T: Real>(ell: i32, pol: &Polarization<T>) -> SelectionRuleSet {
    SelectionRuleSet {
        part: HamiltonianPart::HII,
        ell,
        oscillating: false,
        max_abs_delta_l: 2 * ell.abs(),
        parity_offset: 0,
        delta_m: BTreeSet::from([0]),
        amplitude_vanishes: false,
        polarization: pol.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(l: i32, m: i32) -> HarmonicIndex {
        HarmonicIndex::new(l, m).unwrap()
    }

    #[test]
    fn plane_wave_linear_is_dipole() {
        let r = derive_selection_rules(0, &Polarization::<f64>::linear_x(), HamiltonianPart::HI);
        assert_eq!(r.max_abs_delta_l, 1);
        assert_eq!(r.delta_m, BTreeSet::from([-1, 1]));
        assert!(r.allows(idx(0, 0), idx(1, 1)));
        assert!(!r.allows(idx(0, 0), idx(0, 0)));
        assert!(!r.allows(idx(0, 0), idx(2, 1)));
    }

    #[test]
    fn unit_winding_left_circular_keeps_projection() {
        let r = derive_selection_rules(1, &Polarization::<f64>::circular_left(), HamiltonianPart::HI);
        assert_eq!(r.delta_m, BTreeSet::from([0]));
        assert_eq!(r.max_abs_delta_l, 2);
    }

    #[test]
    fn unit_winding_quadratic_term() {
        let r = derive_selection_rules(1, &Polarization::<f64>::linear_x(), HamiltonianPart::HII);
        assert_eq!(r.max_abs_delta_l, 2);
        assert_eq!(r.delta_m, BTreeSet::from([2]));
        assert!(r.allows(idx(0, 0), idx(2, 2)));
        assert!(!r.allows(idx(0, 0), idx(3, 2)));
        assert!(!r.amplitude_vanishes);
        let c = derive_selection_rules(1, &Polarization::<f64>::circular_left(), HamiltonianPart::HII);
        assert!(c.amplitude_vanishes);
    }

    #[test]
    fn negative_winding_left_circular() {
        let pol = Polarization::<f64>::circular_left();
        let hi = derive_selection_rules(-2, &pol, HamiltonianPart::HI);
        assert_eq!(hi.delta_m, BTreeSet::from([-3]));
        let hii = derive_selection_rules(-2, &pol, HamiltonianPart::HII);
        assert_eq!(hii.delta_m, BTreeSet::from([-4]));
    }

    #[test]
    fn emission_reverses_projection_change() {
        let r = derive_selection_rules(1, &Polarization::<f64>::linear_x(), HamiltonianPart::HI);
        assert!(r.allows_emission(idx(2, 2), idx(0, 0)));
        assert!(r.allows_emission(idx(0, 0), idx(2, -2)));
        assert!(!r.allows(idx(0, 0), idx(2, -2)));
    }
}
