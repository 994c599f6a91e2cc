//! Angular integrals of the interaction terms, assembled from the harmonic
//! decompositions and the product formula. No numerical integration happens
//! here; forbidden couplings are absent terms and therefore exactly zero.

use super::expansion::{expand_sin_power_phase, product_expansion, AngularFactor, HarmonicExpansion, HarmonicIndex};
use super::Polarization;
use crate::scalar::{cplx, lit, Cplx, Real};

/// `∫ Y*_final F Y_initial dΩ` for a finite expansion `F`.
pub fn matrix_element<T: Real>(
    operator: &HarmonicExpansion<T>,
    initial: HarmonicIndex,
    final_: HarmonicIndex,
) -> Cplx<T> {
    let mut acc = cplx(T::zero(), T::zero());
    for (k, c) in operator.iter() {
        if k.m() + initial.m() != final_.m() {
            continue;
        }
        let prod = product_expansion::<T>(*k, initial);
        acc += *c * prod.coefficient(final_);
    }
    acc
}

fn factor_expansion<T: Real>(sin_power: u32, azimuthal: i32) -> HarmonicExpansion<T> {
    expand_sin_power_phase(AngularFactor::new(sin_power, azimuthal))
        .expect("interaction factors are band-limited")
}

/// Angular operator multiplying `e^{−iωt}` in the linear interaction:
/// `α (sinθ)^{|ℓ|+1} cos φ e^{iℓφ} + β (sinθ)^{|ℓ|+1} sin φ e^{iℓφ}`.
pub fn hi_operator<T: Real>(ell: i32, pol: &Polarization<T>) -> HarmonicExpansion<T> {
    let n = ell.unsigned_abs() + 1;
    let mut op = HarmonicExpansion::new();
    let up = pol.raising_weight();
    let down = pol.lowering_weight();
    let tol = lit::<T>(1e-15);
    if up.norm() > tol {
        op.add_expansion(&factor_expansion::<T>(n, ell + 1), up);
    }
    if down.norm() > tol {
        op.add_expansion(&factor_expansion::<T>(n, ell - 1), down);
    }
    op
}

/// Angular operator multiplying `e^{−2iωt}` in `A²`:
/// `(α² + β²)(sinθ)^{2|ℓ|} e^{2iℓφ}`.
pub fn hii_operator<T: Real>(ell: i32, pol: &Polarization<T>) -> HarmonicExpansion<T> {
    factor_expansion::<T>(2 * ell.unsigned_abs(), 2 * ell).scaled(pol.quadratic_amplitude())
}

/// Time-independent part of `A²`: `2(|α|² + |β|²)(sinθ)^{2|ℓ|}`.
pub fn ponderomotive_operator<T: Real>(ell: i32, pol: &Polarization<T>) -> HarmonicExpansion<T> {
    let w = lit::<T>(2.0) * (pol.alpha().norm_sqr() + pol.beta().norm_sqr());
    factor_expansion::<T>(2 * ell.unsigned_abs(), 0).scaled(cplx(w, T::zero()))
}

/// Absorption-side (`e^{−iωt}`) angular coefficient of the linear interaction
/// between `initial` and `final_`. Radial factors and the `(E_i − E_f)`
/// prefactor are not included.
pub fn hi_angular_coupling<T: Real>(
    ell: i32,
    pol: &Polarization<T>,
    initial: HarmonicIndex,
    final_: HarmonicIndex,
) -> Cplx<T> {
    matrix_element(&hi_operator(ell, pol), initial, final_)
}

/// Emission-side (`e^{+iωt}`) partner: the complex-conjugated field term,
/// i.e. the absorption coupling with `ℓ → −ℓ` and `(α, β) → (α*, β*)`.
pub fn hi_emission_coupling<T: Real>(
    ell: i32,
    pol: &Polarization<T>,
    initial: HarmonicIndex,
    final_: HarmonicIndex,
) -> Cplx<T> {
    hi_angular_coupling(-ell, &pol.conj(), initial, final_)
}

/// Angular coefficient of the `e^{−2iωt}` part of `A²`.
pub fn hii_angular_coupling<T: Real>(
    ell: i32,
    pol: &Polarization<T>,
    initial: HarmonicIndex,
    final_: HarmonicIndex,
) -> Cplx<T> {
    matrix_element(&hii_operator(ell, pol), initial, final_)
}
