use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AngularError;
use crate::scalar::{cplx, lit, to_f64, Cplx, Real};

/// Transverse polarization `(α, β)` of the vector potential, normalized so
/// that `|α|² + |β|² = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Polarization<T: Real> {
    alpha: Cplx<T>,
    beta: Cplx<T>,
}

impl<T: Real> Polarization<T> {
    pub fn new(alpha: Cplx<T>, beta: Cplx<T>) -> Result<Self, AngularError> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(AngularError::InvalidArgument(
                "polarization vector must be non-zero and finite".into(),
            ));
        }
        Ok(Polarization {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    pub fn linear_x() -> Self {
        Polarization {
            alpha: cplx(T::one(), T::zero()),
            beta: cplx(T::zero(), T::zero()),
        }
    }

    pub fn linear_y() -> Self {
        Polarization {
            alpha: cplx(T::zero(), T::zero()),
            beta: cplx(T::one(), T::zero()),
        }
    }

    /// `α = 1, β = i` (normalized).
    pub fn circular_right() -> Self {
        Self::new(cplx(T::one(), T::zero()), cplx(T::zero(), T::one())).unwrap()
    }

    /// `α = 1, β = −i` (normalized).
    pub fn circular_left() -> Self {
        Self::new(cplx(T::one(), T::zero()), cplx(T::zero(), -T::one())).unwrap()
    }

    #[inline]
    pub fn alpha(&self) -> Cplx<T> {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> Cplx<T> {
        self.beta
    }

    pub fn conj(&self) -> Self {
        Polarization {
            alpha: self.alpha.conj(),
            beta: self.beta.conj(),
        }
    }

    /// Weight `(α − iβ)/2` of the `e^{+iφ}` component of `α cos φ + β sin φ`.
    pub fn raising_weight(&self) -> Cplx<T> {
        (self.alpha - Cplx::<T>::i() * self.beta) * lit::<T>(0.5)
    }

    /// Weight `(α + iβ)/2` of the `e^{−iφ}` component of `α cos φ + β sin φ`.
    pub fn lowering_weight(&self) -> Cplx<T> {
        (self.alpha + Cplx::<T>::i() * self.beta) * lit::<T>(0.5)
    }

    /// `α² + β²`, the amplitude of the oscillating part of `A²`.
    pub fn quadratic_amplitude(&self) -> Cplx<T> {
        self.alpha * self.alpha + self.beta * self.beta
    }

    pub fn cast<U: Real>(&self) -> Polarization<U> {
        Polarization {
            alpha: cplx(lit(to_f64(self.alpha.re)), lit(to_f64(self.alpha.im))),
            beta: cplx(lit(to_f64(self.beta.re)), lit(to_f64(self.beta.im))),
        }
    }

    /// Canonical name when the vector matches one of the named states.
    pub fn name(&self) -> Option<&'static str> {
        let named = [
            ("linear-x", Self::linear_x()),
            ("linear-y", Self::linear_y()),
            ("circ-left", Self::circular_left()),
            ("circ-right", Self::circular_right()),
        ];
        let tol = lit::<T>(1e-6);
        named
            .into_iter()
            .find(|(_, p)| (p.alpha - self.alpha).norm() < tol && (p.beta - self.beta).norm() < tol)
            .map(|(n, _)| n)
    }
}

impl<T: Real> FromStr for Polarization<T> {
    type Err = AngularError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear-x" | "linear" | "x" => Ok(Self::linear_x()),
            "linear-y" | "y" => Ok(Self::linear_y()),
            "circ-left" | "left" | "circular-left" => Ok(Self::circular_left()),
            "circ-right" | "right" | "circular-right" => Ok(Self::circular_right()),
            other => Err(AngularError::InvalidArgument(format!(
                "unknown polarization '{other}' (expected linear-x, linear-y, circ-left, circ-right)"
            ))),
        }
    }
}

impl<T: Real> fmt::Display for Polarization<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(n) => f.write_str(n),
            None => write!(
                f,
                "(α={:.6}{:+.6}i, β={:.6}{:+.6}i)",
                to_f64(self.alpha.re),
                to_f64(self.alpha.im),
                to_f64(self.beta.re),
                to_f64(self.beta.im)
            ),
        }
    }
}

/// Serialized form `{alpha: [re, im], beta: [re, im]}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationRecord {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

impl<T: Real> From<&Polarization<T>> for PolarizationRecord {
    fn from(p: &Polarization<T>) -> Self {
        PolarizationRecord {
            alpha: [to_f64(p.alpha.re), to_f64(p.alpha.im)],
            beta: [to_f64(p.beta.re), to_f64(p.beta.im)],
        }
    }
}

impl PolarizationRecord {
    pub fn to_polarization<T: Real>(&self) -> Result<Polarization<T>, AngularError> {
        Polarization::new(
            cplx(lit(self.alpha[0]), lit(self.alpha[1])),
            cplx(lit(self.beta[0]), lit(self.beta[1])),
        )
    }
}
