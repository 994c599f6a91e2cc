//! Finite spherical-harmonic expansions and the closed-form decompositions of
//! the interaction's angular factors.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::cg::{clebsch_gordan_exact, SignedSqrt};
use super::harmonics::spherical_harmonic;
use super::AngularError;
use crate::scalar::{cis, cplx, lit, Cplx, Real};

/// Default magnitude below which expansion coefficients are discarded.
pub const DEFAULT_DROP_TOLERANCE: f64 = 1e-14;

/// Index `(L, M)` of `Y_L^M`; `|M| ≤ L` is enforced at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HarmonicIndex {
    #[serde(rename = "L")]
    l: i32,
    #[serde(rename = "M")]
    m: i32,
}

impl HarmonicIndex {
    pub fn new(l: i32, m: i32) -> Result<Self, AngularError> {
        if l < 0 || m.abs() > l {
            return Err(AngularError::InvalidArgument(format!(
                "invalid harmonic index (L={l}, M={m})"
            )));
        }
        Ok(HarmonicIndex { l, m })
    }

    #[inline]
    pub fn l(&self) -> i32 {
        self.l
    }

    #[inline]
    pub fn m(&self) -> i32 {
        self.m
    }

    /// All indices with `L ≤ l_max`, ordered by `(L, M)`.
    pub fn all_upto(l_max: i32) -> Vec<HarmonicIndex> {
        (0..=l_max)
            .flat_map(|l| (-l..=l).map(move |m| HarmonicIndex { l, m }))
            .collect()
    }
}

impl std::fmt::Display for HarmonicIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.l, self.m)
    }
}

/// Angular factor `(sin θ)^n e^{imφ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AngularFactor {
    pub sin_power: u32,
    pub azimuthal: i32,
}

impl AngularFactor {
    pub fn new(sin_power: u32, azimuthal: i32) -> Self {
        AngularFactor {
            sin_power,
            azimuthal,
        }
    }

    /// A factor has a finite harmonic expansion iff `n ≥ |m|` and `n − |m|` is even.
    pub fn is_band_limited(&self) -> bool {
        let n = self.sin_power as i64;
        let m = self.azimuthal.unsigned_abs() as i64;
        n >= m && (n - m) % 2 == 0
    }

    pub fn evaluate<T: Real>(&self, theta: T, phi: T) -> Cplx<T> {
        cis(T::from_i32(self.azimuthal).unwrap() * phi) * theta.sin().powi(self.sin_power as i32)
    }
}

/// One serialized term `{L, M, re, im}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    #[serde(rename = "L")]
    pub l: i32,
    #[serde(rename = "M")]
    pub m: i32,
    pub re: f64,
    pub im: f64,
}

/// Finite map `(L, M) → coefficient` representing a function on the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicExpansion<T: Real> {
    terms: BTreeMap<HarmonicIndex, Cplx<T>>,
    drop_tolerance: T,
}

impl<T: Real> Default for HarmonicExpansion<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> HarmonicExpansion<T> {
    pub fn new() -> Self {
        Self::with_tolerance(lit(DEFAULT_DROP_TOLERANCE))
    }

    pub fn with_tolerance(drop_tolerance: T) -> Self {
        HarmonicExpansion {
            terms: BTreeMap::new(),
            drop_tolerance,
        }
    }

    pub fn single(index: HarmonicIndex, coefficient: Cplx<T>) -> Self {
        let mut e = Self::new();
        e.add(index, coefficient);
        e
    }

    pub fn drop_tolerance(&self) -> T {
        self.drop_tolerance
    }

    /// Adds `coefficient` to the term at `index`, removing it if the result
    /// falls below the drop tolerance.
    pub fn add(&mut self, index: HarmonicIndex, coefficient: Cplx<T>) {
        let entry = self.terms.entry(index).or_insert_with(|| cplx(T::zero(), T::zero()));
        *entry += coefficient;
        if entry.norm() < self.drop_tolerance {
            self.terms.remove(&index);
        }
    }

    pub fn coefficient(&self, index: HarmonicIndex) -> Cplx<T> {
        self.terms
            .get(&index)
            .copied()
            .unwrap_or_else(|| cplx(T::zero(), T::zero()))
    }

    /// Coefficient at `(l, m)`, zero for invalid indices.
    pub fn coefficient_at(&self, l: i32, m: i32) -> Cplx<T> {
        HarmonicIndex::new(l, m)
            .map(|i| self.coefficient(i))
            .unwrap_or_else(|_| cplx(T::zero(), T::zero()))
    }

    pub fn contains(&self, index: HarmonicIndex) -> bool {
        self.terms.contains_key(&index)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HarmonicIndex, &Cplx<T>)> {
        self.terms.iter()
    }

    pub fn max_l(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.l).max()
    }

    pub fn scaled(&self, factor: Cplx<T>) -> Self {
        let mut out = Self::with_tolerance(self.drop_tolerance);
        for (k, v) in &self.terms {
            out.add(*k, *v * factor);
        }
        out
    }

    pub fn add_expansion(&mut self, other: &Self, factor: Cplx<T>) {
        for (k, v) in &other.terms {
            self.add(*k, *v * factor);
        }
    }

    /// Pointwise product, re-expanded in harmonics.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::with_tolerance(self.drop_tolerance);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let prod = product_expansion::<T>(*a, *b);
                out.add_expansion(&prod, *ca * *cb);
            }
        }
        out
    }

    pub fn evaluate(&self, theta: T, phi: T) -> Cplx<T> {
        self.terms
            .iter()
            .map(|(k, c)| *c * spherical_harmonic(k.l as i64, k.m as i64, theta, phi))
            .fold(cplx(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn to_terms(&self) -> Vec<ExpansionTerm> {
        self.terms
            .iter()
            .map(|(k, c)| ExpansionTerm {
                l: k.l,
                m: k.m,
                re: c.re.to_f64().unwrap_or(f64::NAN),
                im: c.im.to_f64().unwrap_or(f64::NAN),
            })
            .collect()
    }

    pub fn from_terms(terms: &[ExpansionTerm]) -> Result<Self, AngularError> {
        let mut out = Self::new();
        for t in terms {
            out.add(
                HarmonicIndex::new(t.l, t.m)?,
                cplx(lit(t.re), lit(t.im)),
            );
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_terms()).expect("terms serialize")
    }
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Expansion of `Y_{l1}^{m1} · Y_{l2}^{m2}`; every output term has
/// `M = m1 + m2` and `|l1 − l2| ≤ L ≤ l1 + l2`.
pub fn product_expansion<T: Real>(a: HarmonicIndex, b: HarmonicIndex) -> HarmonicExpansion<T> {
    let (l1, m1, l2, m2) = (a.l as i64, a.m as i64, b.l as i64, b.m as i64);
    let m = m1 + m2;
    let inv_sqrt_4pi = T::one() / (lit::<T>(4.0) * T::PI()).sqrt();
    let mut out = HarmonicExpansion::new();
    for l in (l1 - l2).abs()..=(l1 + l2) {
        if m.abs() > l {
            continue;
        }
        let parity = clebsch_gordan_exact(l1, l2, 0, 0, l, 0).expect("valid indices");
        if parity.is_zero() {
            continue;
        }
        let coupling = clebsch_gordan_exact(l1, l2, m1, m2, l, m).expect("valid indices");
        if coupling.is_zero() {
            continue;
        }
        let weight = SignedSqrt::new(
            BigRational::from_integer(1.into()),
            rational((2 * l1 + 1) * (2 * l2 + 1), 2 * l + 1),
        );
        let exact = &(&parity * &coupling) * &weight;
        let c: T = exact.to_real::<T>() * inv_sqrt_4pi;
        out.add(
            HarmonicIndex {
                l: l as i32,
                m: m as i32,
            },
            cplx(c, T::zero()),
        );
    }
    out
}

/// `sin²θ = (4√π/3)(Y_0^0 − Y_2^0/√5)`.
pub fn sin_squared_expansion<T: Real>() -> HarmonicExpansion<T> {
    let pref = lit::<T>(4.0) * T::PI().sqrt() / lit(3.0);
    let mut e = HarmonicExpansion::new();
    e.add(HarmonicIndex { l: 0, m: 0 }, cplx(pref, T::zero()));
    e.add(
        HarmonicIndex { l: 2, m: 0 },
        cplx(-pref / lit::<T>(5.0).sqrt(), T::zero()),
    );
    e
}

/// Coefficient `c` with `(sin θ)^{|m|} e^{imφ} = c · Y_{|m|}^{m}`:
/// `c = (−1)^m 2^m m! √(4π/(2m+1)!)` for `m ≥ 0` and
/// `c = 2^{|m|} |m|! √(4π/(2|m|+1)!)` for `m < 0`.
pub fn extremal_coefficient<T: Real>(m: i32) -> T {
    let ma = m.unsigned_abs() as i64;
    let mut fact = BigInt::from(1);
    for k in 1..=ma {
        fact *= k;
    }
    let mut fact2 = BigInt::from(1);
    for k in 1..=(2 * ma + 1) {
        fact2 *= k;
    }
    let num = BigInt::from(4).pow(ma as u32) * &fact * &fact;
    let ratio = SignedSqrt::new(
        BigRational::from_integer(1.into()),
        BigRational::new(num, fact2),
    );
    let mag = ratio.to_real::<T>() * (lit::<T>(4.0) * T::PI()).sqrt();
    if m >= 0 && ma % 2 == 1 {
        -mag
    } else {
        mag
    }
}

/// Harmonic expansion of `(sin θ)^n e^{imφ}`.
///
/// Built from the extremal harmonic `Y_{|m|}^{m}` and repeated multiplication
/// by the `sin²θ` expansion. Only band-limited factors (`n ≥ |m|`, `n − |m|`
/// even) have finite expansions; others are rejected.
pub fn expand_sin_power_phase<T: Real>(
    factor: AngularFactor,
) -> Result<HarmonicExpansion<T>, AngularError> {
    if !factor.is_band_limited() {
        return Err(AngularError::NotBandLimited {
            sin_power: factor.sin_power,
            azimuthal: factor.azimuthal,
        });
    }
    let m = factor.azimuthal;
    let base = HarmonicIndex {
        l: m.abs(),
        m,
    };
    let mut out =
        HarmonicExpansion::single(base, cplx(extremal_coefficient::<T>(m), T::zero()));
    let sin2 = sin_squared_expansion::<T>();
    let extra = (factor.sin_power as i32 - m.abs()) / 2;
    for _ in 0..extra {
        out = out.multiply(&sin2);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn idx(l: i32, m: i32) -> HarmonicIndex {
        HarmonicIndex::new(l, m).unwrap()
    }

    #[test]
    fn constant_function() {
        let e = expand_sin_power_phase::<f64>(AngularFactor::new(0, 0)).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e.coefficient(idx(0, 0)).re - (4.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sin_squared_identity() {
        let e = expand_sin_power_phase::<f64>(AngularFactor::new(2, 0)).unwrap();
        let pref = 4.0 * PI.sqrt() / 3.0;
        assert!((e.coefficient(idx(0, 0)).re - pref).abs() < 1e-14);
        assert!((e.coefficient(idx(2, 0)).re + pref / 5f64.sqrt()).abs() < 1e-14);
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn extremal_term_for_unit_winding() {
        // (sin θ)² e^{2iφ} = 4√(2π/15) Y_2^2 with the Condon-Shortley phase.
        let e = expand_sin_power_phase::<f64>(AngularFactor::new(2, 2)).unwrap();
        assert_eq!(e.len(), 1);
        let c = e.coefficient(idx(2, 2));
        assert!((c.re - 4.0 * (2.0 * PI / 15.0).sqrt()).abs() < 1e-14);
        assert!((c.re - 4.0 * 2.0 * (4.0 * PI / 120.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn product_with_constant() {
        for (l, m) in [(0, 0), (3, -2), (5, 5)] {
            let p = product_expansion::<f64>(idx(0, 0), idx(l, m));
            assert_eq!(p.len(), 1);
            assert!((p.coefficient(idx(l, m)).re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn quadrupole_product_has_two_terms() {
        let ell = 2;
        let p = product_expansion::<f64>(idx(ell - 1, ell - 1), idx(2, 0));
        let keys: Vec<_> = p.iter().map(|(k, _)| *k).collect();
        assert_eq!(keys, vec![idx(ell - 1, ell - 1), idx(ell + 1, ell - 1)]);
    }

    #[test]
    fn product_conserves_projection() {
        for (a, b) in [((3, 1), (2, -2)), ((4, -4), (4, 3)), ((2, 0), (1, 1))] {
            let p = product_expansion::<f64>(idx(a.0, a.1), idx(b.0, b.1));
            assert!(p.iter().all(|(k, _)| k.m() == a.1 + b.1));
        }
    }

    #[test]
    fn non_band_limited_factor_rejected() {
        assert!(expand_sin_power_phase::<f64>(AngularFactor::new(1, 0)).is_err());
        assert!(expand_sin_power_phase::<f64>(AngularFactor::new(0, 2)).is_err());
    }

    #[test]
    fn json_terms_round_trip() {
        let e = expand_sin_power_phase::<f64>(AngularFactor::new(4, -2)).unwrap();
        let back = HarmonicExpansion::<f64>::from_terms(&e.to_terms()).unwrap();
        assert_eq!(e, back);
    }
}
