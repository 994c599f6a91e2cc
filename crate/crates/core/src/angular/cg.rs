//! Clebsch-Gordan coefficients in exact rational arithmetic.
//!
//! A coefficient is stored as a signed square root `s·√q` with `q` rational,
//! encoded as the single rational `s·q`. Products of coefficients stay exact,
//! and vanishing coefficients are exactly zero rather than round-off.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::AngularError;
use crate::scalar::{lit, Real};

const FACTORIAL_TABLE_LEN: usize = 256;

fn factorial_table() -> &'static [BigInt] {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(FACTORIAL_TABLE_LEN);
        let mut acc = BigInt::one();
        t.push(acc.clone());
        for n in 1..FACTORIAL_TABLE_LEN {
            acc *= n;
            t.push(acc.clone());
        }
        t
    })
}

fn factorial(n: i64) -> BigInt {
    debug_assert!(n >= 0);
    let n = n as usize;
    let table = factorial_table();
    if n < table.len() {
        return table[n].clone();
    }
    let mut acc = table[table.len() - 1].clone();
    for k in table.len()..=n {
        acc *= k;
    }
    acc
}

/// Exact value `s·√q` of an angular-momentum coupling coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedSqrt(BigRational);

impl SignedSqrt {
    pub fn zero() -> Self {
        SignedSqrt(BigRational::zero())
    }

    /// `c·√r` for rational `c` and non-negative rational `r`.
    pub fn new(c: BigRational, r: BigRational) -> Self {
        debug_assert!(!r.is_negative());
        let sign = if c.is_zero() {
            BigRational::zero()
        } else if c.is_negative() {
            -BigRational::one()
        } else {
            BigRational::one()
        };
        SignedSqrt(sign * &c * &c * r)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Square of the value carrying the value's sign.
    pub fn signed_square(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        let mag = self.0.abs().to_f64().unwrap_or(f64::NAN).sqrt();
        if self.0.is_negative() {
            -mag
        } else {
            mag
        }
    }

    pub fn to_real<T: Real>(&self) -> T {
        lit(self.to_f64())
    }
}

impl std::ops::Mul for &SignedSqrt {
    type Output = SignedSqrt;
    fn mul(self, rhs: &SignedSqrt) -> SignedSqrt {
        SignedSqrt(&self.0 * &rhs.0)
    }
}

fn check_pair(l: i64, m: i64) -> Result<(), AngularError> {
    if l < 0 {
        return Err(AngularError::InvalidArgument(format!(
            "negative angular momentum l = {l}"
        )));
    }
    if m.abs() > l {
        return Err(AngularError::InvalidArgument(format!(
            "projection |m| = {} exceeds l = {l}",
            m.abs()
        )));
    }
    Ok(())
}

/// Exact `⟨l1,l2;m1,m2|l,m⟩` (Condon-Shortley phase) by the Racah sum.
///
/// Returns zero when `m ≠ m1 + m2` or the triangle condition fails; an error
/// when any `(l, m)` pair is outside its domain.
pub fn clebsch_gordan_exact(
    l1: i64,
    l2: i64,
    m1: i64,
    m2: i64,
    l: i64,
    m: i64,
) -> Result<SignedSqrt, AngularError> {
    check_pair(l1, m1)?;
    check_pair(l2, m2)?;
    check_pair(l, m)?;
    if m != m1 + m2 || l < (l1 - l2).abs() || l > l1 + l2 {
        return Ok(SignedSqrt::zero());
    }

    let prefactor = BigRational::new(
        BigInt::from(2 * l + 1)
            * factorial(l + l1 - l2)
            * factorial(l - l1 + l2)
            * factorial(l1 + l2 - l)
            * factorial(l + m)
            * factorial(l - m)
            * factorial(l1 - m1)
            * factorial(l1 + m1)
            * factorial(l2 - m2)
            * factorial(l2 + m2),
        factorial(l1 + l2 + l + 1),
    );

    let k_min = 0.max(l2 - l - m1).max(l1 - l + m2);
    let k_max = (l1 + l2 - l).min(l1 - m1).min(l2 + m2);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(l1 + l2 - l - k)
            * factorial(l1 - m1 - k)
            * factorial(l2 + m2 - k)
            * factorial(l - l2 + m1 + k)
            * factorial(l - l1 - m2 + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(SignedSqrt::new(sum, prefactor))
}

/// `⟨l1,l2;m1,m2|l,m⟩` as a floating-point number.
pub fn clebsch_gordan(
    l1: i64,
    l2: i64,
    m1: i64,
    m2: i64,
    l: i64,
    m: i64,
) -> Result<f64, AngularError> {
    clebsch_gordan_exact(l1, l2, m1, m2, l, m).map(|c| c.to_f64())
}
