//! Pointwise evaluation of orthonormal spherical harmonics (Condon-Shortley).

use crate::scalar::{cis, int, lit, Cplx, Real};

/// Normalized associated Legendre values `P̄_l^m(cos θ)` for `0 ≤ m ≤ l ≤ l_max`,
/// scaled so that `Y_l^m = P̄_l^m(cos θ) e^{imφ}`.
///
/// Stored row-major by `l`, index `l(l+1)/2 + m`.
pub fn normalized_legendre<T: Real>(l_max: usize, cos_theta: T, sin_theta: T) -> Vec<T> {
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![T::zero(); (l_max + 1) * (l_max + 2) / 2];
    p[0] = T::one() / (lit::<T>(4.0) * T::PI()).sqrt();
    for m in 1..=l_max {
        let mf = int::<T>(m as i64);
        let f = -((lit::<T>(2.0) * mf + T::one()) / (lit::<T>(2.0) * mf)).sqrt();
        p[idx(m, m)] = f * sin_theta * p[idx(m - 1, m - 1)];
    }
    for m in 0..l_max {
        let mf = int::<T>(m as i64);
        p[idx(m + 1, m)] = (lit::<T>(2.0) * mf + lit(3.0)).sqrt() * cos_theta * p[idx(m, m)];
    }
    for m in 0..=l_max {
        let m2 = int::<T>((m * m) as i64);
        for l in (m + 2)..=l_max {
            let lf = int::<T>(l as i64);
            let l1 = lf - T::one();
            let a = ((lit::<T>(4.0) * lf * lf - T::one()) / (lf * lf - m2)).sqrt();
            let b = ((l1 * l1 - m2) / (lit::<T>(4.0) * l1 * l1 - T::one())).sqrt();
            p[idx(l, m)] = a * (cos_theta * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
    p
}

/// `Y_l^m(θ, φ)`. Returns zero for `|m| > l`.
pub fn spherical_harmonic<T: Real>(l: i64, m: i64, theta: T, phi: T) -> Cplx<T> {
    if l < 0 || m.abs() > l {
        return Cplx::new(T::zero(), T::zero());
    }
    let (s, c) = theta.sin_cos();
    let table = normalized_legendre(l as usize, c, s);
    let ma = m.unsigned_abs() as usize;
    let lu = l as usize;
    let plm = table[lu * (lu + 1) / 2 + ma];
    let val = cis(int::<T>(ma as i64) * phi) * plm;
    if m >= 0 {
        val
    } else if ma % 2 == 0 {
        val.conj()
    } else {
        -val.conj()
    }
}

/// All `Y_l^m` with `l ≤ l_max` at one point, ordered by `(l, m)` with
/// flat index `l² + l + m`.
pub fn spherical_harmonics_upto<T: Real>(l_max: usize, theta: T, phi: T) -> Vec<Cplx<T>> {
    let (s, c) = theta.sin_cos();
    let table = normalized_legendre(l_max, c, s);
    let mut out = vec![Cplx::new(T::zero(), T::zero()); (l_max + 1) * (l_max + 1)];
    let phases: Vec<Cplx<T>> = (0..=l_max).map(|m| cis(int::<T>(m as i64) * phi)).collect();
    for l in 0..=l_max {
        for m in 0..=l {
            let v = phases[m] * table[l * (l + 1) / 2 + m];
            out[l * l + l + m] = v;
            if m > 0 {
                let conj = v.conj();
                out[l * l + l - m] = if m % 2 == 0 { conj } else { -conj };
            }
        }
    }
    out
}

/// Flat index `l² + l + m` used by [`spherical_harmonics_upto`].
#[inline]
pub fn flat_index(l: i64, m: i64) -> usize {
    (l * l + l + m) as usize
}
