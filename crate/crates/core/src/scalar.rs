//! Scalar abstraction shared by every numerical module.
//!
//! All floating-point code in the crate is generic over [`Real`], implemented
//! for `f32` and `f64`. Exact quantities (Clebsch-Gordan coefficients) live in
//! rational arithmetic and are converted through [`Real::from_f64`] at the
//! boundary.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar usable by the solvers: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Machine-level noise floor used when deciding whether a value is zero.
    const NOISE: f64;
}

impl Real for f32 {
    const NOISE: f64 = 1e-6;
}

impl Real for f64 {
    const NOISE: f64 = 1e-14;
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts an integer into `T`.
#[inline]
pub fn int<T: Real>(n: i64) -> T {
    T::from_i64(n).expect("integer representable in scalar type")
}

/// `T` value as `f64`, used for reporting and serialization.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Complex value with real scalar `T`.
pub type Cplx<T> = Complex<T>;

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

/// `e^{i x}`.
#[inline]
pub fn cis<T: Real>(x: T) -> Cplx<T> {
    let (s, c) = x.sin_cos();
    Complex::new(c, s)
}

/// Chunk length of [`par_reduce`].
pub const REDUCE_CHUNK: usize = 4096;

/// Folds `map(i)` for `i in 0..n` over fixed chunks in parallel, then
/// combines the chunk results in order, so the rounding does not depend on
/// the thread count or schedule.
pub fn par_reduce<A, M, F>(n: usize, zero: A, map: M, add: F) -> A
where
    A: Clone + Send + Sync,
    M: Fn(usize) -> A + Sync,
    F: Fn(A, A) -> A + Sync,
{
    use rayon::prelude::*;
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = zero.clone();
            for i in c * REDUCE_CHUNK..((c + 1) * REDUCE_CHUNK).min(n) {
                acc = add(acc, map(i));
            }
            acc
        })
        .collect();
    parts.into_iter().fold(zero, add)
}
