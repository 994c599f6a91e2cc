use serde::{Deserialize, Serialize};

use super::TdseError;
use crate::scalar::{int, lit, Real};

/// Uniform Cartesian grid. Index `(i, j, k)` maps to
/// `x_i = center_x + (i − (n_x − 1)/2) h`, so for even `n` the center lies
/// halfway between two nodes. Storage is row-major with `z` fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T: Real> {
    pub n: [usize; 3],
    pub h: T,
    pub center: [T; 3],
}

impl<T: Real> GridSpec<T> {
    pub fn new(n: [usize; 3], h: T, center: [T; 3]) -> Result<Self, TdseError> {
        let g = GridSpec { n, h, center };
        g.validate()?;
        Ok(g)
    }

    /// Cubic grid centered on the origin.
    pub fn cube(n: usize, h: T) -> Result<Self, TdseError> {
        Self::new([n; 3], h, [T::zero(); 3])
    }

    pub fn validate(&self) -> Result<(), TdseError> {
        for &n in &self.n {
            if n < 8 || n % 2 != 0 {
                return Err(TdseError::InvalidConfig(format!(
                    "grid points per axis must be even and at least 8, got {n}"
                )));
            }
        }
        if !(self.h > T::zero()) || !self.h.is_finite() {
            return Err(TdseError::InvalidConfig("grid spacing must be positive".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    /// Stride of `axis` in the flat storage.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.n[1] * self.n[2],
            1 => self.n[2],
            _ => 1,
        }
    }

    pub fn volume_element(&self) -> T {
        self.h * self.h * self.h
    }

    pub fn box_length(&self, axis: usize) -> T {
        int::<T>(self.n[axis] as i64) * self.h
    }

    /// Node coordinates along one axis.
    pub fn axis(&self, axis: usize) -> Vec<T> {
        let n = self.n[axis];
        let mid = lit::<T>((n as f64 - 1.0) / 2.0);
        (0..n)
            .map(|j| self.center[axis] + (int::<T>(j as i64) - mid) * self.h)
            .collect()
    }

    /// Angular wavenumbers of the discrete Fourier modes along one axis,
    /// in FFT order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<T> {
        let n = self.n[axis];
        let dk = lit::<T>(2.0 * std::f64::consts::PI) / self.box_length(axis);
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                int::<T>(m) * dk
            })
            .collect()
    }

    pub fn cast<U: Real>(&self) -> GridSpec<U> {
        GridSpec {
            n: self.n,
            h: lit(crate::scalar::to_f64(self.h)),
            center: self.center.map(|c| lit(crate::scalar::to_f64(c))),
        }
    }

    /// Same node count and spacing, comparing coordinates to a relative
    /// tolerance.
    pub fn matches(&self, other: &Self) -> bool {
        let tol = lit::<T>(1e-9) * self.h;
        self.n == other.n
            && (self.h - other.h).abs() < tol
            && (0..3).all(|a| (self.center[a] - other.center[a]).abs() < tol)
    }
}
