use rayon::prelude::*;

use super::{GridField, Propagator, Wavefunction};
use crate::scalar::{cplx, par_reduce, Cplx, Real};

/// `⟨x⟩, ⟨y⟩, ⟨z⟩` divided by the norm; `None` for a zero state.
pub fn position_mean<T: Real>(psi: &Wavefunction<T>) -> Option<[T; 3]> {
    let g = psi.grid;
    let (x, y, z) = (g.axis(0), g.axis(1), g.axis(2));
    let (ny, nz) = (g.n[1], g.n[2]);
    let d = &psi.data;
    let s = par_reduce(
        d.len(),
        [T::zero(); 4],
        |q| {
            let w = d[q].norm_sqr();
            [w * x[q / (ny * nz)], w * y[(q / nz) % ny], w * z[q % nz], w]
        },
        |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]],
    );
    if s[3] > T::zero() {
        Some([s[0] / s[3], s[1] / s[3], s[2] / s[3]])
    } else {
        None
    }
}

/// `∂ψ/∂x_a` for each axis by spectral differentiation (Nyquist mode
/// dropped so the derivative stays anti-Hermitian).
pub fn spectral_gradient<T: Real>(prop: &Propagator<T>, psi: &Wavefunction<T>) -> [Vec<Cplx<T>>; 3] {
    let g = prop.grid();
    let mut hat = psi.data.clone();
    prop.fft().forward(&mut hat);
    let k = prop.wavenumbers();
    let (ny, nz) = (g.n[1], g.n[2]);
    [0, 1, 2].map(|axis| {
        let n = g.n[axis];
        let ka: Vec<T> = k[axis]
            .iter()
            .enumerate()
            .map(|(j, v)| if j == n / 2 { T::zero() } else { *v })
            .collect();
        let mut d = hat.clone();
        d.par_chunks_mut(ny * nz).enumerate().for_each(|(i, slab)| {
            for (q, v) in slab.iter_mut().enumerate() {
                let kk = match axis {
                    0 => ka[i],
                    1 => ka[q / nz],
                    _ => ka[q % nz],
                };
                *v = *v * cplx(T::zero(), kk);
            }
        });
        prop.fft().inverse(&mut d);
        d
    })
}

/// Kinetic angular momentum `⟨r × (p − qA)⟩` (not divided by the norm),
/// with `A` given on the grid; `None` means `A = 0`.
pub fn kinetic_angular_momentum<T: Real>(
    prop: &Propagator<T>,
    psi: &Wavefunction<T>,
    field: Option<&GridField<T>>,
) -> [T; 3] {
    let g = *prop.grid();
    let q = prop.config().charge;
    let grad = spectral_gradient(prop, psi);
    let (x, y, z) = (g.axis(0), g.axis(1), g.axis(2));
    let (ny, nz) = (g.n[1], g.n[2]);
    let i_unit = cplx(T::zero(), -T::one());
    let s = par_reduce(
        g.len(),
        [T::zero(); 3],
        |idx| {
            let psi_v = psi.data[idx];
            let (xx, yy, zz) = (x[idx / (ny * nz)], y[(idx / nz) % ny], z[idx % nz]);
            let (ax, ay) = match field {
                Some(f) if !f.off => (f.ax(idx), f.ay(idx)),
                _ => (T::zero(), T::zero()),
            };
            // (p − qA)ψ per component.
            let px = grad[0][idx] * i_unit - psi_v * (q * ax);
            let py = grad[1][idx] * i_unit - psi_v * (q * ay);
            let pz = grad[2][idx] * i_unit;
            let c = psi_v.conj();
            [
                (c * (pz * yy - py * zz)).re,
                (c * (px * zz - pz * xx)).re,
                (c * (py * xx - px * yy)).re,
            ]
        },
        |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]],
    );
    let dv = g.volume_element();
    [s[0] * dv, s[1] * dv, s[2] * dv]
}

/// `⟨|r|⟩` divided by the norm; `None` for a zero state.
pub fn mean_radius<T: Real>(psi: &Wavefunction<T>) -> Option<T> {
    let g = psi.grid;
    let (x, y, z) = (g.axis(0), g.axis(1), g.axis(2));
    let (ny, nz) = (g.n[1], g.n[2]);
    let d = &psi.data;
    let (num, den) = par_reduce(
        d.len(),
        (T::zero(), T::zero()),
        |q| {
            let (xx, yy, zz) = (x[q / (ny * nz)], y[(q / nz) % ny], z[q % nz]);
            let w = d[q].norm_sqr();
            (w * (xx * xx + yy * yy + zz * zz).sqrt(), w)
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    if den > T::zero() {
        Some(num / den)
    } else {
        None
    }
}

/// Fraction of `‖ψ‖²` inside the ball `|r| ≤ radius`.
pub fn weight_within<T: Real>(psi: &Wavefunction<T>, radius: T) -> Option<T> {
    let g = psi.grid;
    let (x, y, z) = (g.axis(0), g.axis(1), g.axis(2));
    let (ny, nz) = (g.n[1], g.n[2]);
    let r2 = radius * radius;
    let d = &psi.data;
    let (inside, total) = par_reduce(
        d.len(),
        (T::zero(), T::zero()),
        |q| {
            let (xx, yy, zz) = (x[q / (ny * nz)], y[(q / nz) % ny], z[q % nz]);
            let w = d[q].norm_sqr();
            (if xx * xx + yy * yy + zz * zz <= r2 { w } else { T::zero() }, w)
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    if total > T::zero() {
        Some(inside / total)
    } else {
        None
    }
}
