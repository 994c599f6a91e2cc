//! Strang split-operator step for `(p − qA)²/2 + V` with a space-dependent
//! transverse `A(r, t)`.
//!
//! `A` is split into its value `A_u(t)` at the grid center and the remainder
//! `ΔA(r, t)`. Then
//!
//! ```text
//! (p − qA)²/2 = (p − qA_u)²/2 − q(p·ΔA + ΔA·p)/2 + q²(A² − A_u²)/2
//! ```
//!
//! The first term is diagonal in momentum space and the last in position
//! space. The middle term uses an 8th-order antisymmetric difference for `p`,
//! which makes it `i q/2` times a real antisymmetric matrix. Its exponential
//! is applied as products of commuting 2×2 rotations on disjoint bond sets,
//! each in Cayley form, so the step stays exactly unitary. One step is
//!
//! ```text
//! e^{−iτV'/2} R e^{−iτT_u} R̃ e^{−iτV'/2}
//! ```
//!
//! where `R` is the bond product for `τ/2` and `R̃` the same factors in
//! reverse order. Every field is evaluated at the midpoint time. The factor sequence is
//! a palindrome, so a step with `−τ` inverts a step with `τ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fft::Fft3;
use super::{GridSpec, TdseError, Wavefunction};
use crate::beam::{FieldModel, PulseConfig};
use crate::scalar::{cis, cplx, lit, par_reduce, Cplx, Real, REDUCE_CHUNK};

/// Antisymmetric 8th-order first-derivative stencil, `c_s` for `s = 1..4`.
const FD8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    #[default]
    Velocity,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbsorberKind {
    #[default]
    CosMask,
    None,
}

/// Boundary absorber: each step multiplies by `∏_axes cos(π s/2)^strength`
/// where `s ∈ [0, 1]` is the depth into a layer of `width` au at each face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorberConfig<T: Real> {
    pub kind: AbsorberKind,
    pub width: T,
    pub strength: T,
}

impl<T: Real> AbsorberConfig<T> {
    pub fn none() -> Self {
        AbsorberConfig {
            kind: AbsorberKind::None,
            width: T::zero(),
            strength: T::zero(),
        }
    }

    /// Mask over the outer 20% of the shortest box side.
    pub fn default_for(grid: &GridSpec<T>) -> Self {
        let l = (0..3).map(|a| grid.box_length(a)).fold(T::infinity(), T::min);
        AbsorberConfig {
            kind: AbsorberKind::CosMask,
            width: l * lit(0.2),
            strength: lit(0.125),
        }
    }

    pub fn is_active(&self) -> bool {
        self.kind == AbsorberKind::CosMask && self.width > T::zero() && self.strength > T::zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorConfig<T: Real> {
    pub dt: T,
    pub gauge: Gauge,
    /// Softening length `a` in `V = −1/√(r² + a²)`.
    pub soft_core_a: T,
    pub absorber: AbsorberConfig<T>,
    /// Particle charge entering the minimal coupling.
    pub charge: T,
    /// Nuclear charge `Z` scaling the soft-core well; zero gives a free
    /// particle.
    pub nuclear_charge: T,
}

impl<T: Real> PropagatorConfig<T> {
    pub fn new(dt: T, grid: &GridSpec<T>) -> Self {
        PropagatorConfig {
            dt,
            gauge: Gauge::Velocity,
            soft_core_a: lit(0.05),
            absorber: AbsorberConfig::default_for(grid),
            charge: -T::one(),
            nuclear_charge: T::one(),
        }
    }

    pub fn validate(&self, grid: &GridSpec<T>) -> Result<(), TdseError> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(TdseError::InvalidConfig("dt must be positive".into()));
        }
        if !(self.soft_core_a >= T::zero()) {
            return Err(TdseError::InvalidConfig("soft_core_a must be non-negative".into()));
        }
        if self.absorber.is_active() {
            for a in 0..3 {
                if self.absorber.width * lit(2.0) >= grid.box_length(a) {
                    return Err(TdseError::InvalidConfig(
                        "absorber width must be less than half the box".into(),
                    ));
                }
            }
        }
        if !self.nuclear_charge.is_finite() {
            return Err(TdseError::InvalidConfig("nuclear_charge must be finite".into()));
        }
        if !self.charge.is_finite() {
            return Err(TdseError::InvalidConfig("charge must be finite".into()));
        }
        Ok(())
    }
}

/// Soft-core Coulomb potential of a unit nuclear charge at the origin.
pub fn soft_core_potential<T: Real>(grid: &GridSpec<T>, a: T) -> Vec<T> {
    let (x, y, z) = (grid.axis(0), grid.axis(1), grid.axis(2));
    let mut v = vec![T::zero(); grid.len()];
    let (ny, nz) = (grid.n[1], grid.n[2]);
    v.par_chunks_mut(ny * nz).enumerate().for_each(|(i, slab)| {
        for (q, out) in slab.iter_mut().enumerate() {
            let (yy, zz) = (y[q / nz], z[q % nz]);
            *out = -T::one() / (x[i] * x[i] + yy * yy + zz * zz + a * a).sqrt();
        }
    });
    v
}

fn mask_1d<T: Real>(grid: &GridSpec<T>, axis: usize, abs: &AbsorberConfig<T>) -> Vec<T> {
    let half = grid.box_length(axis) / lit(2.0);
    let c = grid.center[axis];
    grid.axis(axis)
        .into_iter()
        .map(|x| {
            let d = half - (x - c).abs();
            if d >= abs.width {
                T::one()
            } else {
                let s = T::one() - d / abs.width;
                (T::FRAC_PI_2() * s).cos().max(T::zero()).powf(abs.strength)
            }
        })
        .collect()
}

/// Transverse vector potential sampled on the grid at one instant.
#[derive(Clone, Debug)]
pub struct GridField<T: Real> {
    pub t: T,
    /// Value at the grid center.
    pub uniform: [T; 2],
    /// `A − A_u` per node.
    pub dx: Vec<T>,
    pub dy: Vec<T>,
    /// Whether `ΔA` is identically zero.
    pub uniform_only: bool,
    /// Whether the field is zero everywhere.
    pub off: bool,
}

impl<T: Real> GridField<T> {
    pub fn ax(&self, q: usize) -> T {
        self.uniform[0] + self.dx[q]
    }

    pub fn ay(&self, q: usize) -> T {
        self.uniform[1] + self.dy[q]
    }
}

/// Precomputed operators for one grid, propagator setting and pulse.
pub struct Propagator<T: Real> {
    grid: GridSpec<T>,
    cfg: PropagatorConfig<T>,
    pulse: Option<PulseConfig<T>>,
    fft: Fft3<T>,
    k: [Vec<T>; 3],
    potential: Vec<T>,
    mask: Option<Vec<T>>,
    profile: Vec<Cplx<T>>,
    field: GridField<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(grid: GridSpec<T>, cfg: PropagatorConfig<T>, pulse: Option<PulseConfig<T>>) -> Result<Self, TdseError> {
        grid.validate()?;
        cfg.validate(&grid)?;
        if let Some(p) = &pulse {
            p.validate().map_err(TdseError::InvalidConfig)?;
        }
        let mut potential = soft_core_potential(&grid, cfg.soft_core_a);
        potential.iter_mut().for_each(|v| *v *= cfg.nuclear_charge);
        let mask = if cfg.absorber.is_active() {
            let m = [0, 1, 2].map(|a| mask_1d(&grid, a, &cfg.absorber));
            let (ny, nz) = (grid.n[1], grid.n[2]);
            Some(
                (0..grid.len())
                    .map(|q| m[0][q / (ny * nz)] * m[1][(q / nz) % ny] * m[2][q % nz])
                    .collect(),
            )
        } else {
            None
        };
        let profile = match &pulse {
            Some(p) => {
                let (x, y, z) = (grid.axis(0), grid.axis(1), grid.axis(2));
                let (ny, nz) = (grid.n[1], grid.n[2]);
                (0..grid.len())
                    .into_par_iter()
                    .map(|q| p.profile([x[q / (ny * nz)], y[(q / nz) % ny], z[q % nz]]))
                    .collect()
            }
            None => Vec::new(),
        };
        let n = grid.len();
        Ok(Propagator {
            fft: Fft3::new(&grid),
            k: [0, 1, 2].map(|a| grid.wavenumbers(a)),
            grid,
            cfg,
            pulse,
            potential,
            mask,
            profile,
            field: GridField {
                t: T::nan(),
                uniform: [T::zero(); 2],
                dx: vec![T::zero(); n],
                dy: vec![T::zero(); n],
                uniform_only: true,
                off: true,
            },
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn config(&self) -> &PropagatorConfig<T> {
        &self.cfg
    }

    pub fn pulse(&self) -> Option<&PulseConfig<T>> {
        self.pulse.as_ref()
    }

    pub fn potential(&self) -> &[T] {
        &self.potential
    }

    pub fn fft(&self) -> &Fft3<T> {
        &self.fft
    }

    pub fn wavenumbers(&self) -> &[Vec<T>; 3] {
        &self.k
    }

    /// Time interval over which the pulse is on somewhere on the grid.
    pub fn pulse_span(&self) -> Option<(T, T)> {
        let z = self.grid.axis(2);
        self.pulse
            .as_ref()
            .map(|p| p.window_span(z[0], z[z.len() - 1]))
    }

    /// Samples `A` on the grid at time `t`.
    pub fn field_at(&mut self, t: T) -> &GridField<T> {
        if self.field.t == t {
            return &self.field;
        }
        let f = &mut self.field;
        f.t = t;
        let Some(p) = &self.pulse else {
            f.off = true;
            f.uniform_only = true;
            f.uniform = [T::zero(); 2];
            return &self.field;
        };
        let z = self.grid.axis(2);
        let coeffs: Vec<[Cplx<T>; 2]> = z.iter().map(|&zz| p.plane_coefficients(zz, t).0).collect();
        let zero = cplx(T::zero(), T::zero());
        f.off = coeffs.iter().all(|c| c[0] == zero && c[1] == zero);
        if f.off {
            f.uniform = [T::zero(); 2];
            f.uniform_only = true;
            f.dx.par_iter_mut().for_each(|v| *v = T::zero());
            f.dy.par_iter_mut().for_each(|v| *v = T::zero());
            return &self.field;
        }
        let c = self.grid.center;
        let u = p.field(c, t).a;
        f.uniform = [u[0], u[1]];
        let nz = self.grid.n[2];
        let profile = &self.profile;
        let (ux, uy) = (u[0], u[1]);
        f.dx.par_iter_mut()
            .zip(f.dy.par_iter_mut())
            .enumerate()
            .for_each(|(q, (dx, dy))| {
                let s = coeffs[q % nz];
                *dx = (s[0] * profile[q]).re - ux;
                *dy = (s[1] * profile[q]).re - uy;
            });
        let model_uniform = p.ell == 0 && p.model == FieldModel::NearOrigin;
        f.uniform_only = model_uniform
            || (f.dx.par_iter().all(|v| *v == T::zero()) && f.dy.par_iter().all(|v| *v == T::zero()));
        &self.field
    }

    /// One step from `t` with the configured `dt`; returns the probability
    /// removed by the absorber.
    pub fn step(&mut self, psi: &mut Wavefunction<T>, t: T) -> T {
        self.step_by(psi, t, self.cfg.dt)
    }

    /// One step from `t` to `t + dt`; `dt` may be negative.
    pub fn step_by(&mut self, psi: &mut Wavefunction<T>, t: T, dt: T) -> T {
        debug_assert!(psi.grid.matches(&self.grid));
        let half = dt / lit(2.0);
        self.field_at(t + half);
        let q = self.cfg.charge;
        self.position_factor(&mut psi.data, half);
        if !self.field.uniform_only {
            self.bond_rotations(&mut psi.data, half, false);
        }
        self.kinetic_factor(&mut psi.data, dt, [q * self.field.uniform[0], q * self.field.uniform[1]]);
        if !self.field.uniform_only {
            self.bond_rotations(&mut psi.data, half, true);
        }
        self.position_factor(&mut psi.data, half);
        self.absorb(&mut psi.data)
    }

    fn position_factor(&self, data: &mut [Cplx<T>], tau: T) {
        let v = &self.potential;
        let f = &self.field;
        let q2h = self.cfg.charge * self.cfg.charge / lit(2.0);
        if f.off {
            data.par_iter_mut()
                .zip(v.par_iter())
                .for_each(|(d, v)| *d = *d * cis(-tau * *v));
        } else {
            let [ux, uy] = f.uniform;
            let u2 = ux * ux + uy * uy;
            data.par_iter_mut().enumerate().for_each(|(q, d)| {
                let (ax, ay) = (ux + f.dx[q], uy + f.dy[q]);
                let e = v[q] + q2h * (ax * ax + ay * ay - u2);
                *d = *d * cis(-tau * e);
            });
        }
    }

    fn kinetic_factor(&self, data: &mut [Cplx<T>], dt: T, shift: [T; 2]) {
        self.fft.forward(data);
        let half = dt / lit(2.0);
        let phase = |k: &Vec<T>, s: T| -> Vec<Cplx<T>> {
            k.iter().map(|&k| cis(-half * (k - s) * (k - s))).collect()
        };
        let ex = phase(&self.k[0], shift[0]);
        let ey = phase(&self.k[1], shift[1]);
        let ez = phase(&self.k[2], T::zero());
        let (ny, nz) = (self.grid.n[1], self.grid.n[2]);
        data.par_chunks_mut(ny * nz).enumerate().for_each(|(i, slab)| {
            for j in 0..ny {
                let exy = ex[i] * ey[j];
                let row = &mut slab[j * nz..(j + 1) * nz];
                for (d, e) in row.iter_mut().zip(&ez) {
                    *d = *d * exy * *e;
                }
            }
        });
        self.fft.inverse(data);
    }

    /// Applies `exp(−iτ H_I)` for the `ΔA` part as bond rotations, visiting
    /// `(axis, stride, class)` in forward or reverse order.
    fn bond_rotations(&self, data: &mut [Cplx<T>], tau: T, reverse: bool) {
        let mut order = Vec::with_capacity(16);
        for axis in 0..2 {
            for s in 1..=FD8.len() {
                for class in 0..2 {
                    order.push((axis, s, class));
                }
            }
        }
        if reverse {
            order.reverse();
        }
        let scale = tau * self.cfg.charge / (lit::<T>(2.0) * self.grid.h);
        for (axis, s, class) in order {
            let coef = scale * lit::<T>(FD8[s - 1]);
            let da = if axis == 0 { &self.field.dx } else { &self.field.dy };
            if axis == 0 {
                self.sweep_x(data, da, coef, s, class);
            } else {
                self.sweep_y(data, da, coef, s, class);
            }
        }
    }

    fn sweep_x(&self, data: &mut [Cplx<T>], da: &[T], coef: T, s: usize, class: usize) {
        let nx = self.grid.n[0];
        let plane = self.grid.n[1] * self.grid.n[2];
        for i in 0..nx.saturating_sub(s) {
            if ((i % (2 * s)) >= s) as usize != class {
                continue;
            }
            let (lo, hi) = data.split_at_mut((i + s) * plane);
            let a = &mut lo[i * plane..(i + 1) * plane];
            let b = &mut hi[..plane];
            let (da_a, da_b) = (&da[i * plane..(i + 1) * plane], &da[(i + s) * plane..(i + s + 1) * plane]);
            a.par_iter_mut()
                .zip(b.par_iter_mut())
                .zip(da_a.par_iter().zip(da_b.par_iter()))
                .for_each(|((u, v), (p, r))| rotate(u, v, coef * (*p + *r)));
        }
    }

    fn sweep_y(&self, data: &mut [Cplx<T>], da: &[T], coef: T, s: usize, class: usize) {
        let (ny, nz) = (self.grid.n[1], self.grid.n[2]);
        data.par_chunks_mut(ny * nz)
            .zip(da.par_chunks(ny * nz))
            .for_each(|(slab, das)| {
                for j in 0..ny.saturating_sub(s) {
                    if ((j % (2 * s)) >= s) as usize != class {
                        continue;
                    }
                    let (lo, hi) = slab.split_at_mut((j + s) * nz);
                    let a = &mut lo[j * nz..(j + 1) * nz];
                    let b = &mut hi[..nz];
                    let (pa, pb) = (&das[j * nz..(j + 1) * nz], &das[(j + s) * nz..(j + s + 1) * nz]);
                    for k in 0..nz {
                        rotate(&mut a[k], &mut b[k], coef * (pa[k] + pb[k]));
                    }
                }
            });
    }

    fn absorb(&self, data: &mut [Cplx<T>]) -> T {
        let Some(mask) = &self.mask else {
            return T::zero();
        };
        let parts: Vec<T> = data
            .par_chunks_mut(REDUCE_CHUNK)
            .zip(mask.par_chunks(REDUCE_CHUNK))
            .map(|(d, m)| {
                let mut removed = T::zero();
                for (d, m) in d.iter_mut().zip(m) {
                    if *m < T::one() {
                        let before = d.norm_sqr();
                        *d = *d * *m;
                        removed += before - d.norm_sqr();
                    }
                }
                removed
            })
            .collect();
        let removed = parts.into_iter().fold(T::zero(), |a, b| a + b);
        removed * self.grid.volume_element()
    }

    /// `Hψ` of the field-free Hamiltonian.
    pub fn apply_field_free_hamiltonian(&self, psi: &[Cplx<T>], out: &mut Vec<Cplx<T>>) {
        out.clear();
        out.extend_from_slice(psi);
        self.fft.forward(out);
        let (ny, nz) = (self.grid.n[1], self.grid.n[2]);
        let k = &self.k;
        out.par_chunks_mut(ny * nz).enumerate().for_each(|(i, slab)| {
            for (q, d) in slab.iter_mut().enumerate() {
                let (kx, ky, kz) = (k[0][i], k[1][q / nz], k[2][q % nz]);
                *d = *d * ((kx * kx + ky * ky + kz * kz) / lit(2.0));
            }
        });
        self.fft.inverse(out);
        out.par_iter_mut()
            .zip(psi.par_iter().zip(self.potential.par_iter()))
            .for_each(|(o, (p, v))| *o += *p * *v);
    }

    /// `⟨ψ|H₀|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn field_free_energy(&self, psi: &Wavefunction<T>) -> T {
        let mut h = Vec::new();
        self.apply_field_free_hamiltonian(&psi.data, &mut h);
        let d = &psi.data;
        let num = par_reduce(d.len(), T::zero(), |i| (d[i].conj() * h[i]).re, |a, b| a + b);
        let den = par_reduce(d.len(), T::zero(), |i| d[i].norm_sqr(), |a, b| a + b);
        num / den
    }
}

/// Exactly orthogonal rotation by the Cayley angle of `θ`:
/// `(u, v) ← (c u + s v, −s u + c v)`.
#[inline]
fn rotate<T: Real>(u: &mut Cplx<T>, v: &mut Cplx<T>, theta: T) {
    let q = theta * theta / lit(4.0);
    let d = T::one() / (T::one() + q);
    let c = (T::one() - q) * d;
    let s = theta * d;
    let (a, b) = (*u, *v);
    *u = a * c + b * s;
    *v = b * c - a * s;
}

/// Cycle-averaged ponderomotive energy `q²⟨A²⟩/2` at the envelope peak on
/// every grid node.
pub fn ponderomotive_profile<T: Real>(pulse: &PulseConfig<T>, grid: &GridSpec<T>, charge: T) -> Vec<T> {
    let (x, y, z) = (grid.axis(0), grid.axis(1), grid.axis(2));
    let (ny, nz) = (grid.n[1], grid.n[2]);
    (0..grid.len())
        .into_par_iter()
        .map(|q| {
            let r = [x[q / (ny * nz)], y[(q / nz) % ny], z[q % nz]];
            pulse.ponderomotive_energy(pulse.profile(r), charge)
        })
        .collect()
}
