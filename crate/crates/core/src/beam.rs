//! Laguerre-Gaussian pulse beams.
//!
//! The vector potential is
//!
//! ```text
//! A(r, t) = A0 w0 sin²(ω_e (z + a0)/c − ω_e t) · W(z, t)
//!           · 2 Re[ ê e^{i(kz − ωt + χ)} LG_{ℓ,p}(ρ, φ, z) ]
//! ```
//!
//! with `ê = (α, β, 0)`, `k = ω/c`, `ω_e = ω / (2 N_cyc)` and `W` the
//! indicator of `(z + a0)/c < t < (z + a0)/c + N_cyc τ`. The near-origin
//! form keeps only the leading `(√2ρ/w0)^{|ℓ|} e^{iℓφ}` behaviour of the
//! mode and evaluates envelope and carrier at `z = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::angular::Polarization;
use crate::scalar::{cis, cplx, int, lit, to_f64, Cplx, Real};

/// Speed of light in atomic units.
pub const SPEED_OF_LIGHT: f64 = 137.035_999_084;

/// Overall constant of the transverse mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LgNormalization {
    /// Peak-free form `(w0/w)(√2ρ/w)^{|ℓ|} L_p^{|ℓ|}(2ρ²/w²) e^{−ρ²/w²}…`, so that
    /// `A0 w0` sets the field scale directly.
    #[default]
    Unit,
    /// Unit-power form, the above times `√(2 p! / (π (p+|ℓ|)!)) / w0`.
    Allen,
}

/// Which spatial form of the field the propagator sees.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldModel {
    /// Full mode with Gouy, curvature and `z`-dependent envelope.
    Full,
    /// Leading near-axis term, independent of `z`.
    #[default]
    NearOrigin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseConfig<T: Real> {
    /// `A0`, multiplied by `w0` in the field.
    pub amplitude: T,
    pub polarization: Polarization<T>,
    pub omega: T,
    pub n_cyc: u32,
    pub ell: i32,
    pub p: u32,
    pub waist: T,
    pub chi: T,
    /// `a0` in the envelope argument and the window.
    pub origin_offset: T,
    /// Position of the atom relative to the beam axis is `−atom_displacement`:
    /// the field at grid point `r` is the beam evaluated at `r + d`.
    pub atom_displacement: [T; 3],
    pub normalization: LgNormalization,
    pub model: FieldModel,
    pub speed_of_light: T,
}

/// Vector potential and electric field at one space-time point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample<T: Real> {
    pub a: [T; 3],
    pub e: [T; 3],
}

impl<T: Real> FieldSample<T> {
    fn zero() -> Self {
        FieldSample {
            a: [T::zero(); 3],
            e: [T::zero(); 3],
        }
    }
}

/// Generalized Laguerre polynomial `L_p^{(a)}(x)`.
pub fn laguerre<T: Real>(p: u32, a: u32, x: T) -> T {
    let a = int::<T>(a as i64);
    let mut prev = T::one();
    if p == 0 {
        return prev;
    }
    let mut cur = T::one() + a - x;
    for k in 1..p {
        let kk = int::<T>(k as i64);
        let next = ((lit::<T>(2.0) * kk + T::one() + a - x) * cur - (kk + a) * prev) / (kk + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

impl<T: Real> PulseConfig<T> {
    /// Pulse with the given shape, unit normalization, near-origin model and
    /// no offsets.
    pub fn new(amplitude: T, polarization: Polarization<T>, omega: T, n_cyc: u32, ell: i32, waist: T) -> Self {
        PulseConfig {
            amplitude,
            polarization,
            omega,
            n_cyc,
            ell,
            p: 0,
            waist,
            chi: T::zero(),
            origin_offset: T::one(),
            atom_displacement: [T::zero(); 3],
            normalization: LgNormalization::Unit,
            model: FieldModel::NearOrigin,
            speed_of_light: lit(SPEED_OF_LIGHT),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.omega > T::zero()) {
            return Err("omega must be positive".into());
        }
        if self.n_cyc < 1 {
            return Err("n_cyc must be at least 1".into());
        }
        if !(self.waist > T::zero()) {
            return Err("waist must be positive".into());
        }
        if !(self.speed_of_light > T::zero()) {
            return Err("speed_of_light must be positive".into());
        }
        if !self.amplitude.is_finite() {
            return Err("amplitude must be finite".into());
        }
        Ok(())
    }

    pub fn period(&self) -> T {
        lit::<T>(2.0 * PI) / self.omega
    }

    /// `ω_e = π / (N_cyc τ)`.
    pub fn envelope_frequency(&self) -> T {
        T::PI() / (int::<T>(self.n_cyc as i64) * self.period())
    }

    pub fn duration(&self) -> T {
        int::<T>(self.n_cyc as i64) * self.period()
    }

    pub fn wavenumber(&self) -> T {
        self.omega / self.speed_of_light
    }

    pub fn rayleigh_range(&self) -> T {
        self.wavenumber() * self.waist * self.waist / lit(2.0)
    }

    fn model_z(&self, z: T) -> T {
        match self.model {
            FieldModel::Full => z + self.atom_displacement[2],
            FieldModel::NearOrigin => T::zero(),
        }
    }

    /// Interval during which the field is on at grid height `z`.
    pub fn window(&self, z: T) -> (T, T) {
        let t0 = (self.model_z(z) + self.origin_offset) / self.speed_of_light;
        (t0, t0 + self.duration())
    }

    /// Time span covering the window at every `z` in `[z_min, z_max]`.
    pub fn window_span(&self, z_min: T, z_max: T) -> (T, T) {
        let (a, b) = self.window(z_min);
        let (c, d) = self.window(z_max);
        (a.min(c), b.max(d))
    }

    fn norm_constant(&self) -> T {
        let l = self.ell.unsigned_abs();
        match self.normalization {
            LgNormalization::Unit => T::one(),
            LgNormalization::Allen => {
                let c = (2.0 * factorial(self.p) / (PI * factorial(self.p + l))).sqrt();
                lit::<T>(c) / self.waist
            }
        }
    }

    /// `LG_{ℓ,p}` at cylindrical coordinates about the beam axis.
    pub fn lg_mode(&self, rho: T, phi: T, z: T) -> Cplx<T> {
        let two = lit::<T>(2.0);
        let l = self.ell.unsigned_abs();
        let zr = self.rayleigh_range();
        let w = self.waist * (T::one() + (z / zr).powi(2)).sqrt();
        let s = two.sqrt() * rho / w;
        let amp = self.norm_constant() * self.waist / w
            * s.powi(l as i32)
            * laguerre(self.p, l, two * rho * rho / (w * w))
            * (-(rho * rho) / (w * w)).exp();
        let curvature = self.wavenumber() * rho * rho * z / (two * (z * z + zr * zr));
        let gouy = int::<T>((2 * self.p + l + 1) as i64) * (z / zr).atan();
        cis(curvature - gouy + int::<T>(self.ell as i64) * phi) * amp
    }

    /// Leading near-axis behaviour `N L_p^{|ℓ|}(0) (√2ρ/w0)^{|ℓ|} e^{iℓφ}`,
    /// written in Cartesian form so it is smooth through the axis.
    pub fn near_origin_profile(&self, x: T, y: T) -> Cplx<T> {
        let l = self.ell.unsigned_abs();
        let scale = lit::<T>(2.0).sqrt() / self.waist;
        let sign = if self.ell < 0 { -T::one() } else { T::one() };
        let base = cplx(x * scale, sign * y * scale);
        let lag0 = lit::<T>(binomial(self.p + l, self.p));
        base.powu(l) * (self.norm_constant() * lag0)
    }

    /// Complex transverse profile seen at grid point `r` under the
    /// configured model.
    pub fn profile(&self, r: [T; 3]) -> Cplx<T> {
        let d = self.atom_displacement;
        let (x, y) = (r[0] + d[0], r[1] + d[1]);
        match self.model {
            FieldModel::NearOrigin => self.near_origin_profile(x, y),
            FieldModel::Full => {
                let rho = x.hypot(y);
                let phi = y.atan2(x);
                self.lg_mode(rho, phi, r[2] + d[2])
            }
        }
    }

    /// `(envelope, ∂envelope/∂t)` including the window, at grid height `z`.
    pub fn envelope(&self, z: T, t: T) -> (T, T) {
        let (t0, t1) = self.window(z);
        if t <= t0 || t >= t1 {
            return (T::zero(), T::zero());
        }
        let we = self.envelope_frequency();
        let arg = we * ((self.model_z(z) + self.origin_offset) / self.speed_of_light - t);
        let s = arg.sin();
        (s * s, -we * (lit::<T>(2.0) * arg).sin())
    }

    /// `e^{i(kz − ωt + χ)}` at grid height `z`.
    pub fn carrier(&self, z: T, t: T) -> Cplx<T> {
        cis(self.wavenumber() * self.model_z(z) - self.omega * t + self.chi)
    }

    /// Complex amplitudes `(s_x, s_y)` such that at time `t` on the plane
    /// `z` the field is `A_i = Re[s_i P(r)]` and `E_i = Re[e_i P(r)]`, with
    /// `P` the value of [`profile`](Self::profile).
    pub fn plane_coefficients(&self, z: T, t: T) -> ([Cplx<T>; 2], [Cplx<T>; 2]) {
        let (env, denv) = self.envelope(z, t);
        let scale = lit::<T>(2.0) * self.amplitude * self.waist;
        let c = self.carrier(z, t);
        let pol = [self.polarization.alpha(), self.polarization.beta()];
        // E = −∂A/∂t; the carrier derivative is −iω.
        let de = c * cplx(-denv, self.omega * env) * scale;
        let a = c * env * scale;
        ([pol[0] * a, pol[1] * a], [pol[0] * de, pol[1] * de])
    }

    fn sample_with(&self, profile: Cplx<T>, z: T, t: T) -> FieldSample<T> {
        let (a, e) = self.plane_coefficients(z, t);
        if a[0].norm() == T::zero() && a[1].norm() == T::zero() && e[0].norm() == T::zero() && e[1].norm() == T::zero() {
            return FieldSample::zero();
        }
        FieldSample {
            a: [(a[0] * profile).re, (a[1] * profile).re, T::zero()],
            e: [(e[0] * profile).re, (e[1] * profile).re, T::zero()],
        }
    }

    /// Field under the configured model.
    pub fn field(&self, r: [T; 3], t: T) -> FieldSample<T> {
        self.sample_with(self.profile(r), r[2], t)
    }

    /// Full-mode field regardless of the configured model.
    pub fn vector_potential(&self, r: [T; 3], t: T) -> FieldSample<T> {
        let mut c = self.clone();
        c.model = FieldModel::Full;
        c.field(r, t)
    }

    /// Near-origin field regardless of the configured model.
    pub fn near_origin_potential(&self, r: [T; 3], t: T) -> FieldSample<T> {
        let mut c = self.clone();
        c.model = FieldModel::NearOrigin;
        c.field(r, t)
    }

    /// `A0` giving a carrier electric-field amplitude `e_target` at distance
    /// `rho_ref` from the axis at the envelope peak (near-origin profile,
    /// envelope derivative neglected). Independent of polarization.
    pub fn amplitude_for_field(&self, e_target: T, rho_ref: T) -> T {
        let p = self.near_origin_profile(rho_ref, T::zero()).norm();
        e_target / (lit::<T>(2.0) * self.omega * self.waist * p)
    }

    /// Cycle-averaged `q²⟨A²⟩/2` at the envelope peak for a transverse
    /// profile value `profile`.
    pub fn ponderomotive_energy(&self, profile: Cplx<T>, charge: T) -> T {
        let a = self.amplitude * self.waist * profile.norm();
        charge * charge * a * a
    }

    /// Carrier-envelope offset of the waveform at `n` equally spaced azimuths
    /// on a circle of `radius` in the plane `z = 0`, unwrapped along the
    /// circle. The offset is the carrier phase `arg(ê_j P e^{iχ}) − ω t_peak`
    /// of the dominant polarization component `j`, reduced so that the first
    /// sample lies in `(−π, π]`.
    pub fn cep_map(&self, radius: T, n: usize) -> Vec<(T, T)> {
        let (t0, t1) = self.window(T::zero());
        let t_peak = (t0 + t1) / lit(2.0);
        let pol = if self.polarization.alpha().norm() >= self.polarization.beta().norm() {
            self.polarization.alpha()
        } else {
            self.polarization.beta()
        };
        let two_pi = lit::<T>(2.0 * PI);
        let mut out: Vec<(T, T)> = Vec::with_capacity(n);
        for j in 0..n {
            let phi = two_pi * int::<T>(j as i64) / int::<T>(n as i64);
            let r = [radius * phi.cos(), radius * phi.sin(), T::zero()];
            let mut c = self.clone();
            c.atom_displacement = [T::zero(); 3];
            let ph = (pol * c.profile(r) * cis(self.chi)).arg() - self.omega * t_peak;
            let v = match out.last() {
                None => wrap(ph),
                Some(&(_, prev)) => prev + wrap(ph - prev),
            };
            out.push((phi, v));
        }
        out
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap<T: Real>(x: T) -> T {
    let two_pi = lit::<T>(2.0 * PI);
    let mut y = x - two_pi * (x / two_pi).round();
    if y <= -T::PI() {
        y += two_pi;
    }
    y
}

impl PulseConfig<f64> {
    /// Human-readable summary for logs.
    pub fn describe(&self) -> String {
        format!(
            "ℓ={} p={} pol={} ω={} N_cyc={} A0={:.6e} w0={:.3e} model={:?}",
            self.ell,
            self.p,
            self.polarization,
            to_f64(self.omega),
            self.n_cyc,
            to_f64(self.amplitude),
            to_f64(self.waist),
            self.model
        )
    }
}
