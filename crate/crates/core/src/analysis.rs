//! Ground/excited split, spherical-harmonic channel weights, selection-rule
//! compliance and the position-space observables of the excited part.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angular::{
    derive_selection_rules, ponderomotive_rules, HamiltonianPart,
    HarmonicIndex, Polarization, PolarizationRecord, SelectionRuleSet,
};
use crate::quadrature::{gauss_legendre, SphereQuadrature};
use crate::scalar::{cplx, int, lit, to_f64, Cplx, Real, REDUCE_CHUNK};
use crate::tdse::observables::{kinetic_angular_momentum, position_mean};
use crate::tdse::{GridSpec, Propagator, TdseError, Wavefunction};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("wavefunctions live on different grids")]
    GridMismatch,
    #[error("the analyzed state has zero norm")]
    ZeroNorm,
    #[error("insufficient angular resolution: {0}")]
    Resolution(String),
    #[error("invalid analysis options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Tdse(#[from] TdseError),
}

/// `α = ⟨g|ψ⟩/⟨g|g⟩` and `δψ = ψ − α g`.
pub fn split_excited<T: Real>(
    psi: &Wavefunction<T>,
    ground: &Wavefunction<T>,
) -> Result<(Cplx<T>, Wavefunction<T>), AnalysisError> {
    if !psi.grid.matches(&ground.grid) {
        return Err(AnalysisError::GridMismatch);
    }
    let gg = ground.norm_sqr();
    if !(gg > T::zero()) {
        return Err(AnalysisError::ZeroNorm);
    }
    let alpha = ground.inner(psi)? / gg;
    let mut delta = psi.clone();
    delta.axpy(-alpha, ground)?;
    // A second pass removes the rounding residue of the first.
    let beta = ground.inner(&delta)? / gg;
    delta.axpy(-beta, ground)?;
    Ok((alpha + beta, delta))
}

/// Four-point Lagrange weights at fractional offset `t ∈ [0, 1)` for nodes
/// `−1, 0, 1, 2`.
fn lagrange4<T: Real>(t: T) -> [T; 4] {
    let one = T::one();
    let two = lit::<T>(2.0);
    let six = lit::<T>(6.0);
    [
        -t * (t - one) * (t - two) / six,
        (t + one) * (t - one) * (t - two) / two,
        -(t + one) * t * (t - two) / two,
        (t + one) * t * (t - one) / six,
    ]
}

/// Tricubic interpolation of grid data at `r`. `None` when the stencil
/// leaves the grid.
pub fn interpolate<T: Real>(grid: &GridSpec<T>, data: &[Cplx<T>], r: [T; 3]) -> Option<Cplx<T>> {
    let mut base = [0usize; 3];
    let mut w = [[T::zero(); 4]; 3];
    for a in 0..3 {
        let u = (r[a] - grid.center[a]) / grid.h + int::<T>(grid.n[a] as i64 - 1) / lit(2.0);
        let f = u.floor();
        let i = to_f64(f) as i64 - 1;
        if i < 0 || i + 3 > grid.n[a] as i64 - 1 {
            return None;
        }
        base[a] = i as usize;
        w[a] = lagrange4(u - f);
    }
    let (sy, sz) = (grid.stride(1), grid.stride(0));
    let mut acc = cplx(T::zero(), T::zero());
    for (i, wx) in w[0].iter().enumerate() {
        for (j, wy) in w[1].iter().enumerate() {
            let row = (base[0] + i) * sz + (base[1] + j) * sy + base[2];
            let wxy = *wx * *wy;
            let mut s = cplx(T::zero(), T::zero());
            for (k, wz) in w[2].iter().enumerate() {
                s += data[row + k] * *wz;
            }
            acc += s * wxy;
        }
    }
    Some(acc)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions<T: Real> {
    pub l_max: usize,
    pub n_radial: usize,
    /// Radial cutoff; `None` takes the largest radius clear of the absorber
    /// layer `absorber_width` (or of the interpolation stencil).
    pub r_max: Option<T>,
    pub absorber_width: T,
    /// `None` takes `2 l_max + 2` Gauss–Legendre nodes.
    pub n_theta: Option<usize>,
    /// `None` takes `4 l_max + 4` uniform nodes.
    pub n_phi: Option<usize>,
}

impl<T: Real> SpectrumOptions<T> {
    pub fn new(l_max: usize, n_radial: usize) -> Self {
        SpectrumOptions {
            l_max,
            n_radial,
            r_max: None,
            absorber_width: T::zero(),
            n_theta: None,
            n_phi: None,
        }
    }

    pub fn with_r_max(mut self, r: Option<T>) -> Self {
        self.r_max = r;
        self
    }

    /// Radial cutoff used for `grid`.
    pub fn resolve_r_max(&self, grid: &GridSpec<T>) -> T {
        if let Some(r) = self.r_max {
            return r;
        }
        let margin = lit::<T>(2.5) * grid.h;
        (0..3)
            .map(|a| grid.box_length(a) / lit(2.0) - self.absorber_width.max(margin) - margin)
            .fold(T::infinity(), T::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelWeight {
    #[serde(rename = "L")]
    pub l: i32,
    #[serde(rename = "M")]
    pub m: i32,
    #[serde(rename = "P")]
    pub p: f64,
}

/// Channel probabilities `P_{L,M} = ∫₀^{r_max} r² |u_{L,M}(r)|² dr`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalSpectrum<T: Real> {
    /// Ordered by `(L, M)`.
    pub entries: Vec<(HarmonicIndex, T)>,
    pub l_max: usize,
    pub r_max: T,
    pub n_radial: usize,
    /// `∫ |δψ|²` over the same ball and mesh; `Σ P ≤ shell_norm`.
    pub shell_norm: T,
}

impl<T: Real> SphericalSpectrum<T> {
    pub fn get(&self, l: i32, m: i32) -> T {
        self.entries
            .iter()
            .find(|(k, _)| k.l() == l && k.m() == m)
            .map(|(_, p)| *p)
            .unwrap_or_else(T::zero)
    }

    pub fn total(&self) -> T {
        self.entries.iter().fold(T::zero(), |a, (_, p)| a + *p)
    }

    /// Channels sorted by decreasing weight.
    pub fn ranking(&self) -> Vec<(HarmonicIndex, T)> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        v
    }

    pub fn channels(&self) -> Vec<ChannelWeight> {
        self.entries
            .iter()
            .map(|(k, p)| ChannelWeight {
                l: k.l(),
                m: k.m(),
                p: to_f64(*p),
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "l_max": self.l_max,
            "r_max": to_f64(self.r_max),
            "n_radial": self.n_radial,
            "shell_norm": to_f64(self.shell_norm),
            "channels": self.channels(),
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "L,M,P")?;
        for c in self.channels() {
            writeln!(w, "{},{},{:.12e}", c.l, c.m, c.p)?;
        }
        Ok(())
    }
}

pub fn spherical_spectrum<T: Real>(
    delta: &Wavefunction<T>,
    opts: &SpectrumOptions<T>,
) -> Result<SphericalSpectrum<T>, AnalysisError> {
    let l_max = opts.l_max;
    let n_theta = opts.n_theta.unwrap_or(2 * l_max + 2);
    let n_phi = opts.n_phi.unwrap_or(4 * l_max + 4);
    if n_theta < l_max + 1 || n_phi < 2 * l_max + 1 {
        return Err(AnalysisError::Resolution(format!(
            "L_max = {l_max} needs at least {} polar and {} azimuthal nodes, got {n_theta} and {n_phi}",
            l_max + 1,
            2 * l_max + 1
        )));
    }
    if opts.n_radial == 0 {
        return Err(AnalysisError::InvalidOptions("n_radial must be positive".into()));
    }
    let grid = delta.grid;
    let r_max = opts.resolve_r_max(&grid);
    if !(r_max > T::zero()) {
        return Err(AnalysisError::InvalidOptions("no room for radial shells inside the absorber".into()));
    }
    let sphere = SphereQuadrature::new(n_theta, n_phi).grid::<T>();
    let table = sphere.harmonic_table(l_max);
    let weights = sphere.weights();
    let dirs: Vec<[T; 3]> = sphere
        .nodes()
        .map(|(t, p, _)| {
            let (st, ct) = t.sin_cos();
            let (sp, cp) = p.sin_cos();
            [st * cp, st * sp, ct]
        })
        .collect();
    let (x, w) = gauss_legendre::<T>(opts.n_radial);
    let half = r_max / lit(2.0);
    let shells: Vec<(T, T)> = x.iter().zip(&w).map(|(x, w)| (half * (*x + T::one()), half * *w)).collect();
    let nh = (l_max + 1) * (l_max + 1);

    let per_shell: Result<Vec<(Vec<T>, T)>, AnalysisError> = shells
        .par_iter()
        .map(|&(r, wr)| {
            let mut u = vec![cplx(T::zero(), T::zero()); nh];
            let mut shell = T::zero();
            for (q, d) in dirs.iter().enumerate() {
                let f = interpolate(&grid, &delta.data, [r * d[0], r * d[1], r * d[2]]).ok_or_else(|| {
                    AnalysisError::InvalidOptions(format!("shell r = {} leaves the grid", to_f64(r)))
                })?;
                shell += f.norm_sqr() * weights[q];
                let fw = f * weights[q];
                for (k, y) in table[q].iter().enumerate() {
                    u[k] += y.conj() * fw;
                }
            }
            let rw = r * r * wr;
            Ok((u.iter().map(|c| c.norm_sqr() * rw).collect(), shell * rw))
        })
        .collect();
    let per_shell = per_shell?;
    let mut p = vec![T::zero(); nh];
    let mut shell_norm = T::zero();
    for (ps, s) in &per_shell {
        for (a, b) in p.iter_mut().zip(ps) {
            *a += *b;
        }
        shell_norm += *s;
    }
    let entries = HarmonicIndex::all_upto(l_max as i32)
        .into_iter()
        .map(|k| (k, p[(k.l() * k.l() + k.l() + k.m()) as usize]))
        .collect();
    Ok(SphericalSpectrum {
        entries,
        l_max,
        r_max,
        n_radial: opts.n_radial,
        shell_norm,
    })
}

/// Channels reachable from `(0, 0)` by at most `order` single-term
/// transitions: the linear term and its emission partner, the oscillating
/// quadratic term and its partner, and the static ponderomotive term. Terms
/// whose amplitude vanishes for this polarization are skipped.
pub fn rule_closure<T: Real>(ell: i32, pol: &Polarization<T>, order: usize, l_max: usize) -> BTreeSet<HarmonicIndex> {
    let sets: Vec<SelectionRuleSet> = [
        derive_selection_rules(ell, pol, HamiltonianPart::HI),
        derive_selection_rules(ell, pol, HamiltonianPart::HII),
        ponderomotive_rules(ell, pol),
    ]
    .into_iter()
    .filter(|r| !r.amplitude_vanishes)
    .collect();
    let reach = sets.iter().map(|r| r.max_abs_delta_l).max().unwrap_or(0).max(1) as usize;
    let l_cap = (l_max + reach * order) as i32;
    let universe = HarmonicIndex::all_upto(l_cap);
    let start = HarmonicIndex::new(0, 0).expect("valid index");
    let mut seen: BTreeSet<HarmonicIndex> = [start].into();
    let mut frontier = vec![start];
    for _ in 0..order {
        let mut next = Vec::new();
        for &i in &frontier {
            for &f in &universe {
                if seen.contains(&f) {
                    continue;
                }
                if sets.iter().any(|r| r.allows(i, f) || (r.oscillating && r.allows_emission(i, f))) {
                    seen.insert(f);
                    next.push(f);
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().filter(|k| k.l() as usize <= l_max).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelClass {
    #[serde(rename = "L")]
    pub l: i32,
    #[serde(rename = "M")]
    pub m: i32,
    #[serde(rename = "P")]
    pub p: f64,
    pub allowed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub ell: i32,
    pub polarization: PolarizationRecord,
    pub order: usize,
    pub allowed_weight: f64,
    pub forbidden_weight: f64,
    pub channels: Vec<ChannelClass>,
}

impl ComplianceReport {
    pub fn total_weight(&self) -> f64 {
        self.allowed_weight + self.forbidden_weight
    }

    /// Forbidden over analyzed weight; zero for an empty spectrum.
    pub fn forbidden_fraction(&self) -> f64 {
        let t = self.total_weight();
        if t > 0.0 {
            self.forbidden_weight / t
        } else {
            0.0
        }
    }

    /// Largest weight among forbidden channels.
    pub fn max_forbidden(&self) -> f64 {
        self.channels.iter().filter(|c| !c.allowed).map(|c| c.p).fold(0.0, f64::max)
    }

    pub fn weight(&self, l: i32, m: i32) -> f64 {
        self.channels.iter().find(|c| c.l == l && c.m == m).map(|c| c.p).unwrap_or(0.0)
    }
}

pub fn compliance<T: Real>(
    spectrum: &SphericalSpectrum<T>,
    ell: i32,
    pol: &Polarization<T>,
    order: usize,
) -> ComplianceReport {
    let closure = rule_closure(ell, pol, order, spectrum.l_max);
    let mut report = ComplianceReport {
        ell,
        polarization: PolarizationRecord::from(pol),
        order,
        allowed_weight: 0.0,
        forbidden_weight: 0.0,
        channels: Vec::with_capacity(spectrum.entries.len()),
    };
    for (k, p) in &spectrum.entries {
        let allowed = closure.contains(k);
        let p = to_f64(*p);
        if allowed {
            report.allowed_weight += p;
        } else {
            report.forbidden_weight += p;
        }
        report.channels.push(ChannelClass {
            l: k.l(),
            m: k.m(),
            p,
            allowed,
        });
    }
    report
}

/// Kinetic angular momentum `⟨r × (p − qA)⟩ / ⟨ψ|ψ⟩` with the propagator's
/// field at time `t`.
pub fn kinetic_oam<T: Real>(prop: &mut Propagator<T>, psi: &Wavefunction<T>, t: T) -> Result<[T; 3], AnalysisError> {
    let n = psi.norm_sqr();
    if !(n > T::zero()) {
        return Err(AnalysisError::ZeroNorm);
    }
    let field = prop.field_at(t).clone();
    let l = kinetic_angular_momentum(prop, psi, Some(&field));
    Ok(l.map(|v| v / n))
}

/// Canonical `⟨r × p⟩ / ⟨ψ|ψ⟩`.
pub fn canonical_oam<T: Real>(prop: &Propagator<T>, psi: &Wavefunction<T>) -> Result<[T; 3], AnalysisError> {
    let n = psi.norm_sqr();
    if !(n > T::zero()) {
        return Err(AnalysisError::ZeroNorm);
    }
    Ok(kinetic_angular_momentum(prop, psi, None).map(|v| v / n))
}

pub fn position_expectation<T: Real>(delta: &Wavefunction<T>) -> Result<[T; 3], AnalysisError> {
    position_mean(delta).ok_or(AnalysisError::ZeroNorm)
}

/// `∫ |ψ|² dz` on the grid's xy plane.
#[derive(Clone, Debug, PartialEq)]
pub struct XyProjection<T: Real> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    /// Row-major in `(x, y)`.
    pub density: Vec<T>,
    pub h: T,
}

impl<T: Real> XyProjection<T> {
    pub fn at(&self, i: usize, j: usize) -> T {
        self.density[i * self.y.len() + j]
    }

    /// `Σ density · h²`.
    pub fn integral(&self) -> T {
        self.density.iter().fold(T::zero(), |a, b| a + *b) * self.h * self.h
    }

    /// Matrix CSV (rows are `x`, columns `y`) under a `#` header.
    pub fn write_csv<W: Write>(&self, mut w: W, label: &str) -> std::io::Result<()> {
        writeln!(w, "# {label}")?;
        writeln!(
            w,
            "# nx={} ny={} h={} x0={} y0={}",
            self.x.len(),
            self.y.len(),
            to_f64(self.h),
            to_f64(self.x[0]),
            to_f64(self.y[0])
        )?;
        let ny = self.y.len();
        for row in self.density.chunks(ny) {
            let line: Vec<String> = row.iter().map(|v| format!("{:.8e}", to_f64(*v))).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub fn xy_projection<T: Real>(psi: &Wavefunction<T>) -> XyProjection<T> {
    let g = psi.grid;
    let nz = g.n[2];
    let density = psi
        .data
        .par_chunks(nz)
        .map(|col| col.iter().fold(T::zero(), |a, v| a + v.norm_sqr()) * g.h)
        .collect();
    XyProjection {
        x: g.axis(0),
        y: g.axis(1),
        density,
        h: g.h,
    }
}

/// Radial histogram of `|ψ|²` (not normalized) in bins of `width` au.
pub fn radial_histogram<T: Real>(psi: &Wavefunction<T>, width: T, bins: usize) -> Vec<T> {
    let g = psi.grid;
    let (x, y, z) = (g.axis(0), g.axis(1), g.axis(2));
    let (ny, nz) = (g.n[1], g.n[2]);
    let dv = g.volume_element();
    let parts: Vec<Vec<T>> = psi
        .data
        .par_chunks(REDUCE_CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut acc = vec![T::zero(); bins];
            for (o, v) in chunk.iter().enumerate() {
                let q = c * REDUCE_CHUNK + o;
                let (xx, yy, zz) = (x[q / (ny * nz)], y[(q / nz) % ny], z[q % nz]);
                let b = to_f64((xx * xx + yy * yy + zz * zz).sqrt() / width) as usize;
                if b < bins {
                    acc[b] += v.norm_sqr() * dv;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![T::zero(); bins];
    for p in parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// Two ionization measures for a state after the pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IonizationEstimate {
    /// `1 − |⟨g|ψ⟩|²`.
    pub ground_depletion: f64,
    /// Probability not found within `bound_radius` after field-free
    /// settling with the absorber on, plus what was already absorbed.
    pub unbound_after_settle: f64,
    pub settle_time: f64,
    pub bound_radius: f64,
}

/// Propagates a copy of `psi` field-free for `settle_time` with the
/// propagator's absorber so that continuum flux leaves the inner region,
/// then counts what stays inside `bound_radius`. `prop` must carry no pulse.
pub fn ionization_estimate<T: Real>(
    prop: &mut Propagator<T>,
    psi: &Wavefunction<T>,
    ground: &Wavefunction<T>,
    settle_time: T,
    bound_radius: T,
) -> Result<IonizationEstimate, AnalysisError> {
    if prop.pulse().is_some() {
        return Err(AnalysisError::InvalidOptions("settling propagator must be field-free".into()));
    }
    let gg = ground.norm_sqr();
    let pop = (ground.inner(psi)?.norm_sqr()) / gg;
    let mut phi = psi.clone();
    let dt = prop.config().dt;
    let steps = (to_f64(settle_time) / to_f64(dt)).round() as u64;
    for s in 0..steps {
        prop.step(&mut phi, int::<T>(s as i64) * dt);
    }
    let inside = crate::tdse::observables::weight_within(&phi, bound_radius).unwrap_or(T::zero()) * phi.norm_sqr();
    Ok(IonizationEstimate {
        ground_depletion: 1.0 - to_f64(pop),
        unbound_after_settle: 1.0 - to_f64(inside),
        settle_time: to_f64(settle_time),
        bound_radius: to_f64(bound_radius),
    })
}
