//! Brute-force numerical integration on the sphere: the independent check of
//! every closed-form angular result in [`crate::angular`].
//!
//! Gauss-Legendre nodes in `cos θ` combined with the uniform trapezoid rule
//! in `φ` integrate `P(cos θ) e^{ikφ}` exactly whenever the polynomial degree
//! is below `2·n_theta` and `|k| < n_phi`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angular::harmonics::{flat_index, spherical_harmonics_upto};
use crate::angular::{AngularFactor, HamiltonianPart, HarmonicIndex, PolarizationRecord, SelectionRuleSet};
use crate::scalar::{cis, cplx, int, lit, to_f64, Cplx, Real};

/// Oracle magnitude above which an integral counts as non-zero.
pub const NONZERO_THRESHOLD: f64 = 1e-8;
/// Oracle magnitude below which an integral counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("quadrature ({n_theta}×{n_phi}) cannot integrate degree {degree} / azimuthal order {azimuthal} exactly")]
    InsufficientResolution {
        n_theta: usize,
        n_phi: usize,
        degree: usize,
        azimuthal: usize,
    },
    #[error("factor (sin θ)^{0} e^{{i{1}φ}} is not band-limited; quadrature is not exact")]
    NotBandLimited(u32, i32),
}

/// Gauss-Legendre nodes and weights on `[−1, 1]`, nodes ascending.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Newton iteration in f64 from the Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = lit(-x);
        nodes[n - 1 - i] = lit(x);
        weights[i] = lit(w);
        weights[n - 1 - i] = lit(w);
    }
    (nodes, weights)
}

/// Resolution of the product quadrature on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereQuadrature {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl SphereQuadrature {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        SphereQuadrature { n_theta, n_phi }
    }

    /// Smallest resolution honoring `n_theta ≥ 2·l_max + 2`, `n_phi ≥ 2·m_max + 2`.
    pub fn for_degree(l_max: usize, m_max: usize) -> Self {
        SphereQuadrature {
            n_theta: 2 * l_max + 2,
            n_phi: 2 * m_max + 2,
        }
    }

    /// Largest polynomial degree in `cos θ` integrated exactly.
    pub fn max_exact_degree(&self) -> usize {
        2 * self.n_theta - 1
    }

    /// Checks exactness for an integrand of total degree `degree` and
    /// largest azimuthal frequency `azimuthal`.
    pub fn check(&self, degree: usize, azimuthal: usize) -> Result<(), OracleError> {
        if degree > self.max_exact_degree() || azimuthal >= self.n_phi {
            return Err(OracleError::InsufficientResolution {
                n_theta: self.n_theta,
                n_phi: self.n_phi,
                degree,
                azimuthal,
            });
        }
        Ok(())
    }

    pub fn grid<T: Real>(&self) -> SphereGrid<T> {
        SphereGrid::new(*self)
    }
}

/// Materialized nodes `(θ_i, φ_j)` with weights `w_i · 2π/n_phi`.
#[derive(Clone, Debug)]
pub struct SphereGrid<T: Real> {
    pub spec: SphereQuadrature,
    pub theta: Vec<T>,
    pub phi: Vec<T>,
    pub theta_weight: Vec<T>,
    pub phi_weight: T,
}

impl<T: Real> SphereGrid<T> {
    pub fn new(spec: SphereQuadrature) -> Self {
        let (x, w) = gauss_legendre::<T>(spec.n_theta);
        let theta = x.iter().map(|c| c.acos()).collect();
        let dphi = lit::<T>(2.0) * T::PI() / int::<T>(spec.n_phi as i64);
        let phi = (0..spec.n_phi).map(|j| int::<T>(j as i64) * dphi).collect();
        SphereGrid {
            spec,
            theta,
            phi,
            theta_weight: w,
            phi_weight: dphi,
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len() * self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterates `(θ, φ, weight)` with the φ index fastest.
    pub fn nodes(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.theta.iter().zip(&self.theta_weight).flat_map(move |(&t, &w)| {
            self.phi.iter().map(move |&p| (t, p, w * self.phi_weight))
        })
    }

    /// `∫ f dΩ`.
    pub fn integrate<F: Fn(T, T) -> Cplx<T>>(&self, f: F) -> Cplx<T> {
        self.nodes()
            .map(|(t, p, w)| f(t, p) * w)
            .fold(cplx(T::zero(), T::zero()), |a, b| a + b)
    }

    /// All `Y_L^M` (`L ≤ l_max`) at every node, node-major.
    pub fn harmonic_table(&self, l_max: usize) -> Vec<Vec<Cplx<T>>> {
        self.nodes()
            .map(|(t, p, _)| spherical_harmonics_upto(l_max, t, p))
            .collect()
    }

    pub fn weights(&self) -> Vec<T> {
        self.nodes().map(|(_, _, w)| w).collect()
    }
}

/// `∫ Y*_a (sin θ)^n e^{imφ} Y_b dΩ` by quadrature.
pub fn integrate_triple<T: Real>(
    factor: AngularFactor,
    a: HarmonicIndex,
    b: HarmonicIndex,
    quad: &SphereQuadrature,
) -> Result<Cplx<T>, OracleError> {
    if !factor.is_band_limited() {
        return Err(OracleError::NotBandLimited(factor.sin_power, factor.azimuthal));
    }
    let degree = (a.l() + b.l()) as usize + factor.sin_power as usize;
    let az = (a.m().abs() + b.m().abs() + factor.azimuthal.abs()) as usize;
    quad.check(degree, az)?;
    let grid = quad.grid::<T>();
    Ok(grid.integrate(|t, p| {
        let ya = crate::angular::spherical_harmonic::<T>(a.l() as i64, a.m() as i64, t, p);
        let yb = crate::angular::spherical_harmonic::<T>(b.l() as i64, b.m() as i64, t, p);
        ya.conj() * factor.evaluate(t, p) * yb
    }))
}

/// `∫ Y*_a Y_b Y_c dΩ` by quadrature.
pub fn integrate_harmonic_triple<T: Real>(
    a: HarmonicIndex,
    b: HarmonicIndex,
    c: HarmonicIndex,
    quad: &SphereQuadrature,
) -> Result<Cplx<T>, OracleError> {
    let degree = (a.l() + b.l() + c.l()) as usize;
    let az = (a.m().abs() + b.m().abs() + c.m().abs()) as usize;
    quad.check(degree, az)?;
    let grid = quad.grid::<T>();
    Ok(grid.integrate(|t, p| {
        let sh = |i: HarmonicIndex| crate::angular::spherical_harmonic::<T>(i.l() as i64, i.m() as i64, t, p);
        sh(a).conj() * sh(b) * sh(c)
    }))
}

/// Quadrature value for one `(Li, Mi) → (Lf, Mf)` tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleValue {
    pub li: i32,
    pub mi: i32,
    pub lf: i32,
    pub mf: i32,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub rule_allowed: bool,
}

/// Outcome of checking a rule set against the oracle over all tuples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleVerificationReport {
    pub part: HamiltonianPart,
    pub ell: i32,
    pub polarization: PolarizationRecord,
    pub l_max: i32,
    pub quadrature: SphereQuadrature,
    pub tuples_checked: usize,
    /// Oracle non-zero where the rule forbids the transition.
    pub disagreements: Vec<TupleValue>,
    /// Rule-allowed transitions whose integral vanishes (not failures).
    pub accidental_zeros: Vec<TupleValue>,
    /// Magnitudes between the zero and non-zero thresholds.
    pub unresolved: Vec<TupleValue>,
    /// Allowed `(ΔL, ΔM)` classes with no non-zero witness tuple.
    pub classes_without_witness: Vec<(i32, i32)>,
    /// Every non-zero tuple with its value.
    pub nonzero: Vec<TupleValue>,
}

impl RuleVerificationReport {
    /// No disagreement and no unresolved magnitude.
    pub fn verified(&self) -> bool {
        self.disagreements.is_empty() && self.unresolved.is_empty()
    }
}

/// Angular integrand checked for each rule term. For the quadratic term the
/// polarization enters only as the scalar `α² + β²`, so the bare factor
/// `(sin θ)^{2|ℓ|} e^{2iℓφ}` is integrated.
fn rule_integrand<T: Real>(rules: &SelectionRuleSet, theta: T, phi: T) -> Cplx<T> {
    let ell = rules.ell;
    match (rules.part, rules.oscillating) {
        (HamiltonianPart::HI, _) => {
            let pol = rules.polarization::<T>();
            let s = theta.sin().powi(ell.abs() + 1);
            let carrier = cis(int::<T>(ell as i64) * phi) * s;
            (pol.alpha() * phi.cos() + pol.beta() * phi.sin()) * carrier
        }
        (HamiltonianPart::HII, true) => {
            cis(int::<T>(2 * ell as i64) * phi) * theta.sin().powi(2 * ell.abs())
        }
        (HamiltonianPart::HII, false) => cplx(theta.sin().powi(2 * ell.abs()), T::zero()),
    }
}

fn integrand_order(rules: &SelectionRuleSet) -> (usize, usize) {
    let a = rules.ell.unsigned_abs() as usize;
    match (rules.part, rules.oscillating) {
        (HamiltonianPart::HI, _) => (a + 1, a + 1),
        (HamiltonianPart::HII, true) => (2 * a, 2 * a),
        (HamiltonianPart::HII, false) => (2 * a, 0),
    }
}

/// A resolution exact for every tuple `verify_rule_set` scans at `l_max`.
pub fn quadrature_for(rules: &SelectionRuleSet, l_max: usize) -> SphereQuadrature {
    let (deg, az) = integrand_order(rules);
    SphereQuadrature::new(l_max + deg / 2 + 2, 2 * l_max + az + 2)
}

/// Scans every `(Li, Mi, Lf, Mf)` with `Li, Lf ≤ l_max` and compares the
/// oracle's zero pattern with `rules`.
pub fn verify_rule_set<T: Real>(
    rules: &SelectionRuleSet,
    l_max: i32,
    quad: &SphereQuadrature,
) -> Result<RuleVerificationReport, OracleError> {
    let (deg, az) = integrand_order(rules);
    quad.check(2 * l_max as usize + deg, 2 * l_max as usize + az)?;

    let grid = quad.grid::<T>();
    let table = grid.harmonic_table(l_max as usize);
    let weights = grid.weights();
    let factor: Vec<Cplx<T>> = grid
        .nodes()
        .map(|(t, p, _)| rule_integrand(rules, t, p))
        .collect();
    let states = HarmonicIndex::all_upto(l_max);

    let per_initial: Vec<Vec<TupleValue>> = states
        .par_iter()
        .map(|&init| {
            let bi = flat_index(init.l() as i64, init.m() as i64);
            let g: Vec<Cplx<T>> = (0..weights.len())
                .map(|q| factor[q] * table[q][bi] * weights[q])
                .collect();
            states
                .iter()
                .map(|&fin| {
                    let ai = flat_index(fin.l() as i64, fin.m() as i64);
                    let v = (0..g.len())
                        .map(|q| table[q][ai].conj() * g[q])
                        .fold(cplx(T::zero(), T::zero()), |a, b| a + b);
                    TupleValue {
                        li: init.l(),
                        mi: init.m(),
                        lf: fin.l(),
                        mf: fin.m(),
                        re: to_f64(v.re),
                        im: to_f64(v.im),
                        abs: to_f64(v.norm()),
                        rule_allowed: rules.allows(init, fin),
                    }
                })
                .collect()
        })
        .collect();

    let mut report = RuleVerificationReport {
        part: rules.part,
        ell: rules.ell,
        polarization: rules.polarization,
        l_max,
        quadrature: *quad,
        tuples_checked: 0,
        disagreements: Vec::new(),
        accidental_zeros: Vec::new(),
        unresolved: Vec::new(),
        classes_without_witness: Vec::new(),
        nonzero: Vec::new(),
    };
    let mut witnessed = std::collections::BTreeSet::new();
    for tv in per_initial.into_iter().flatten() {
        report.tuples_checked += 1;
        if tv.abs > NONZERO_THRESHOLD {
            if tv.rule_allowed {
                witnessed.insert((tv.lf - tv.li, tv.mf - tv.mi));
            } else {
                report.disagreements.push(tv.clone());
            }
            report.nonzero.push(tv);
        } else if tv.abs >= ZERO_THRESHOLD {
            report.unresolved.push(tv);
        } else if tv.rule_allowed {
            report.accidental_zeros.push(tv);
        }
    }
    report.classes_without_witness = rules
        .classes()
        .into_iter()
        .filter(|c| !witnessed.contains(c))
        .collect();
    Ok(report)
}
