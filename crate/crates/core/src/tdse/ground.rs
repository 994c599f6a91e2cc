//! Ground state of the discrete field-free Hamiltonian.
//!
//! Imaginary-time split-operator relaxation from the analytic `1s` seed, then
//! a locally optimal preconditioned conjugate-gradient polish so that the
//! result is an eigenvector of the discrete `H₀` itself rather than of the
//! imaginary-time splitting.

use rayon::prelude::*;

use super::{GridSpec, Propagator, PropagatorConfig, TdseError, Wavefunction};
use crate::scalar::{cplx, lit, par_reduce, to_f64, Cplx, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundStateOptions {
    /// Imaginary time step.
    pub tau: f64,
    pub max_relax_steps: usize,
    /// Relaxation stops once the energy changes by less than this per 10 steps.
    pub relax_tolerance: f64,
    pub max_polish_iterations: usize,
    /// Required `‖Hψ − Eψ‖` for the normalized state.
    pub residual_tolerance: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        GroundStateOptions {
            tau: 0.1,
            max_relax_steps: 3000,
            relax_tolerance: 1e-7,
            max_polish_iterations: 400,
            residual_tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState<T: Real> {
    pub psi: Wavefunction<T>,
    pub energy: T,
    pub seed_overlap: T,
    pub relax_steps: usize,
    pub polish_iterations: usize,
    pub residual: T,
}

pub fn init_ground_state<T: Real>(
    grid: GridSpec<T>,
    cfg: &PropagatorConfig<T>,
) -> Result<GroundState<T>, TdseError> {
    init_ground_state_with(grid, cfg, &GroundStateOptions::default())
}

pub fn init_ground_state_with<T: Real>(
    grid: GridSpec<T>,
    cfg: &PropagatorConfig<T>,
    opts: &GroundStateOptions,
) -> Result<GroundState<T>, TdseError> {
    let mut plain = *cfg;
    plain.absorber = super::AbsorberConfig::none();
    let prop = Propagator::new(grid, plain, None)?;
    let seed = {
        let mut s = Wavefunction::hydrogen_1s(grid);
        s.normalize();
        s
    };

    let mut psi = seed.clone();
    let tau = lit::<T>(opts.tau);
    let steps = relax(&prop, &mut psi, tau, opts)?;

    let mut x: Vec<T> = psi.data.iter().map(|v| v.re).collect();
    let (energy, iters, residual) = polish(&prop, &mut x, opts)?;
    for (d, v) in psi.data.iter_mut().zip(&x) {
        *d = cplx(*v, T::zero());
    }
    psi.normalize();
    // Fix the global sign so the state is positive at its maximum.
    let peak = psi
        .data
        .iter()
        .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
        .map(|v| v.re)
        .unwrap_or_else(T::one);
    if peak < T::zero() {
        psi.scale(cplx(-T::one(), T::zero()));
    }
    let seed_overlap = seed.inner(&psi)?.norm();
    Ok(GroundState {
        psi,
        energy,
        seed_overlap,
        relax_steps: steps,
        polish_iterations: iters,
        residual,
    })
}

fn relax<T: Real>(
    prop: &Propagator<T>,
    psi: &mut Wavefunction<T>,
    tau: T,
    opts: &GroundStateOptions,
) -> Result<usize, TdseError> {
    let grid = *prop.grid();
    let half_v: Vec<T> = prop.potential().iter().map(|v| (-tau * *v / lit(2.0)).exp()).collect();
    let k = prop.wavenumbers();
    let decay = |k: &Vec<T>| -> Vec<T> { k.iter().map(|k| (-tau * *k * *k / lit(2.0)).exp()).collect() };
    let (ex, ey, ez) = (decay(&k[0]), decay(&k[1]), decay(&k[2]));
    let (ny, nz) = (grid.n[1], grid.n[2]);
    let mut last = prop.field_free_energy(psi);
    for step in 1..=opts.max_relax_steps {
        psi.data.par_iter_mut().zip(half_v.par_iter()).for_each(|(d, v)| *d = *d * *v);
        prop.fft().forward(&mut psi.data);
        psi.data.par_chunks_mut(ny * nz).enumerate().for_each(|(i, slab)| {
            for (q, d) in slab.iter_mut().enumerate() {
                *d = *d * (ex[i] * ey[q / nz] * ez[q % nz]);
            }
        });
        prop.fft().inverse(&mut psi.data);
        psi.data.par_iter_mut().zip(half_v.par_iter()).for_each(|(d, v)| *d = *d * *v);
        psi.normalize();
        if step % 10 == 0 {
            let e = prop.field_free_energy(psi);
            if !e.is_finite() {
                return Err(TdseError::NotConverged {
                    stage: "imaginary-time relaxation",
                    detail: "energy is not finite".into(),
                });
            }
            if (e - last).abs() < lit(opts.relax_tolerance) {
                return Ok(step);
            }
            last = e;
        }
    }
    Err(TdseError::NotConverged {
        stage: "imaginary-time relaxation",
        detail: format!("energy change above {} after {} steps", opts.relax_tolerance, opts.max_relax_steps),
    })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    par_reduce(a.len(), T::zero(), |i| a[i] * b[i], |p, q| p + q)
}

fn apply_h<T: Real>(prop: &Propagator<T>, x: &[T], scratch: &mut Vec<Cplx<T>>) -> Vec<T> {
    let c: Vec<Cplx<T>> = x.iter().map(|v| cplx(*v, T::zero())).collect();
    prop.apply_field_free_hamiltonian(&c, scratch);
    scratch.iter().map(|v| v.re).collect()
}

/// `(T + σ)⁻¹ r` with the kinetic operator applied spectrally.
fn precondition<T: Real>(prop: &Propagator<T>, r: &[T], shift: T) -> Vec<T> {
    let grid = prop.grid();
    let (ny, nz) = (grid.n[1], grid.n[2]);
    let k = prop.wavenumbers();
    let mut c: Vec<Cplx<T>> = r.iter().map(|v| cplx(*v, T::zero())).collect();
    prop.fft().forward(&mut c);
    c.par_chunks_mut(ny * nz).enumerate().for_each(|(i, slab)| {
        for (q, d) in slab.iter_mut().enumerate() {
            let (kx, ky, kz) = (k[0][i], k[1][q / nz], k[2][q % nz]);
            *d = *d / ((kx * kx + ky * ky + kz * kz) / lit(2.0) + shift);
        }
    });
    prop.fft().inverse(&mut c);
    c.iter().map(|v| v.re).collect()
}

fn axpy<T: Real>(y: &mut [T], a: T, x: &[T]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(y, x)| *y += a * *x);
}

fn scale<T: Real>(y: &mut [T], a: T) {
    y.par_iter_mut().for_each(|y| *y *= a);
}

/// Smallest eigenpair of a symmetric matrix by cyclic Jacobi rotations.
fn smallest_eigenpair(mut a: Vec<Vec<f64>>) -> (f64, Vec<f64>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let i = (0..n).min_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap()).unwrap();
    (a[i][i], v.iter().map(|row| row[i]).collect())
}

/// Returns `(energy, iterations, residual)`.
fn polish<T: Real>(prop: &Propagator<T>, x: &mut Vec<T>, opts: &GroundStateOptions) -> Result<(T, usize, T), TdseError> {
    let mut scratch = Vec::new();
    let nrm = dot(x, x).sqrt();
    scale(x, T::one() / nrm);
    let mut hx = apply_h(prop, x, &mut scratch);
    let mut p: Option<Vec<T>> = None;
    let tol = lit::<T>(opts.residual_tolerance);
    let shift = T::one();
    for it in 0..=opts.max_polish_iterations {
        let lambda = dot(x, &hx);
        let mut r = hx.clone();
        axpy(&mut r, -lambda, x);
        // `x` has unit Euclidean norm, so this is also the residual of the
        // state normalized with the volume element.
        let res = dot(&r, &r).sqrt();
        if res < tol {
            return Ok((lambda, it, res));
        }
        if it == opts.max_polish_iterations {
            break;
        }
        let mut w = precondition(prop, &r, shift);
        let xw = dot(x, &w);
        axpy(&mut w, -xw, x);
        let wn = dot(&w, &w).sqrt();
        if !(wn > T::zero()) {
            return Ok((lambda, it, res));
        }
        scale(&mut w, T::one() / wn);
        let mut basis = vec![x.clone(), w];
        if let Some(pv) = &p {
            let mut pv = pv.clone();
            for b in &basis {
                let c = dot(b, &pv);
                axpy(&mut pv, -c, b);
            }
            let pn = dot(&pv, &pv).sqrt();
            if pn > lit(1e-10) {
                scale(&mut pv, T::one() / pn);
                basis.push(pv);
            }
        }
        let hb: Vec<Vec<T>> = std::iter::once(hx.clone())
            .chain(basis[1..].iter().map(|b| apply_h(prop, b, &mut scratch)))
            .collect();
        let m = basis.len();
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i..m {
                let v = to_f64(dot(&basis[i], &hb[j]));
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let (_, c) = smallest_eigenpair(a);
        let c: Vec<T> = c.into_iter().map(lit::<T>).collect();
        let mut nx = vec![T::zero(); x.len()];
        let mut nhx = vec![T::zero(); x.len()];
        let mut np = vec![T::zero(); x.len()];
        for i in 0..m {
            axpy(&mut nx, c[i], &basis[i]);
            axpy(&mut nhx, c[i], &hb[i]);
            if i > 0 {
                axpy(&mut np, c[i], &basis[i]);
            }
        }
        let n = dot(&nx, &nx).sqrt();
        scale(&mut nx, T::one() / n);
        scale(&mut nhx, T::one() / n);
        *x = nx;
        hx = nhx;
        p = Some(np);
    }
    let lambda = dot(x, &hx);
    let mut r = hx.clone();
    axpy(&mut r, -lambda, x);
    Err(TdseError::NotConverged {
        stage: "eigenvector polish",
        detail: format!("residual {:.3e} after {} iterations", to_f64(dot(&r, &r).sqrt()), opts.max_polish_iterations),
    })
}
