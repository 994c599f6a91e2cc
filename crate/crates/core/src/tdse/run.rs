use std::io::Write;

use serde::{Deserialize, Serialize};

use super::observables::{kinetic_angular_momentum, position_mean};
use super::{init_ground_state, GridSpec, Propagator, PropagatorConfig, TdseError, Wavefunction};
use crate::beam::PulseConfig;
use crate::scalar::{int, lit, to_f64, Real};

/// Norm above `1 + NORM_GUARD` means the propagation has gone unstable.
const NORM_GUARD: f64 = 1e-6;

/// One row of the trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub pop_ground: f64,
    pub norm: f64,
    #[serde(rename = "Lz")]
    pub lz: f64,
    pub x_mean: f64,
    pub y_mean: f64,
    pub z_mean: f64,
    pub absorbed: f64,
}

/// Time series of observables recorded during a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub samples: Vec<TrajectorySample>,
}

impl TrajectoryRecord {
    pub const HEADER: &'static str = "t,pop_ground,norm,Lz,x_mean,y_mean,z_mean,absorbed";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::HEADER)?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.10e},{:.12e},{:.12e},{:.10e},{:.10e},{:.10e},{:.10e},{:.12e}",
                s.t, s.pop_ground, s.norm, s.lz, s.x_mean, s.y_mean, s.z_mean, s.absorbed
            )?;
        }
        Ok(())
    }

    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions<T: Real> {
    pub record_every: usize,
    /// Field-free propagation appended after the pulse.
    pub tail_time: T,
}

impl<T: Real> Default for RunOptions<T> {
    fn default() -> Self {
        RunOptions {
            record_every: 10,
            tail_time: T::zero(),
        }
    }
}

/// Passed to the observer at every recorded step.
pub struct Observation<'a, T: Real> {
    pub step: u64,
    pub t: T,
    pub psi: &'a Wavefunction<T>,
    pub ground: &'a Wavefunction<T>,
    pub sample: &'a TrajectorySample,
    pub propagator: &'a mut Propagator<T>,
}

pub struct RunOutput<T: Real> {
    pub ground: Wavefunction<T>,
    pub ground_energy: T,
    pub psi: Wavefunction<T>,
    pub record: TrajectoryRecord,
    pub t_end: T,
    pub steps: u64,
}

fn sample<T: Real>(
    prop: &mut Propagator<T>,
    psi: &Wavefunction<T>,
    ground: &Wavefunction<T>,
    t: T,
    absorbed: T,
) -> Result<TrajectorySample, TdseError> {
    let norm = psi.norm_sqr();
    if !norm.is_finite() || norm > T::one() + lit(NORM_GUARD) {
        return Err(TdseError::Diverged {
            t: to_f64(t),
            norm: to_f64(norm),
        });
    }
    let pop = ground.inner(psi)?.norm_sqr();
    let field = prop.field_at(t).clone();
    let l = kinetic_angular_momentum(prop, psi, Some(&field));
    let r = position_mean(psi).unwrap_or([T::zero(); 3]);
    Ok(TrajectorySample {
        t: to_f64(t),
        pop_ground: to_f64(pop),
        norm: to_f64(norm),
        lz: to_f64(l[2]),
        x_mean: to_f64(r[0]),
        y_mean: to_f64(r[1]),
        z_mean: to_f64(r[2]),
        absorbed: to_f64(absorbed),
    })
}

/// Propagates `psi` from `t0` for `n_steps` steps of the configured `dt`,
/// recording every `record_every` steps and at the end.
pub fn propagate<T, F>(
    prop: &mut Propagator<T>,
    mut psi: Wavefunction<T>,
    ground: &Wavefunction<T>,
    t0: T,
    n_steps: u64,
    record_every: usize,
    mut observer: F,
) -> Result<(Wavefunction<T>, TrajectoryRecord, T), TdseError>
where
    T: Real,
    F: FnMut(Observation<'_, T>) -> Result<(), TdseError>,
{
    let dt = prop.config().dt;
    let every = record_every.max(1) as u64;
    let mut record = TrajectoryRecord::default();
    let mut absorbed = T::zero();
    let mut emit = |prop: &mut Propagator<T>, psi: &Wavefunction<T>, step: u64, t: T, absorbed: T, record: &mut TrajectoryRecord| {
        let s = sample(prop, psi, ground, t, absorbed)?;
        record.samples.push(s);
        observer(Observation {
            step,
            t,
            psi,
            ground,
            sample: &s,
            propagator: prop,
        })
    };
    emit(prop, &psi, 0, t0, absorbed, &mut record)?;
    for step in 1..=n_steps {
        let t = t0 + int::<T>((step - 1) as i64) * dt;
        absorbed += prop.step(&mut psi, t);
        let t_next = t0 + int::<T>(step as i64) * dt;
        if step % every == 0 || step == n_steps {
            emit(prop, &psi, step, t_next, absorbed, &mut record)?;
        } else if step % 64 == 0 && !psi.is_finite() {
            return Err(TdseError::Diverged {
                t: to_f64(t_next),
                norm: f64::NAN,
            });
        }
    }
    let t_end = t0 + int::<T>(n_steps as i64) * dt;
    Ok((psi, record, t_end))
}

/// Number of steps of `dt` covering `span`.
pub fn steps_for<T: Real>(span: T, dt: T) -> u64 {
    (to_f64(span) / to_f64(dt)).round().max(0.0) as u64
}

/// Relaxes the ground state and propagates it through the pulse window (and
/// the optional tail).
pub fn run<T, F>(
    grid: GridSpec<T>,
    cfg: PropagatorConfig<T>,
    pulse: PulseConfig<T>,
    opts: RunOptions<T>,
    observer: F,
) -> Result<RunOutput<T>, TdseError>
where
    T: Real,
    F: FnMut(Observation<'_, T>) -> Result<(), TdseError>,
{
    let gs = init_ground_state(grid, &cfg)?;
    let mut prop = Propagator::new(grid, cfg, Some(pulse))?;
    let (t0, t1) = prop.pulse_span().expect("pulse present");
    let n = steps_for(t1 - t0 + opts.tail_time, cfg.dt);
    let (psi, record, t_end) = propagate(&mut prop, gs.psi.clone(), &gs.psi, t0, n, opts.record_every, observer)?;
    Ok(RunOutput {
        ground: gs.psi,
        ground_energy: gs.energy,
        psi,
        record,
        t_end,
        steps: n,
    })
}
