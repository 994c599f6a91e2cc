use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use oam_ionize_core::analysis::{
    compliance, ionization_estimate, kinetic_oam, radial_histogram, spherical_spectrum, split_excited, xy_projection,
    SpectrumOptions,
};
use oam_ionize_core::config::RunConfig;
use oam_ionize_core::tdse::{
    init_ground_state, propagate, steps_for, CheckpointMeta, Propagator, TdseError, TrajectoryRecord,
    TrajectorySample,
};
use oam_ionize_core::{GridSpec64, Polarization64, Wavefunction64};
use serde_json::json;

use crate::{plots, write_json, Rejected};

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Overrides `run.checkpoint_every` (steps; 0 disables).
    #[arg(long)]
    checkpoint_every: Option<u64>,
}

struct ComplianceRow {
    t: f64,
    excited_weight: f64,
    allowed: f64,
    forbidden: f64,
    forbidden_fraction: f64,
    max_forbidden: f64,
}

/// Per-record bookkeeping done inside the propagation loop.
struct Tracker<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    spec: SpectrumOptions<f64>,
    pol: Polarization64,
    samples: Vec<TrajectorySample>,
    compliance: Vec<ComplianceRow>,
    snapshots: Vec<f64>,
    snapshot_index: usize,
    checkpoint_every: u64,
    next_checkpoint: u64,
}

impl Tracker<'_> {
    fn observe(&mut self, step: u64, t: f64, psi: &Wavefunction64, ground: &Wavefunction64) -> Result<()> {
        let want_snapshot = self.snapshot_index < self.snapshots.len() && t >= self.snapshots[self.snapshot_index] - 1e-9;
        if self.cfg.analysis.track_compliance || want_snapshot {
            let (_, delta) = split_excited(psi, ground)?;
            let s = spherical_spectrum(&delta, &self.spec)?;
            let rep = compliance(&s, self.cfg.beam.ell, &self.pol, self.cfg.analysis.closure_order);
            if self.cfg.analysis.track_compliance {
                self.compliance.push(ComplianceRow {
                    t,
                    excited_weight: delta.norm_sqr(),
                    allowed: rep.allowed_weight,
                    forbidden: rep.forbidden_weight,
                    forbidden_fraction: rep.forbidden_fraction(),
                    max_forbidden: rep.max_forbidden(),
                });
            }
            if want_snapshot {
                let tag = format!("snapshot_{:02}", self.snapshot_index);
                write_json(&self.out.join(format!("{tag}_spectrum.json")), &s.to_json())?;
                write_json(&self.out.join(format!("{tag}_compliance.json")), &rep)?;
                let p = xy_projection(&delta);
                p.write_csv(create(&self.out.join(format!("{tag}_projection.csv")))?, &format!("excited density at t = {t:.4}"))?;
                // Several snapshot times may fall inside one record interval.
                while self.snapshot_index < self.snapshots.len() && t >= self.snapshots[self.snapshot_index] - 1e-9 {
                    self.snapshot_index += 1;
                }
            }
        }
        if self.checkpoint_every > 0 && step >= self.next_checkpoint {
            let dir = self.out.join("checkpoints");
            fs::create_dir_all(&dir)?;
            psi.write_checkpoint(&dir.join(format!("state_{step:08}.chk")), CheckpointMeta { t, step })?;
            self.next_checkpoint = (step / self.checkpoint_every + 1) * self.checkpoint_every;
        }
        Ok(())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_trajectory(out: &Path, samples: &[TrajectorySample]) -> Result<()> {
    let rec = TrajectoryRecord { samples: samples.to_vec() };
    rec.write_csv(create(&out.join("trajectory.csv"))?)?;
    Ok(())
}

pub fn run(a: &SimulateArgs) -> Result<()> {
    let cfg = RunConfig::load(&a.config)?;
    let out = a.out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone());
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.toml"), cfg.to_toml())?;

    let grid: GridSpec64 = cfg.grid_spec().map_err(anyhow::Error::msg)?;
    let pcfg = cfg.propagator_config(&grid);
    let pulse = cfg.pulse();
    let clock = Instant::now();
    eprintln!("{}: {}", cfg.name, pulse.describe());

    let gs = init_ground_state(grid, &pcfg)?;
    eprintln!(
        "ground state E = {:.8} ({} relaxation steps, residual {:.1e}) [{:.1?}]",
        gs.energy,
        gs.relax_steps,
        gs.residual,
        clock.elapsed()
    );
    if cfg.output.final_state {
        gs.psi.write_checkpoint(&out.join("ground.chk"), CheckpointMeta { t: 0.0, step: 0 })?;
    }

    let mut prop = Propagator::new(grid, pcfg, Some(pulse.clone()))?;
    let (t0, t1) = prop.pulse_span().expect("pulse present");
    let n_steps = steps_for(t1 - t0 + cfg.run.tail_time, pcfg.dt);
    let mut snapshots = cfg.analysis.snapshot_times.clone();
    snapshots.sort_by(f64::total_cmp);
    let checkpoint_every = a.checkpoint_every.unwrap_or(cfg.run.checkpoint_every);
    let mut tracker = Tracker {
        cfg: &cfg,
        out: &out,
        spec: cfg.spectrum_options(&grid),
        pol: cfg.polarization(),
        samples: Vec::new(),
        compliance: Vec::new(),
        snapshots,
        snapshot_index: 0,
        checkpoint_every,
        next_checkpoint: checkpoint_every,
    };
    eprintln!("propagating {n_steps} steps of dt = {} over t ∈ [{t0:.3}, {:.3}]", pcfg.dt, t1 + cfg.run.tail_time);

    let result = propagate(&mut prop, gs.psi.clone(), &gs.psi, t0, n_steps, cfg.run.record_every, |o| {
        tracker.samples.push(*o.sample);
        tracker
            .observe(o.step, o.t, o.psi, o.ground)
            .map_err(|e| TdseError::Observer(format!("{e:#}")))
    });
    let (psi, _, t_end) = match result {
        Ok(r) => r,
        Err(e) => {
            write_trajectory(&out, &tracker.samples)?;
            let (t, norm) = match &e {
                TdseError::Diverged { t, norm } => (Some(*t), Some(*norm)),
                _ => (None, None),
            };
            write_json(
                &out.join("diagnostic.json"),
                &json!({
                    "error": e.to_string(),
                    "t": t,
                    "norm": norm,
                    "last_sample": tracker.samples.last(),
                }),
            )?;
            return Err(Rejected(format!("simulation aborted: {e} (see {})", out.join("diagnostic.json").display())).into());
        }
    };
    eprintln!("propagation done [{:.1?}]", clock.elapsed());

    if cfg.output.trajectory {
        write_trajectory(&out, &tracker.samples)?;
    }
    if cfg.analysis.track_compliance {
        let mut w = String::new();
        w.push_str("t,excited_weight,allowed,forbidden,forbidden_fraction,max_forbidden\n");
        for r in &tracker.compliance {
            w.push_str(&format!(
                "{:.6},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}\n",
                r.t, r.excited_weight, r.allowed, r.forbidden, r.forbidden_fraction, r.max_forbidden
            ));
        }
        fs::write(out.join("compliance_trajectory.csv"), w)?;
    }
    if cfg.output.final_state {
        psi.write_checkpoint(&out.join("final.chk"), CheckpointMeta { t: t_end, step: n_steps })?;
    }

    let (amp, delta) = split_excited(&psi, &gs.psi)?;
    let spectrum = spherical_spectrum(&delta, &tracker.spec)?;
    let rep = compliance(&spectrum, cfg.beam.ell, &tracker.pol, cfg.analysis.closure_order);
    if cfg.output.spectrum {
        write_json(&out.join("spectrum.json"), &spectrum.to_json())?;
        spectrum.write_csv(create(&out.join("spectrum.csv"))?)?;
        write_json(&out.join("compliance.json"), &rep)?;
    }
    if cfg.output.projection {
        xy_projection(&delta).write_csv(create(&out.join("projection_excited.csv"))?, "excited density at pulse end")?;
        xy_projection(&psi).write_csv(create(&out.join("projection_total.csv"))?, "total density at pulse end")?;
    }
    let hist = radial_histogram(&delta, cfg.analysis.histogram_width, cfg.analysis.histogram_bins);
    let mut text = String::from("r_lo,r_hi,weight\n");
    for (i, w) in hist.iter().enumerate() {
        let lo = i as f64 * cfg.analysis.histogram_width;
        text.push_str(&format!("{lo:.6},{:.6},{w:.9e}\n", lo + cfg.analysis.histogram_width));
    }
    fs::write(out.join("radial_histogram.csv"), text)?;

    let l_kin = kinetic_oam(&mut prop, &psi, t_end)?;
    let l_exc = if delta.norm_sqr() > 0.0 { Some(kinetic_oam(&mut prop, &delta, t_end)?) } else { None };
    let ionization = if cfg.analysis.settle_time > 0.0 {
        let mut settle = Propagator::new(grid, pcfg, None)?;
        Some(ionization_estimate(&mut settle, &psi, &gs.psi, cfg.analysis.settle_time, cfg.analysis.bound_radius)?)
    } else {
        None
    };
    let depletion = first_cycle_depletion(&tracker.samples, t0, pulse.period());
    let inside = within(&hist, cfg.analysis.histogram_width, cfg.analysis.bound_radius, delta.norm_sqr());
    let last = tracker.samples.last().copied();
    let summary = json!({
        "name": cfg.name,
        "pulse": pulse.describe(),
        "ground_energy": gs.energy,
        "steps": n_steps,
        "t_start": t0,
        "t_end": t_end,
        "final": last,
        "ground_amplitude": [amp.re, amp.im],
        "ground_depletion": 1.0 - amp.norm_sqr() / gs.psi.norm_sqr(),
        "depletion_after_first_cycle": depletion,
        "excited_weight": delta.norm_sqr(),
        "excited_fraction_within_bound_radius": inside,
        "oam_kinetic": l_kin,
        "oam_excited": l_exc,
        "ionization": ionization,
        "spectrum_total": spectrum.total(),
        "forbidden_fraction": rep.forbidden_fraction(),
        "max_forbidden": rep.max_forbidden(),
        "top_channels": spectrum.ranking().iter().take(8).map(|(k, p)| json!({"L": k.l(), "M": k.m(), "P": p})).collect::<Vec<_>>(),
    });
    write_json(&out.join("summary.json"), &summary)?;
    if cfg.output.gnuplot {
        plots::write_all(&out, &cfg.name, cfg.analysis.track_compliance)?;
    }
    eprintln!(
        "final: pop_ground {:.5}, Lz {:+.4}, forbidden fraction {:.2e}; outputs in {} [{:.1?}]",
        last.map(|s| s.pop_ground).unwrap_or(f64::NAN),
        l_kin[2],
        rep.forbidden_fraction(),
        out.display(),
        clock.elapsed()
    );
    Ok(())
}

/// `1 − P_ground` at the first recorded time at least one period into the pulse.
fn first_cycle_depletion(samples: &[TrajectorySample], t0: f64, period: f64) -> Option<f64> {
    samples.iter().find(|s| s.t >= t0 + period - 1e-9).map(|s| 1.0 - s.pop_ground)
}

/// Fraction of `total` found in histogram bins below `radius`.
fn within(hist: &[f64], width: f64, radius: f64, total: f64) -> Option<f64> {
    if total <= 0.0 {
        return None;
    }
    let inner: f64 = hist
        .iter()
        .enumerate()
        .filter(|(i, _)| (*i as f64 + 1.0) * width <= radius + 1e-12)
        .map(|(_, w)| w)
        .sum();
    Some(inner / total)
}
