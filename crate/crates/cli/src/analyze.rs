use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use oam_ionize_core::analysis::{
    canonical_oam, compliance, position_expectation, radial_histogram, spherical_spectrum, split_excited,
    xy_projection, SpectrumOptions,
};
use oam_ionize_core::config::RunConfig;
use oam_ionize_core::tdse::{AbsorberConfig, Propagator, PropagatorConfig};
use oam_ionize_core::{Polarization64, Wavefunction64};
use serde_json::json;

use crate::write_json;

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Wavefunction checkpoint to analyze.
    #[arg(long)]
    state: PathBuf,
    /// Ground-state checkpoint projected out before the spectrum.
    #[arg(long)]
    ground: PathBuf,
    /// Run config supplying ℓ, polarization and analysis defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    ell: Option<i32>,
    #[arg(long)]
    pol: Option<Polarization64>,
    #[arg(long)]
    l_max: Option<usize>,
    #[arg(long)]
    n_radial: Option<usize>,
    #[arg(long)]
    r_max: Option<f64>,
    /// Number of interaction orders in the allowed-channel closure.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, default_value = "analysis")]
    out_dir: PathBuf,
}

pub fn run(a: &AnalyzeArgs) -> Result<()> {
    let cfg = a.config.as_deref().map(RunConfig::load).transpose()?;
    let (psi, meta) = Wavefunction64::read_checkpoint(&a.state).with_context(|| format!("reading {}", a.state.display()))?;
    let (ground, _) = Wavefunction64::read_checkpoint(&a.ground).with_context(|| format!("reading {}", a.ground.display()))?;
    if psi.grid != ground.grid {
        bail!("{} and {} live on different grids", a.state.display(), a.ground.display());
    }
    let grid = psi.grid;
    if let Some(c) = &cfg {
        if c.grid_spec().ok() != Some(grid) {
            bail!("checkpoint grid does not match the grid of the config");
        }
    }
    let ell = a.ell.or(cfg.as_ref().map(|c| c.beam.ell)).unwrap_or(1);
    let pol = a
        .pol
        .or_else(|| cfg.as_ref().map(|c| c.polarization()))
        .unwrap_or_else(Polarization64::linear_x);
    let mut opts = match &cfg {
        Some(c) => c.spectrum_options(&grid),
        None => SpectrumOptions::new(8, 40),
    };
    if cfg.is_none() {
        opts.absorber_width = AbsorberConfig::default_for(&grid).width;
    }
    if let Some(l) = a.l_max {
        opts.l_max = l;
    }
    if let Some(n) = a.n_radial {
        opts.n_radial = n;
    }
    if a.r_max.is_some() {
        opts.r_max = a.r_max;
    }
    let order = a.order.or(cfg.as_ref().map(|c| c.analysis.closure_order)).unwrap_or(3);
    let (width, bins) = cfg
        .as_ref()
        .map(|c| (c.analysis.histogram_width, c.analysis.histogram_bins))
        .unwrap_or((1.0, 40));

    fs::create_dir_all(&a.out_dir)?;
    let out = &a.out_dir;
    let (amp, delta) = split_excited(&psi, &ground)?;
    let spectrum = spherical_spectrum(&delta, &opts)?;
    let rep = compliance(&spectrum, ell, &pol, order);
    write_json(&out.join("spectrum.json"), &spectrum.to_json())?;
    spectrum.write_csv(BufWriter::new(File::create(out.join("spectrum.csv"))?))?;
    write_json(&out.join("compliance.json"), &rep)?;
    xy_projection(&delta).write_csv(
        BufWriter::new(File::create(out.join("projection.csv"))?),
        &format!("excited density of {} at t = {:.4}", a.state.display(), meta.t),
    )?;
    let hist = radial_histogram(&delta, width, bins);
    let mut text = String::from("r_lo,r_hi,weight\n");
    for (i, w) in hist.iter().enumerate() {
        let lo = i as f64 * width;
        text.push_str(&format!("{lo:.6},{:.6},{w:.9e}\n", lo + width));
    }
    fs::write(out.join("radial_histogram.csv"), text)?;

    let mut pcfg = PropagatorConfig::new(0.01, &grid);
    pcfg.absorber = AbsorberConfig::none();
    let prop = Propagator::new(grid, pcfg, None)?;
    let excited = delta.norm_sqr();
    let summary = json!({
        "state": a.state.display().to_string(),
        "t": meta.t,
        "step": meta.step,
        "norm": psi.norm_sqr(),
        "ground_depletion": 1.0 - amp.norm_sqr() / ground.norm_sqr(),
        "excited_weight": excited,
        "oam_canonical": canonical_oam(&prop, &psi).ok(),
        "oam_excited": if excited > 0.0 { canonical_oam(&prop, &delta).ok() } else { None },
        "position_excited": position_expectation(&delta).ok(),
        "spectrum_total": spectrum.total(),
        "forbidden_fraction": rep.forbidden_fraction(),
        "max_forbidden": rep.max_forbidden(),
        "top_channels": spectrum.ranking().iter().take(8).map(|(k, p)| json!({"L": k.l(), "M": k.m(), "P": p})).collect::<Vec<_>>(),
    });
    write_json(&out.join("summary.json"), &summary)?;
    println!("excited weight {excited:.6e}, spectrum total {:.6e}, forbidden fraction {:.3e}", spectrum.total(), rep.forbidden_fraction());
    for (k, p) in spectrum.ranking().iter().take(6) {
        let tag = if rep.channels.iter().any(|c| c.l == k.l() && c.m == k.m() && c.allowed) { "" } else { " (forbidden)" };
        println!("  ({:2},{:+3})  {p:.4e}{tag}", k.l(), k.m());
    }
    Ok(())
}
