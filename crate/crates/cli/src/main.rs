mod analyze;
mod plots;
mod simulate;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use oam_ionize_core::angular::{derive_selection_rules, ponderomotive_rules, HamiltonianPart, SelectionRuleSet};
use oam_ionize_core::config::RunConfig;
use oam_ionize_core::quadrature::{quadrature_for, verify_rule_set};
use oam_ionize_core::Polarization64;

#[derive(Parser)]
#[command(name = "oam-ionize", version, about = "Selection rules and TDSE runs for hydrogen in OAM laser pulses")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "OAM_IONIZE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the selection rules of both interaction terms.
    DeriveRules {
        #[arg(long, allow_hyphen_values = true)]
        ell: i32,
        #[arg(long, default_value = "linear-x")]
        pol: Polarization64,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Check the rules against brute-force sphere quadrature.
    OracleVerify(OracleArgs),
    /// Run a simulation described by a config file.
    Simulate(simulate::SimulateArgs),
    /// Analyze a saved wavefunction checkpoint.
    Analyze(analyze::AnalyzeArgs),
    /// Dump the field at fixed points as CSV (t, Ax, Ay, Ex, Ey).
    FieldProbe(ProbeArgs),
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = -3, allow_hyphen_values = true)]
    ell_min: i32,
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    ell_max: i32,
    #[arg(long, default_value_t = 8)]
    l_max: i32,
    /// Polarizations to scan (repeatable; default all four named ones).
    #[arg(long)]
    pol: Vec<Polarization64>,
    /// Write the full JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Probe point `x,y,z` in au (repeatable).
    #[arg(long = "point", value_parser = parse_point)]
    points: Vec<[f64; 3]>,
    /// Samples per optical period.
    #[arg(long, default_value_t = 50)]
    per_period: usize,
    /// One CSV per point in this directory; stdout when absent.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected x,y,z, got '{s}'"))
}

/// Failures that still produced a report; reported with exit code 1.
#[derive(Debug)]
struct Rejected(String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::DeriveRules { ell, pol, json } => derive_rules(ell, &pol, json),
        Command::OracleVerify(a) => oracle_verify(&a),
        Command::Simulate(a) => simulate::run(&a),
        Command::Analyze(a) => analyze::run(&a),
        Command::FieldProbe(a) => field_probe(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Rejected>() => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn rule_sets(ell: i32, pol: &Polarization64) -> Vec<SelectionRuleSet> {
    vec![
        derive_selection_rules(ell, pol, HamiltonianPart::HI),
        derive_selection_rules(ell, pol, HamiltonianPart::HII),
        ponderomotive_rules(ell, pol),
    ]
}

fn derive_rules(ell: i32, pol: &Polarization64, json: bool) -> Result<()> {
    let sets = rule_sets(ell, pol);
    let mut out = std::io::stdout().lock();
    if json {
        serde_json::to_writer_pretty(&mut out, &sets)?;
        writeln!(out)?;
    } else {
        writeln!(out, "ℓ = {ell}, polarization {pol}")?;
        for s in &sets {
            writeln!(out, "  {s}")?;
        }
    }
    Ok(())
}

fn oracle_verify(a: &OracleArgs) -> Result<()> {
    if a.ell_min > a.ell_max {
        bail!("--ell-min {} exceeds --ell-max {}", a.ell_min, a.ell_max);
    }
    if a.l_max < 0 {
        bail!("--l-max must be non-negative");
    }
    let pols = if a.pol.is_empty() {
        vec![
            Polarization64::linear_x(),
            Polarization64::linear_y(),
            Polarization64::circular_left(),
            Polarization64::circular_right(),
        ]
    } else {
        a.pol.clone()
    };
    let mut reports = Vec::new();
    let mut failed = 0;
    for ell in a.ell_min..=a.ell_max {
        for pol in &pols {
            for rules in rule_sets(ell, pol) {
                let quad = quadrature_for(&rules, a.l_max as usize);
                let rep = verify_rule_set::<f64>(&rules, a.l_max, &quad)?;
                let status = if rep.verified() { "ok" } else { "DISAGREE" };
                println!(
                    "{status:8} ℓ={ell:+} {pol:10} {rules}  tuples={} nonzero={} disagreements={} unresolved={} accidental_zeros={} unwitnessed={:?}",
                    rep.tuples_checked,
                    rep.nonzero.len(),
                    rep.disagreements.len(),
                    rep.unresolved.len(),
                    rep.accidental_zeros.len(),
                    rep.classes_without_witness,
                );
                if !rep.verified() {
                    failed += 1;
                }
                reports.push(rep);
            }
        }
    }
    if let Some(path) = &a.out {
        write_json(path, &reports)?;
    }
    if failed > 0 {
        return Err(Rejected(format!("{failed} rule set(s) disagree with the quadrature oracle")).into());
    }
    Ok(())
}

fn field_probe(a: &ProbeArgs) -> Result<()> {
    let cfg = RunConfig::load(&a.config)?;
    let pulse = cfg.pulse();
    let points = if a.points.is_empty() { vec![[1.0, 0.0, 0.0]] } else { a.points.clone() };
    if a.out_dir.is_none() && points.len() > 1 {
        bail!("several --point values need --out-dir");
    }
    if a.per_period == 0 {
        bail!("--per-period must be positive");
    }
    let dt = pulse.period() / a.per_period as f64;
    for (i, r) in points.iter().enumerate() {
        let (t0, t1) = pulse.window(r[2]);
        let n = ((t1 - t0) / dt).ceil() as usize;
        let mut text = String::from("t,Ax,Ay,Ex,Ey\n");
        for k in 0..=n {
            let t = t0 + k as f64 * dt;
            let f = pulse.field(*r, t);
            text.push_str(&format!("{t:.6},{:.9e},{:.9e},{:.9e},{:.9e}\n", f.a[0], f.a[1], f.e[0], f.e[1]));
        }
        match &a.out_dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join(format!("field_probe_{i}.csv"));
                fs::write(&path, text).with_context(|| path.display().to_string())?;
                eprintln!("point {i} = {r:?} -> {}", path.display());
            }
            None => print!("{text}"),
        }
    }
    Ok(())
}

pub(crate) fn write_json<S: serde::Serialize + ?Sized>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
