//! TOML run configuration shared by every scenario of the driver.
//!
//! ```toml
//! version = 1
//! name = "fig5_desk"
//!
//! [beam]
//! ell = 1
//! polarization = "linear-x"
//! omega = 1.0
//! n_cyc = 3
//! waist = 20.0
//! target_field = { e = 5.0, rho = 20.0 }
//!
//! [grid]
//! n = [64, 64, 64]
//! h = 0.5
//!
//! [propagator]
//! dt = 0.005
//! ```
//!
//! Everything not shown has a default. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::SpectrumOptions;
use crate::angular::{Polarization, PolarizationRecord};
use crate::beam::{FieldModel, LgNormalization, PulseConfig, SPEED_OF_LIGHT};
use crate::scalar::cplx;
use crate::tdse::{AbsorberConfig, AbsorberKind, Gauge, GridSpec, PropagatorConfig, RunOptions};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Invalid { path: String, line: usize, message: String },
    #[error("{path}: {message}")]
    Semantic { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Named polarization or explicit Jones components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolarizationSpec {
    Named(String),
    Jones(PolarizationRecord),
}

impl PolarizationSpec {
    pub fn resolve(&self) -> Result<Polarization<f64>, String> {
        match self {
            PolarizationSpec::Named(s) => s.parse().map_err(|e| format!("{e}")),
            PolarizationSpec::Jones(r) => Polarization::new(cplx(r.alpha[0], r.alpha[1]), cplx(r.beta[0], r.beta[1]))
                .map_err(|e| format!("{e}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetField {
    /// Peak field magnitude, au.
    pub e: f64,
    /// Distance from the axis where it is reached, au.
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    pub ell: i32,
    pub polarization: PolarizationSpec,
    #[serde(default = "one")]
    pub omega: f64,
    pub n_cyc: u32,
    #[serde(default)]
    pub p: u32,
    pub waist: f64,
    /// `A0`; ignored when `target_field` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_field: Option<TargetField>,
    #[serde(default)]
    pub chi: f64,
    #[serde(default = "one")]
    pub origin_offset: f64,
    #[serde(default)]
    pub atom_displacement: [f64; 3],
    #[serde(default)]
    pub normalization: LgNormalization,
    #[serde(default)]
    pub model: FieldModel,
    #[serde(default = "speed_of_light")]
    pub speed_of_light: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: [usize; 3],
    pub h: f64,
    #[serde(default)]
    pub center: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsorberSection {
    #[serde(default)]
    pub kind: AbsorberKind,
    /// Defaults to 20% of the shortest box side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default = "default_strength")]
    pub strength: f64,
}

impl Default for AbsorberSection {
    fn default() -> Self {
        AbsorberSection {
            kind: AbsorberKind::CosMask,
            width: None,
            strength: default_strength(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub gauge: Gauge,
    #[serde(default = "default_soft_core")]
    pub soft_core_a: f64,
    #[serde(default = "minus_one")]
    pub charge: f64,
    #[serde(default = "one")]
    pub nuclear_charge: f64,
    #[serde(default)]
    pub absorber: AbsorberSection,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        PropagatorSection {
            dt: default_dt(),
            gauge: Gauge::Velocity,
            soft_core_a: default_soft_core(),
            charge: -1.0,
            nuclear_charge: 1.0,
            absorber: AbsorberSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Field-free time appended after the pulse, au.
    #[serde(default)]
    pub tail_time: f64,
    /// Steps between checkpoints; zero disables them.
    #[serde(default)]
    pub checkpoint_every: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            record_every: default_record_every(),
            tail_time: 0.0,
            checkpoint_every: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default = "default_n_radial")]
    pub n_radial: usize,
    /// Defaults to the largest radius clear of the absorber.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default = "default_order")]
    pub closure_order: usize,
    /// Absolute times (au) at which spectra and projections are saved.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Recompute spectrum and compliance at every recorded sample.
    #[serde(default)]
    pub track_compliance: bool,
    /// Radial histogram bin width (au) and bin count for the final state.
    #[serde(default = "one")]
    pub histogram_width: f64,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    /// Field-free settling time for the unbound estimate; zero skips it.
    #[serde(default)]
    pub settle_time: f64,
    #[serde(default = "default_bound_radius")]
    pub bound_radius: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            l_max: default_l_max(),
            n_radial: default_n_radial(),
            r_max: None,
            closure_order: default_order(),
            snapshot_times: Vec::new(),
            track_compliance: false,
            histogram_width: 1.0,
            histogram_bins: default_bins(),
            settle_time: 0.0,
            bound_radius: default_bound_radius(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub trajectory: bool,
    #[serde(default = "yes")]
    pub final_state: bool,
    #[serde(default = "yes")]
    pub spectrum: bool,
    #[serde(default = "yes")]
    pub projection: bool,
    #[serde(default = "yes")]
    pub gnuplot: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out_dir(),
            trajectory: true,
            final_state: true,
            spectrum: true,
            projection: true,
            gnuplot: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub beam: BeamSection,
    pub grid: GridSection,
    #[serde(default)]
    pub propagator: PropagatorSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn one() -> f64 {
    1.0
}
fn minus_one() -> f64 {
    -1.0
}
fn yes() -> bool {
    true
}
fn speed_of_light() -> f64 {
    SPEED_OF_LIGHT
}
fn default_strength() -> f64 {
    0.125
}
fn default_dt() -> f64 {
    0.005
}
fn default_soft_core() -> f64 {
    0.05
}
fn default_record_every() -> usize {
    10
}
fn default_l_max() -> usize {
    8
}
fn default_n_radial() -> usize {
    40
}
fn default_order() -> usize {
    3
}
fn default_bins() -> usize {
    40
}
fn default_bound_radius() -> f64 {
    10.0
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// 1-based line of `key = …` inside `[section]` (or the top level for an
/// empty section); falls back to the section header, then to line 1.
pub fn line_of(src: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return i + 1;
                }
            }
        }
    }
    header.unwrap_or(1)
}

impl RunConfig {
    pub fn from_toml(src: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| src[..s.start].matches('\n').count() + 1);
            let message = e.message().to_string();
            match line {
                Some(line) => ConfigError::Invalid {
                    path: path.into(),
                    line,
                    message,
                },
                None => ConfigError::Parse {
                    path: path.into(),
                    message,
                },
            }
        })?;
        cfg.validate().map_err(|(section, key, message)| ConfigError::Invalid {
            path: path.into(),
            line: line_of(src, section, key),
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&src, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    /// Cross-field checks; errors name the offending `(section, key)`.
    pub fn validate(&self) -> Result<(), (&'static str, &'static str, String)> {
        if self.version != CONFIG_VERSION {
            return Err((
                "",
                "version",
                format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version),
            ));
        }
        self.beam.polarization.resolve().map_err(|e| ("beam", "polarization", e))?;
        if self.beam.amplitude.is_none() && self.beam.target_field.is_none() {
            return Err(("beam", "amplitude", "give either amplitude or target_field".into()));
        }
        if let Some(t) = self.beam.target_field {
            if !(t.rho > 0.0) || !(t.e >= 0.0) {
                return Err(("beam", "target_field", "target_field needs e ≥ 0 and rho > 0".into()));
            }
            if self.beam.ell != 0 && self.beam.model == FieldModel::Full {
                return Err((
                    "beam",
                    "target_field",
                    "target_field calibrates the near-origin profile; use amplitude with the full model".into(),
                ));
            }
        }
        self.pulse().validate().map_err(|e| ("beam", "n_cyc", e))?;
        let grid = self.grid_spec().map_err(|e| ("grid", "n", e))?;
        let prop = self.propagator_config(&grid);
        prop.validate(&grid).map_err(|e| {
            let key = if format!("{e}").contains("absorber") { "width" } else { "dt" };
            let section = if key == "width" { "propagator.absorber" } else { "propagator" };
            (section, key, format!("{e}"))
        })?;
        if self.run.record_every == 0 {
            return Err(("run", "record_every", "record_every must be positive".into()));
        }
        if !(self.run.tail_time >= 0.0) {
            return Err(("run", "tail_time", "tail_time must be non-negative".into()));
        }
        let so = self.spectrum_options(&grid);
        let r_max = so.resolve_r_max(&grid);
        let limit = so.with_r_max(None).resolve_r_max(&grid);
        if !(r_max > 0.0) || r_max > limit + 1e-12 {
            return Err((
                "analysis",
                "r_max",
                format!("r_max = {r_max} must be positive and inside the absorber (at most {limit:.3})"),
            ));
        }
        if self.analysis.n_radial == 0 {
            return Err(("analysis", "n_radial", "n_radial must be positive".into()));
        }
        if self.analysis.closure_order == 0 {
            return Err(("analysis", "closure_order", "closure_order must be at least 1".into()));
        }
        if !(self.analysis.histogram_width > 0.0) {
            return Err(("analysis", "histogram_width", "histogram_width must be positive".into()));
        }
        Ok(())
    }

    pub fn polarization(&self) -> Polarization<f64> {
        self.beam.polarization.resolve().expect("validated polarization")
    }

    pub fn pulse(&self) -> PulseConfig<f64> {
        let b = &self.beam;
        let mut p = PulseConfig::new(b.amplitude.unwrap_or(0.0), self.polarization_or_default(), b.omega, b.n_cyc, b.ell, b.waist);
        p.p = b.p;
        p.chi = b.chi;
        p.origin_offset = b.origin_offset;
        p.atom_displacement = b.atom_displacement;
        p.normalization = b.normalization;
        p.model = b.model;
        p.speed_of_light = b.speed_of_light;
        if let Some(t) = b.target_field {
            p.amplitude = p.amplitude_for_field(t.e, t.rho);
        }
        p
    }

    fn polarization_or_default(&self) -> Polarization<f64> {
        self.beam.polarization.resolve().unwrap_or_else(|_| Polarization::linear_x())
    }

    pub fn grid_spec(&self) -> Result<GridSpec<f64>, String> {
        GridSpec::new(self.grid.n, self.grid.h, self.grid.center).map_err(|e| format!("{e}"))
    }

    pub fn propagator_config(&self, grid: &GridSpec<f64>) -> PropagatorConfig<f64> {
        let p = &self.propagator;
        let mut cfg = PropagatorConfig::new(p.dt, grid);
        cfg.gauge = p.gauge;
        cfg.soft_core_a = p.soft_core_a;
        cfg.charge = p.charge;
        cfg.nuclear_charge = p.nuclear_charge;
        cfg.absorber = match p.absorber.kind {
            AbsorberKind::None => AbsorberConfig::none(),
            AbsorberKind::CosMask => {
                let mut a = AbsorberConfig::default_for(grid);
                if let Some(w) = p.absorber.width {
                    a.width = w;
                }
                a.strength = p.absorber.strength;
                a
            }
        };
        cfg
    }

    pub fn run_options(&self) -> RunOptions<f64> {
        RunOptions {
            record_every: self.run.record_every,
            tail_time: self.run.tail_time,
        }
    }

    pub fn spectrum_options(&self, grid: &GridSpec<f64>) -> SpectrumOptions<f64> {
        let mut so = SpectrumOptions::new(self.analysis.l_max, self.analysis.n_radial);
        so.r_max = self.analysis.r_max;
        so.absorber_width = self.propagator_config(grid).absorber.width;
        so
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
version = 1
name = "t"

[beam]
ell = 1
polarization = "linear-x"
n_cyc = 3
waist = 20.0
target_field = { e = 5.0, rho = 20.0 }

[grid]
n = [32, 32, 32]
h = 0.5
"#;

    #[test]
    fn minimal_config_gets_defaults_and_round_trips() {
        let c = RunConfig::from_toml(MINIMAL, "t.toml").unwrap();
        assert_eq!(c.propagator.dt, 0.005);
        assert_eq!(c.analysis.closure_order, 3);
        let p = c.pulse();
        assert!(p.amplitude > 0.0);
        let again = RunConfig::from_toml(&c.to_toml(), "again.toml").unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn errors_point_at_the_offending_line() {
        let bad = MINIMAL.replace("h = 0.5", "h = 0.5\nbogus = 3");
        let e = RunConfig::from_toml(&bad, "b.toml").unwrap_err().to_string();
        assert!(e.starts_with("b.toml:"), "{e}");
        assert!(e.contains("bogus"), "{e}");

        let bad = MINIMAL.replace("n = [32, 32, 32]", "n = [32, 31, 32]");
        let e = RunConfig::from_toml(&bad, "b.toml").unwrap_err();
        let ConfigError::Invalid { line, .. } = e else { panic!("{e}") };
        assert_eq!(line, 13);

        let bad = format!("{MINIMAL}\n[propagator.absorber]\nwidth = 9.0\n");
        let e = RunConfig::from_toml(&bad, "b.toml").unwrap_err();
        let ConfigError::Invalid { line, message, .. } = e else { panic!("{e}") };
        assert_eq!(line, 17, "{message}");

        let bad = MINIMAL.replace("version = 1", "version = 7");
        let e = RunConfig::from_toml(&bad, "b.toml").unwrap_err();
        let ConfigError::Invalid { line, .. } = e else { panic!("{e}") };
        assert_eq!(line, 2);

        let bad = MINIMAL.replace("\"linear-x\"", "\"diagonal\"");
        let e = RunConfig::from_toml(&bad, "b.toml").unwrap_err().to_string();
        assert!(e.contains(":7:") && e.contains("diagonal"), "{e}");
    }

    #[test]
    fn r_max_must_clear_the_absorber() {
        let bad = format!("{MINIMAL}\n[analysis]\nr_max = 7.5\n");
        assert!(RunConfig::from_toml(&bad, "b.toml").is_err());
        let ok = format!("{MINIMAL}\n[analysis]\nr_max = 3.0\n");
        assert!(RunConfig::from_toml(&ok, "b.toml").is_ok());
    }

    #[test]
    fn jones_polarization_is_accepted() {
        let src = MINIMAL.replace(
            "polarization = \"linear-x\"",
            "polarization = { alpha = [1.0, 0.0], beta = [0.0, 0.5] }",
        );
        let c = RunConfig::from_toml(&src, "j.toml").unwrap();
        let p = c.polarization();
        assert!((p.alpha().norm_sqr() + p.beta().norm_sqr() - 1.0).abs() < 1e-12);
    }
}
