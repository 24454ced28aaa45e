//! Run configuration: a TOML file whose keys can each be overridden by a
//! dotted command-line flag (`spectrum.sigma_omega` ↔ `--spectrum.sigma-omega`).

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bayes::RotationPrior;
use crate::channel::SagnacChannel;
use crate::error::{invalid, Result};
use crate::fidelity::{MonteCarloSettings, QuadratureSettings};
use crate::sagnac::GyroGeometry;
use crate::spectrum::InputSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKindArg {
    Monochromatic,
    Gaussian,
    /// Gaussian comb built from a mode spacing.
    Comb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKindArg {
    UniformCutoff,
    FlatCircular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Closed,
    Quadrature,
    Direct,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub area: f64,
    pub perimeter: f64,
    pub turns: u32,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            area: 1.0,
            perimeter: 4.0,
            turns: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub kind: SpectrumKindArg,
    pub omega_bar: f64,
    pub sigma_omega: f64,
    /// Mode spacing, used by `kind = "comb"` only.
    pub delta_omega: Option<f64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            kind: SpectrumKindArg::Gaussian,
            omega_bar: 2.976e15,
            sigma_omega: 2.976e11,
            delta_omega: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorConfig {
    pub kind: PriorKindArg,
    pub omega_max: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            kind: PriorKindArg::UniformCutoff,
            omega_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    pub method: MethodArg,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub tail_widths: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        let q = QuadratureSettings::default();
        let mc = MonteCarloSettings::default();
        Self {
            method: MethodArg::Quadrature,
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_subdivisions: q.max_subdivisions,
            tail_widths: q.tail_widths,
            samples: mc.samples,
            seed: mc.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            format: Format::Json,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub spectrum: SpectrumConfig,
    pub prior: PriorConfig,
    pub estimator: EstimatorConfig,
    pub output: OutputConfig,
}

/// Flags shared by every configurable subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long = "geometry.area", value_name = "M2")]
    pub area: Option<f64>,
    #[arg(long = "geometry.perimeter", value_name = "M")]
    pub perimeter: Option<f64>,
    #[arg(long = "geometry.turns")]
    pub turns: Option<u32>,

    #[arg(long = "spectrum.kind", value_enum)]
    pub spectrum_kind: Option<SpectrumKindArg>,
    #[arg(long = "spectrum.omega-bar", value_name = "RAD_PER_S")]
    pub omega_bar: Option<f64>,
    #[arg(long = "spectrum.sigma-omega", value_name = "RAD_PER_S")]
    pub sigma_omega: Option<f64>,
    #[arg(long = "spectrum.delta-omega", value_name = "RAD_PER_S")]
    pub mode_spacing: Option<f64>,

    #[arg(long = "prior.kind", value_enum)]
    pub prior_kind: Option<PriorKindArg>,
    #[arg(long = "prior.omega-max", value_name = "RAD_PER_S")]
    pub omega_max: Option<f64>,

    #[arg(long = "estimator.method", value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long = "estimator.rel-tol")]
    pub rel_tol: Option<f64>,
    #[arg(long = "estimator.abs-tol")]
    pub abs_tol: Option<f64>,
    #[arg(long = "estimator.max-subdivisions")]
    pub max_subdivisions: Option<usize>,
    #[arg(long = "estimator.tail-widths")]
    pub tail_widths: Option<f64>,
    #[arg(long = "estimator.samples")]
    pub samples: Option<usize>,
    #[arg(long = "estimator.seed", visible_alias = "seed")]
    pub seed: Option<u64>,

    #[arg(long = "output.format", visible_alias = "format", value_enum)]
    pub format: Option<Format>,
    #[arg(long = "output.path", visible_alias = "output", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

macro_rules! set {
    ($($dst:expr => $src:expr),* $(,)?) => {
        $(if let Some(v) = $src.clone() { $dst = v.into(); })*
    };
}

impl Overrides {
    /// Loads the config file (if any) and applies the flags on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load(path)?,
            None => RunConfig::default(),
        };
        set! {
            cfg.geometry.area => self.area,
            cfg.geometry.perimeter => self.perimeter,
            cfg.geometry.turns => self.turns,
            cfg.spectrum.kind => self.spectrum_kind,
            cfg.spectrum.omega_bar => self.omega_bar,
            cfg.spectrum.sigma_omega => self.sigma_omega,
            cfg.prior.kind => self.prior_kind,
            cfg.prior.omega_max => self.omega_max,
            cfg.estimator.method => self.method,
            cfg.estimator.rel_tol => self.rel_tol,
            cfg.estimator.abs_tol => self.abs_tol,
            cfg.estimator.max_subdivisions => self.max_subdivisions,
            cfg.estimator.tail_widths => self.tail_widths,
            cfg.estimator.samples => self.samples,
            cfg.estimator.seed => self.seed,
            cfg.output.format => self.format,
        }
        if self.mode_spacing.is_some() {
            cfg.spectrum.delta_omega = self.mode_spacing;
        }
        if self.output.is_some() {
            cfg.output.path = self.output.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| invalid("config", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| invalid("config", e.to_string()))
}

impl RunConfig {
    /// Re-checks every invariant by building the domain objects.
    pub fn validate(&self) -> Result<()> {
        self.channel()?;
        self.prior()?;
        self.quadrature().validate()?;
        if self.estimator.samples < crate::fidelity::MIN_SAMPLES {
            return Err(invalid(
                "config",
                format!("estimator.samples must be at least {}", crate::fidelity::MIN_SAMPLES),
            ));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<GyroGeometry> {
        GyroGeometry::planar(self.geometry.area, self.geometry.perimeter, self.geometry.turns)
    }

    pub fn spectrum(&self) -> Result<InputSpectrum> {
        let s = &self.spectrum;
        match s.kind {
            SpectrumKindArg::Monochromatic => InputSpectrum::monochromatic(s.omega_bar),
            SpectrumKindArg::Gaussian => InputSpectrum::gaussian(s.omega_bar, s.sigma_omega),
            SpectrumKindArg::Comb => {
                let spacing = s
                    .delta_omega
                    .ok_or_else(|| invalid("config", "spectrum.delta_omega is required for a comb spectrum"))?;
                InputSpectrum::gaussian_comb(s.omega_bar, spacing)
            }
        }
    }

    pub fn channel(&self) -> Result<SagnacChannel> {
        Ok(SagnacChannel::new(self.geometry()?, self.spectrum()?))
    }

    pub fn prior(&self) -> Result<RotationPrior> {
        match self.prior.kind {
            PriorKindArg::UniformCutoff => RotationPrior::uniform_cutoff(self.prior.omega_max),
            PriorKindArg::FlatCircular => Ok(RotationPrior::FlatCircular),
        }
    }

    pub fn quadrature(&self) -> QuadratureSettings {
        QuadratureSettings {
            rel_tol: self.estimator.rel_tol,
            abs_tol: self.estimator.abs_tol,
            max_subdivisions: self.estimator.max_subdivisions,
            tail_widths: self.estimator.tail_widths,
        }
    }

    pub fn monte_carlo(&self) -> MonteCarloSettings {
        MonteCarloSettings {
            samples: self.estimator.samples,
            seed: self.estimator.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file_parses() {
        let cfg = parse(
            r#"
            [geometry]
            area = 0.5
            perimeter = 3.0
            turns = 10
            [spectrum]
            kind = "gaussian"
            omega_bar = 1e15
            sigma_omega = 1e12
            [prior]
            kind = "uniform-cutoff"
            omega_max = 2.0
            [estimator]
            method = "monte-carlo"
            samples = 5000
            seed = 3
            [output]
            format = "csv"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.geometry.turns, 10);
        assert_eq!(cfg.estimator.method, MethodArg::MonteCarlo);
        assert_eq!(cfg.output.format, Format::Csv);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse("[geometry]\narea = 1.0\nradius = 2.0\n").is_err());
        assert!(parse("[lens]\nfocal = 1.0\n").is_err());
    }

    #[test]
    fn invariants_are_rechecked() {
        let cfg = parse("[spectrum]\nomega_bar = 10.0\nsigma_omega = 5.0\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = parse("[geometry]\narea = 100.0\nperimeter = 4.0\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = parse("[spectrum]\nkind = \"comb\"\n").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[spectrum]\nsigma_omega = 1e12\nomega_bar = 1e15\n").unwrap();
        let o = Overrides {
            config: Some(path),
            sigma_omega: Some(1e11),
            seed: Some(9),
            ..Default::default()
        };
        let cfg = o.resolve().unwrap();
        assert_eq!(cfg.spectrum.sigma_omega, 1e11);
        assert_eq!(cfg.spectrum.omega_bar, 1e15);
        assert_eq!(cfg.estimator.seed, 9);
    }
}
