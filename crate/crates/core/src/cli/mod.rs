//! The `sagnac-fidelity` command line: `physics`, `fidelity`, `posterior` and
//! `sweep`. Exit codes are 0 on success, 2 for usage or configuration errors
//! and 3 for numerical failures.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::bayes::{posterior, PosteriorDensity};
use crate::error::Error;
use crate::fidelity::{
    bound_comparison_sweep, closed_form_bound, mutual_information_direct, mutual_information_mc,
    mutual_information_quadrature, FidelityEstimate,
};
use crate::sagnac::{self, GyroGeometry, RotationRate};
use crate::spectrum::MIN_NARROWNESS;

use config::{Format, MethodArg, Overrides, RunConfig};
use output::{emit, num, opt_num, Cell, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sagnac-fidelity",
    version,
    about = "Information-theoretic fidelity of a classical Sagnac gyroscope"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one Sagnac observable.
    Physics(PhysicsArgs),
    /// Mutual information between measured shift and rotation rate.
    Fidelity(FidelityArgs),
    /// Posterior density of the rotation rate on a grid, for one measured shift.
    Posterior(PosteriorArgs),
    /// Numerical fidelity against the closed-form benchmark over narrowness ratios.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct PhysicsArgs {
    #[command(subcommand)]
    pub observable: Observable,
}

#[derive(Debug, Clone, Args)]
pub struct Loop {
    /// Enclosed area in m².
    #[arg(long, allow_negative_numbers = true)]
    pub area: f64,
    /// Perimeter in m.
    #[arg(long, allow_negative_numbers = true)]
    pub perimeter: f64,
    #[arg(long, default_value_t = 1)]
    pub turns: u32,
}

#[derive(Debug, Clone, Args)]
pub struct Emit {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Observable {
    /// Fringe shift ΔN.
    #[command(group(ArgGroup::new("light").required(true).args(["wavelength", "omega_bar"])))]
    Fringe {
        #[command(flatten)]
        geometry: Loop,
        /// Vacuum wavelength in m.
        #[arg(long)]
        wavelength: Option<f64>,
        /// Light angular frequency in rad/s, used when no wavelength is given.
        #[arg(long)]
        omega_bar: Option<f64>,
        /// Rotation rate about the loop normal, rad/s.
        #[arg(long, allow_negative_numbers = true)]
        rotation: f64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Frequency splitting Δω in rad/s.
    Freq {
        #[command(flatten)]
        geometry: Loop,
        #[arg(long)]
        omega_bar: f64,
        #[arg(long, allow_negative_numbers = true)]
        rotation: f64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Phase difference Δφ in rad.
    Phase {
        #[command(flatten)]
        geometry: Loop,
        #[arg(long)]
        omega_bar: f64,
        #[arg(long, allow_negative_numbers = true)]
        rotation: f64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Scale factor S = 4Aω/(Lc).
    Scale {
        #[command(flatten)]
        geometry: Loop,
        #[arg(long)]
        omega_bar: f64,
        #[command(flatten)]
        emit: Emit,
    },
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Measured frequency shift Δω in rad/s.
    #[arg(long, allow_negative_numbers = true)]
    pub delta_omega: f64,
    /// Rotation grid as MIN,MAX,COUNT.
    #[arg(long, value_name = "MIN,MAX,COUNT", allow_hyphen_values = true)]
    pub grid: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Comma-separated narrowness ratios ω̄/σ_ω.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub ratios: Vec<f64>,
}

/// Why a command stopped, and what (if anything) to print anyway.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    partial: Option<Report>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
            partial: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::Invalid { .. } => EXIT_USAGE,
            Error::Inconsistent(_) | Error::Convergence { .. } => EXIT_NUMERICAL,
        };
        let partial = (code == EXIT_NUMERICAL).then(|| error_report(&e));
        Self {
            code,
            message: e.to_string(),
            partial,
        }
    }
}

fn error_report(e: &Error) -> Report {
    let mut obj = Map::new();
    let mut row = vec![Cell::Empty, Cell::Empty, Cell::Empty];
    if let Error::Convergence {
        value,
        abs_error,
        subdivisions,
    } = e
    {
        obj.insert("partial_value".into(), num(*value));
        obj.insert("partial_abs_error".into(), num(*abs_error));
        obj.insert("subdivisions".into(), json!(subdivisions));
        row = vec![
            Cell::Num(*value),
            Cell::Num(*abs_error),
            Cell::Num(*subdivisions as f64),
        ];
    }
    obj.insert("error".into(), Value::String(e.to_string()));
    row.push(Cell::Text(e.to_string()));
    Report {
        json: Value::Object(obj),
        headers: ["partial_value", "partial_abs_error", "subdivisions", "error"]
            .map(String::from)
            .to_vec(),
        rows: vec![row],
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let (format, path, result) = match cli.command {
        Command::Physics(a) => {
            let emit = a.observable.emit().clone();
            (emit.format, emit.output, physics(&a.observable))
        }
        Command::Fidelity(a) => configured(&a.overrides, |cfg| fidelity(cfg, err)),
        Command::Posterior(a) => configured(&a.overrides, |cfg| posterior_grid(cfg, a.delta_omega, &a.grid)),
        Command::Sweep(a) => configured(&a.overrides, |cfg| sweep(cfg, &a.ratios)),
    };
    let (code, report) = match result {
        Ok(report) => (EXIT_OK, Some(report)),
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            (f.code, f.partial)
        }
    };
    if let Some(report) = report {
        if let Err(e) = emit(&report.render(format), path.as_deref(), out) {
            let _ = writeln!(err, "error: cannot write output: {e}");
            return if code == EXIT_OK { EXIT_USAGE } else { code };
        }
    }
    code
}

fn configured(
    overrides: &Overrides,
    cmd: impl FnOnce(&RunConfig) -> Result<Report, Failure>,
) -> (Format, Option<PathBuf>, Result<Report, Failure>) {
    match overrides.resolve() {
        Ok(cfg) => (cfg.output.format, cfg.output.path.clone(), cmd(&cfg)),
        Err(e) => (
            overrides.format.unwrap_or(Format::Json),
            None,
            Err(Failure::usage(e.to_string())),
        ),
    }
}

impl Observable {
    fn emit(&self) -> &Emit {
        match self {
            Observable::Fringe { emit, .. }
            | Observable::Freq { emit, .. }
            | Observable::Phase { emit, .. }
            | Observable::Scale { emit, .. } => emit,
        }
    }
}

fn physics(obs: &Observable) -> Result<Report, Failure> {
    let geometry = |l: &Loop| GyroGeometry::planar(l.area, l.perimeter, l.turns);
    let mut inputs = Map::new();
    let mut put = |k: &str, v: f64| {
        inputs.insert(k.into(), num(v));
    };
    let (name, unit, value, l) = match obs {
        Observable::Fringe {
            geometry: l,
            wavelength,
            omega_bar,
            rotation,
            ..
        } => {
            let g = geometry(l)?;
            let lambda = match (wavelength, omega_bar) {
                (Some(w), _) => *w,
                (None, Some(w)) => {
                    put("omega_bar", *w);
                    sagnac::wavelength(*w)?
                }
                (None, None) => return Err(Failure::usage("fringe needs --wavelength or --omega-bar")),
            };
            put("wavelength", lambda);
            put("rotation", *rotation);
            let rate = RotationRate::about_normal(&g, *rotation)?;
            ("fringe", "fringes", sagnac::fringe_shift(&g, &rate, lambda)?, l)
        }
        Observable::Freq {
            geometry: l,
            omega_bar,
            rotation,
            ..
        } => {
            put("omega_bar", *omega_bar);
            put("rotation", *rotation);
            (
                "freq",
                "rad/s",
                sagnac::frequency_shift(&geometry(l)?, *omega_bar, *rotation)?,
                l,
            )
        }
        Observable::Phase {
            geometry: l,
            omega_bar,
            rotation,
            ..
        } => {
            put("omega_bar", *omega_bar);
            put("rotation", *rotation);
            (
                "phase",
                "rad",
                sagnac::phase_shift(&geometry(l)?, *omega_bar, *rotation)?,
                l,
            )
        }
        Observable::Scale {
            geometry: l, omega_bar, ..
        } => {
            put("omega_bar", *omega_bar);
            ("scale", "1", sagnac::scale_factor(&geometry(l)?, *omega_bar)?, l)
        }
    };
    inputs.insert("area".into(), num(l.area));
    inputs.insert("perimeter".into(), num(l.perimeter));
    inputs.insert("turns".into(), json!(l.turns));

    let mut headers = vec!["observable".to_string(), "value".into(), "unit".into()];
    let mut row = vec![Cell::from(name), Cell::Num(value), Cell::from(unit)];
    for (k, v) in &inputs {
        headers.push(k.clone());
        row.push(Cell::from(v.as_f64()));
    }
    Ok(Report {
        json: json!({"observable": name, "value": num(value), "unit": unit, "inputs": inputs}),
        headers,
        rows: vec![row],
    })
}

fn warn_narrowness(cfg: &RunConfig, err: &mut dyn Write) {
    if let Ok(s) = cfg.spectrum() {
        if s.is_marginally_narrow() {
            let _ = writeln!(
                err,
                "warning: omega_bar/sigma_omega = {} is close to the narrowness limit; approximations degrade",
                output::format_number(s.omega_bar() / s.sigma_omega())
            );
        }
    }
}

fn fidelity(cfg: &RunConfig, err: &mut dyn Write) -> Result<Report, Failure> {
    warn_narrowness(cfg, err);
    let channel = cfg.channel()?;
    let prior = cfg.prior()?;
    let q = cfg.quadrature();
    let spectrum = channel.spectrum();
    let h_max = if spectrum.is_point_mass() {
        None
    } else {
        closed_form_bound(spectrum.omega_bar(), spectrum.sigma_omega())?.bits()
    };
    let estimate: FidelityEstimate = match cfg.estimator.method {
        MethodArg::Closed if spectrum.is_point_mass() => mutual_information_quadrature(&channel, &prior, &q)?,
        MethodArg::Closed => closed_form_bound(spectrum.omega_bar(), spectrum.sigma_omega())?,
        MethodArg::Quadrature => mutual_information_quadrature(&channel, &prior, &q)?,
        MethodArg::Direct => mutual_information_direct(&channel, &prior, &q)?,
        MethodArg::MonteCarlo => {
            let mc = cfg.monte_carlo();
            mutual_information_mc(&channel, &prior, mc.samples, mc.seed, &q)?
        }
    };
    if estimate.diagnostics.contains_key("negative_bound") {
        let _ = writeln!(err, "warning: closed-form bound is negative for this ratio");
    }
    let method = match cfg.estimator.method {
        MethodArg::Closed => "closed",
        MethodArg::Quadrature => "quadrature",
        MethodArg::Direct => "direct",
        MethodArg::MonteCarlo => "monte-carlo",
    };
    let bits = estimate.bits();
    let diagnostics: Map<String, Value> = estimate.diagnostics.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    let json = json!({
        "method": method,
        "value_bits": opt_num(bits),
        "unbounded": bits.is_none(),
        "uncertainty_bits": num(estimate.uncertainty),
        "h_max_bits": opt_num(h_max),
        "diagnostics": diagnostics,
    });
    Ok(Report {
        json,
        headers: ["method", "value_bits", "unbounded", "uncertainty_bits", "h_max_bits"]
            .map(String::from)
            .to_vec(),
        rows: vec![vec![
            Cell::from(method),
            Cell::from(bits),
            Cell::from(bits.is_none()),
            Cell::Num(estimate.uncertainty),
            Cell::from(h_max),
        ]],
    })
}

fn parse_grid(spec: &str, half_width: f64) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [lo, hi, n] = parts[..] else {
        return Err(Failure::usage(format!("--grid expects MIN,MAX,COUNT, got '{spec}'")));
    };
    let bad = |what: &str| Failure::usage(format!("--grid: cannot parse {what} in '{spec}'"));
    let lo: f64 = lo.parse().map_err(|_| bad("MIN"))?;
    let hi: f64 = hi.parse().map_err(|_| bad("MAX"))?;
    let n: usize = n.parse().map_err(|_| bad("COUNT"))?;
    if n < 2 {
        return Err(Failure::usage("--grid COUNT must be at least 2"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Failure::usage("--grid needs finite MIN < MAX"));
    }
    if lo < -half_width || hi > half_width {
        return Err(Failure::usage(format!(
            "--grid [{lo}, {hi}] leaves the prior support [-{half_width}, {half_width}]"
        )));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect())
}

fn posterior_grid(cfg: &RunConfig, delta_omega: f64, grid: &str) -> Result<Report, Failure> {
    let channel = cfg.channel()?;
    let prior = cfg.prior()?;
    let grid = parse_grid(grid, prior.half_width())?;
    if !delta_omega.is_finite() {
        return Err(Failure::usage("--delta-omega must be finite"));
    }
    let headers = ["omega", "density", "point_mass"].map(String::from).to_vec();
    let peak = channel.invert(delta_omega);
    match posterior(&channel, &prior, delta_omega)? {
        PosteriorDensity::PointMass { location } => Ok(Report {
            json: json!({
                "delta_omega": num(delta_omega),
                "peak_omega": num(location),
                "point_mass": true,
                "rows": [{"omega": num(location), "density": null, "point_mass": true}],
            }),
            headers,
            rows: vec![vec![Cell::Num(location), Cell::Empty, Cell::Bool(true)]],
        }),
        PosteriorDensity::Curve(curve) => {
            let values: Vec<(f64, f64)> = grid.iter().map(|&w| (w, curve.density(w))).collect();
            let rows_json: Vec<Value> = values
                .iter()
                .map(|(w, d)| json!({"omega": num(*w), "density": num(*d), "point_mass": false}))
                .collect();
            Ok(Report {
                json: json!({
                    "delta_omega": num(delta_omega),
                    "peak_omega": num(peak),
                    "point_mass": false,
                    "evidence": num(curve.evidence()),
                    "rows": rows_json,
                }),
                headers,
                rows: values
                    .iter()
                    .map(|(w, d)| vec![Cell::Num(*w), Cell::Num(*d), Cell::Bool(false)])
                    .collect(),
            })
        }
    }
}

fn sweep(cfg: &RunConfig, ratios: &[f64]) -> Result<Report, Failure> {
    if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r > MIN_NARROWNESS)) {
        return Err(Failure::usage(format!(
            "--ratios must all exceed {MIN_NARROWNESS}, got {r}"
        )));
    }
    if cfg.spectrum.kind != config::SpectrumKindArg::Gaussian {
        return Err(Failure::usage(
            "sweep runs over Gaussian spectra; set spectrum.kind = \"gaussian\"",
        ));
    }
    let rows = bound_comparison_sweep(
        &cfg.geometry()?,
        cfg.spectrum.omega_bar,
        ratios,
        &cfg.prior()?,
        &cfg.quadrature(),
        cfg.monte_carlo(),
    )?;
    let headers = [
        "ratio",
        "h_quadrature_bits",
        "h_quadrature_err_bits",
        "h_mc_bits",
        "h_mc_se_bits",
        "h_max_bits",
        "ratio_to_bound",
    ]
    .map(String::from)
    .to_vec();
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            [
                r.ratio,
                r.h_quadrature_bits,
                r.h_quadrature_err_bits,
                r.h_mc_bits,
                r.h_mc_se_bits,
                r.h_max_bits,
                r.ratio_to_bound,
            ]
            .map(Cell::Num)
            .to_vec()
        })
        .collect();
    let rows_json: Vec<Value> = table
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = headers
                .iter()
                .zip(row)
                .map(|(h, c)| match c {
                    Cell::Num(x) => (h.clone(), num(*x)),
                    _ => unreachable!(),
                })
                .collect();
            Value::Object(obj)
        })
        .collect();
    Ok(Report {
        json: json!({
            "omega_bar": num(cfg.spectrum.omega_bar),
            "samples": cfg.estimator.samples,
            "seed": cfg.estimator.seed,
            "rows": rows_json,
        }),
        headers,
        rows: table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["sagnac-fidelity"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn physics_freq_record() {
        let (code, out, _) = call(&[
            "physics",
            "freq",
            "--area",
            "1",
            "--perimeter",
            "4",
            "--omega-bar",
            "2.976e15",
            "--rotation",
            "7.292e-5",
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        let x = v["value"].as_f64().unwrap();
        assert!(((x - 723.867_176_138_233_6) / x).abs() < 1e-12);
        assert_eq!(v["inputs"]["omega_bar"].as_f64(), Some(2.976e15));
    }

    #[test]
    fn missing_flag_is_a_usage_error() {
        let (code, out, err) = call(&["physics", "freq", "--area", "1", "--perimeter", "4", "--rotation", "1"]);
        assert_eq!(code, 2);
        assert!(out.is_empty());
        assert!(err.contains("--omega-bar"));
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-1,1,3", 1.0).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_grid("0,1,1", 1.0).unwrap_err().code, 2);
        assert_eq!(parse_grid("0,2,5", 1.0).unwrap_err().code, 2);
        assert_eq!(parse_grid("0,1", 1.0).unwrap_err().code, 2);
    }

    #[test]
    fn closed_form_through_config_flags() {
        let (code, out, _) = call(&[
            "fidelity",
            "--estimator.method",
            "closed",
            "--spectrum.omega-bar",
            "1e8",
            "--spectrum.sigma-omega",
            "1",
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!((v["value_bits"].as_f64().unwrap() - 12.985_512_107_403_61).abs() < 1e-10);
    }

    #[test]
    fn inconsistent_shift_exits_3_with_error_field() {
        let (code, out, _) = call(&[
            "posterior",
            "--spectrum.kind",
            "monochromatic",
            "--delta-omega",
            "1e12",
            "--grid",
            "-1,1,3",
        ]);
        assert_eq!(code, 3);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["error"].as_str().unwrap().contains("outside"));
    }
}
