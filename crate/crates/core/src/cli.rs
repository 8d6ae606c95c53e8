//! Command-line front end. [`dispatch`] parses arguments, runs one command
//! and returns the process exit status:
//! 0 success, 2 invalid arguments, 3 solver failure, 4 never detected.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use crate::continuous::{find_gamma_pair, gamma_at_minimum, lifetime_continuous};
use crate::error::{Error, Result};
use crate::matcher::{match_approx, solve_pulse_interval, CalibrationMode, DerivativeMode, SolveOptions};
use crate::params::{
    hertz_to_angular, reduce_to_effective, EffectiveParams, ThreeLevelParams,
    DEFAULT_ADIABATIC_THRESHOLD,
};
use crate::pulsed::{effective_pulsed_lifetime, excitation_probability, mean_detection_time, PulseScheme};
use crate::sweep::{
    read_metadata, replay, run_preset, run_sweep, DeltaSign, EffectiveInput, FixedParams, Format,
    Preset, SweepRange, SweepSpec, SweepTable, SweepVariable,
};
use crate::three_level::lifetime_three_level;

#[derive(Debug, Parser)]
#[command(name = "zeno", version, about = "Detection times of a driven two-level atom under continuous and pulsed measurement")]
pub struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; point queries default to json, tables to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Units of frequency-valued flags. Hertz values are multiplied by 2π.
    /// Times are always in seconds.
    #[arg(long, global = true, value_enum, default_value_t = Units::Angular)]
    units: Units,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Units {
    Angular,
    Hertz,
}

impl Units {
    fn rate(self, x: f64) -> f64 {
        match self {
            Units::Angular => x,
            Units::Hertz => hertz_to_angular(x),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Continuous-measurement lifetime τ_c.
    #[command(allow_negative_numbers = true)]
    Continuous {
        #[command(flatten)]
        model: ModelArgs,
        /// Also integrate the three-level dynamics for its lifetime.
        #[arg(long)]
        three_level_lifetime: bool,
    },
    /// Excitation probability and mean detection time for pulsed measurement.
    #[command(allow_negative_numbers = true)]
    Pulsed {
        #[arg(long)]
        omega: f64,
        #[arg(long, default_value_t = 0.0)]
        delta0: f64,
        /// Interval between measurements (s).
        #[arg(long)]
        delta_t: f64,
    },
    /// Pulse interval whose mean detection time equals τ_c.
    #[command(name = "match", allow_negative_numbers = true)]
    Match {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Newton)]
        method: MethodArg,
        /// Tolerance on |⟨t⟩ − τ_c|/τ_c.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        /// Use dP2/dδt exactly instead of its short-time form in each step.
        #[arg(long)]
        exact_derivative: bool,
    },
    /// The weak and strong decay rates giving a target lifetime.
    #[command(name = "gamma-pair", allow_negative_numbers = true)]
    GammaPair {
        #[arg(long)]
        omega: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Target lifetime (s).
        #[arg(long)]
        tau: f64,
    },
    /// Population trace from a start in |1⟩ (two- or three-level).
    #[command(allow_negative_numbers = true)]
    Evolve {
        #[command(flatten)]
        model: ModelArgs,
        /// End of the time grid (s).
        #[arg(long)]
        t_max: f64,
        /// Minimum number of grid points.
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Sweep one variable, from a JSON config (or a previous output) or flags.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Data set behind one of the reference figures.
    Preset {
        /// fig2, fig3, fig4, fig5, fig6-solid or fig6-dashed.
        name: String,
        /// Side of the 2-3 resonance for fig6-dashed.
        #[arg(long, value_enum, default_value_t = SignArg::Positive)]
        delta_sign: SignArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Approx,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SignArg {
    /// Δ = +2π × 3.18 MHz.
    Positive,
    /// Δ = −20 × 10⁶ s⁻¹.
    Negative,
}

/// Either two-level (`--gamma`) or three-level (`--decay` with `--coupling`
/// or `--s0`) parameters.
#[derive(Debug, Clone, Args)]
struct ModelArgs {
    /// 1-2 Rabi frequency ω.
    #[arg(long)]
    omega: f64,
    /// Effective decay rate γ (two-level input).
    #[arg(long)]
    gamma: Option<f64>,
    /// Effective detuning δ (two-level input).
    #[arg(long)]
    delta: Option<f64>,
    /// 1-2 detuning δ₀; for two-level input defaults to δ.
    #[arg(long)]
    delta0: Option<f64>,
    /// 2-3 Rabi frequency Ω.
    #[arg(long, alias = "Omega")]
    coupling: Option<f64>,
    /// Saturation parameter s₀ = 2Ω²/Γ², in place of --coupling.
    #[arg(long)]
    s0: Option<f64>,
    /// Decay rate Γ of level 3.
    #[arg(long, alias = "Gamma")]
    decay: Option<f64>,
    /// 2-3 detuning Δ.
    #[arg(long, alias = "Delta", default_value_t = 0.0)]
    coupling_detuning: f64,
}

enum Model {
    Effective(EffectiveInput),
    ThreeLevel(ThreeLevelParams),
}

impl Model {
    fn effective(&self) -> Result<EffectiveParams> {
        match self {
            Model::Effective(e) => e.to_params(),
            Model::ThreeLevel(p) => reduce_to_effective(p),
        }
    }

    fn fixed(&self) -> FixedParams {
        match self {
            Model::Effective(e) => FixedParams::Effective(*e),
            Model::ThreeLevel(p) => FixedParams::ThreeLevel(*p),
        }
    }
}

impl ModelArgs {
    fn resolve(&self, units: Units) -> Result<Model> {
        let r = |x: f64| units.rate(x);
        let three_level = self.decay.is_some() || self.coupling.is_some() || self.s0.is_some();
        match (self.gamma, three_level) {
            (Some(_), true) => Err(Error::InvalidParams(
                "give either --gamma (two-level) or --decay with --coupling/--s0 (three-level), not both".into(),
            )),
            (Some(gamma), false) => {
                let delta = self.delta.unwrap_or(0.0);
                Ok(Model::Effective(EffectiveInput {
                    omega: r(self.omega),
                    gamma: r(gamma),
                    delta: r(delta),
                    delta0: self.delta0.map(r),
                }))
            }
            (None, true) => {
                if self.delta.is_some() {
                    return Err(Error::InvalidParams(
                        "--delta is derived for three-level input; set --delta0 and --coupling-detuning".into(),
                    ));
                }
                let decay = self
                    .decay
                    .ok_or_else(|| Error::InvalidParams("three-level input needs --decay".into()))?;
                let (omega, decay, big_delta) = (r(self.omega), r(decay), r(self.coupling_detuning));
                let delta0 = r(self.delta0.unwrap_or(0.0));
                let p = match (self.coupling, self.s0) {
                    (Some(c), None) => ThreeLevelParams::new(omega, r(c), decay, big_delta, delta0)?,
                    (None, Some(s0)) => ThreeLevelParams::from_saturation(omega, s0, decay, big_delta, delta0)?,
                    _ => {
                        return Err(Error::InvalidParams(
                            "three-level input needs exactly one of --coupling and --s0".into(),
                        ))
                    }
                };
                if !p.adiabatic_elimination_valid(DEFAULT_ADIABATIC_THRESHOLD) {
                    log::warn!(
                        "Omega/Gamma = {:.3} exceeds {}: the effective two-level model may be inaccurate",
                        p.coupling_ratio(),
                        DEFAULT_ADIABATIC_THRESHOLD
                    );
                }
                Ok(Model::ThreeLevel(p))
            }
            (None, false) => Err(Error::InvalidParams(
                "missing model parameters: give --gamma, or --decay with --coupling/--s0".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Args)]
struct SweepArgs {
    /// JSON sweep spec, or a table written by an earlier run (replayed).
    #[arg(long, conflicts_with_all = ["variable", "min", "max", "count", "outputs"])]
    config: Option<PathBuf>,
    /// gamma_over_omega, s0, delta_t or time.
    #[arg(long, required_unless_present = "config")]
    variable: Option<String>,
    #[arg(long, required_unless_present = "config")]
    min: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    max: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    count: Option<usize>,
    /// linear or log.
    #[arg(long, default_value = "linear")]
    spacing: String,
    /// Comma-separated: tau_c, mean_t, delta_t_approx, delta_t_exact,
    /// populations, gamma, delta, delta0, tau_3level.
    #[arg(long, value_delimiter = ',', required_unless_present = "config")]
    outputs: Vec<String>,
    /// For s0 sweeps: re-solve δ₀ at each point so that δ = 0 (approx or exact).
    #[arg(long)]
    calibrate: Option<String>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    delta0: Option<f64>,
    #[arg(long, alias = "Omega")]
    coupling: Option<f64>,
    #[arg(long, alias = "Gamma")]
    decay: Option<f64>,
    #[arg(long, alias = "Delta", default_value_t = 0.0)]
    coupling_detuning: f64,
}

/// Parses a bare name through the same serde names the config files use.
fn parse_name<T: DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_value(Value::String(s.trim().to_string()))
        .map_err(|_| Error::InvalidParams(format!("unknown {what} '{s}'")))
}

impl SweepArgs {
    fn spec(&self, units: Units) -> Result<SweepSpec> {
        let variable: SweepVariable = parse_name("sweep variable", self.variable.as_deref().unwrap_or(""))?;
        let omega = self
            .omega
            .ok_or_else(|| Error::InvalidParams("sweeps need --omega".into()))?;
        // γ is replaced point by point in a gamma_over_omega sweep.
        let gamma = match variable {
            SweepVariable::GammaOverOmega => Some(self.gamma.unwrap_or(0.0)),
            _ => self.gamma,
        };
        // Ω is replaced point by point in an s0 sweep.
        let coupling = match variable {
            SweepVariable::S0 => Some(self.coupling.unwrap_or(0.0)),
            _ => self.coupling,
        };
        let model = ModelArgs {
            omega,
            gamma,
            delta: self.delta,
            delta0: self.delta0,
            coupling,
            s0: None,
            decay: self.decay,
            coupling_detuning: self.coupling_detuning,
        }
        .resolve(units)?;
        let outputs = self
            .outputs
            .iter()
            .map(|s| parse_name("output", s))
            .collect::<Result<Vec<_>>>()?;
        let calibrate_delta0 = match &self.calibrate {
            Some(s) => Some(parse_name::<CalibrationMode>("calibration mode", s)?),
            None => None,
        };
        Ok(SweepSpec {
            variable,
            range: SweepRange {
                min: self.min.unwrap_or(f64::NAN),
                max: self.max.unwrap_or(f64::NAN),
                count: self.count.unwrap_or(0),
                spacing: parse_name("spacing", &self.spacing)?,
            },
            fixed: model.fixed(),
            outputs,
            calibrate_delta0,
        })
    }
}

/// Runs the command line `args` (including the program name).
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

enum Report {
    Point(Value),
    Table(SweepTable),
}

fn run(cli: &Cli) -> Result<()> {
    let report = execute(&cli.command, cli.units)?;
    let format = match (cli.format, &report) {
        (Some(FormatArg::Csv), _) | (None, Report::Table(_)) => Format::Csv,
        (Some(FormatArg::Json), _) | (None, Report::Point(_)) => Format::Json,
    };
    let sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match report {
        Report::Table(t) => t.write(&mut sink, format)?,
        Report::Point(v) => write_point(&mut sink, &v, format)?,
    }
    sink.flush()?;
    Ok(())
}

fn write_point<W: Write>(out: &mut W, v: &Value, format: Format) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, v)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let obj = v.as_object().cloned().unwrap_or_default();
            let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
            let vals: Vec<String> = obj
                .values()
                .map(|x| match x {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            writeln!(out, "{}", keys.join(","))?;
            writeln!(out, "{}", vals.join(","))?;
        }
    }
    Ok(())
}

fn execute(cmd: &Command, units: Units) -> Result<Report> {
    match cmd {
        Command::Continuous { model, three_level_lifetime } => {
            let model = model.resolve(units)?;
            let e = model.effective()?;
            let mut out = Map::new();
            out.insert("omega".into(), json!(e.omega));
            out.insert("gamma".into(), json!(e.gamma));
            out.insert("delta".into(), json!(e.delta));
            out.insert("delta0".into(), json!(e.delta0));
            out.insert("tau_c".into(), json!(lifetime_continuous(&e)?));
            out.insert("gamma_at_minimum".into(), json!(gamma_at_minimum(e.omega, e.delta)));
            if let Model::ThreeLevel(p) = &model {
                out.insert("delta_tilde".into(), json!(p.delta_tilde()));
                out.insert("s0".into(), json!(p.saturation()));
                out.insert(
                    "adiabatic_elimination_valid".into(),
                    json!(p.adiabatic_elimination_valid(DEFAULT_ADIABATIC_THRESHOLD)),
                );
                if *three_level_lifetime {
                    out.insert("tau_3level".into(), json!(lifetime_three_level(p)?));
                }
            } else if *three_level_lifetime {
                return Err(Error::InvalidParams(
                    "--three-level-lifetime needs three-level parameters".into(),
                ));
            }
            Ok(Report::Point(Value::Object(out)))
        }
        Command::Pulsed { omega, delta0, delta_t } => {
            let s = PulseScheme::new(*delta_t, units.rate(*delta0), units.rate(*omega))?;
            let mean_t = mean_detection_time(&s)?;
            Ok(Report::Point(json!({
                "omega": s.omega,
                "delta0": s.delta0,
                "delta_t": s.delta_t,
                "p2": excitation_probability(&s),
                "mean_t": mean_t,
                "tau_ep": effective_pulsed_lifetime(&s),
            })))
        }
        Command::Match { model, method, tol, max_iter, exact_derivative } => {
            let e = model.resolve(units)?.effective()?;
            let result = match method {
                MethodArg::Approx => match_approx(&e)?,
                MethodArg::Newton => {
                    if !(*tol > 0.0) {
                        return Err(Error::InvalidParams(format!("--tol {tol} must be > 0")));
                    }
                    let opts = SolveOptions {
                        tol: *tol,
                        max_iter: *max_iter,
                        derivative: if *exact_derivative {
                            DerivativeMode::Exact
                        } else {
                            DerivativeMode::Approximate
                        },
                    };
                    solve_pulse_interval(&e, &opts)?
                }
            };
            Ok(Report::Point(serde_json::to_value(result)?))
        }
        Command::GammaPair { omega, delta, tau } => {
            let pair = find_gamma_pair(units.rate(*omega), units.rate(*delta), *tau)?;
            Ok(Report::Point(serde_json::to_value(pair)?))
        }
        Command::Evolve { model, t_max, points } => {
            let model = model.resolve(units)?;
            let mut count = (*points).max(2);
            if let Model::Effective(_) = model {
                // Resolve every beat period of the two-level populations.
                let e = model.effective()?;
                let periods = t_max * e.root.im.abs() / (2.0 * std::f64::consts::PI);
                if periods.is_finite() {
                    count = count.max((40.0 * periods).ceil() as usize + 1);
                }
            }
            let spec = SweepSpec {
                variable: SweepVariable::Time,
                range: SweepRange {
                    min: 0.0,
                    max: *t_max,
                    count,
                    spacing: crate::sweep::Spacing::Linear,
                },
                fixed: model.fixed(),
                outputs: vec![crate::sweep::Output::Populations],
                calibrate_delta0: None,
            };
            Ok(Report::Table(run_sweep(&spec)?))
        }
        Command::Sweep(args) => match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                match read_metadata(&text) {
                    Ok(Some(meta)) => Ok(Report::Table(replay(&meta)?)),
                    _ => {
                        let spec: SweepSpec = serde_json::from_str(&text)
                            .map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))?;
                        Ok(Report::Table(run_sweep(&spec)?))
                    }
                }
            }
            None => Ok(Report::Table(run_sweep(&args.spec(units)?)?)),
        },
        Command::Preset { name, delta_sign } => {
            let preset: Preset = name.parse()?;
            let sign = match delta_sign {
                SignArg::Positive => DeltaSign::Positive,
                SignArg::Negative => DeltaSign::Negative,
            };
            Ok(Report::Table(run_preset(preset, sign)?))
        }
    }
}
