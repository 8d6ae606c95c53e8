//! Parameter sweeps and the figure presets, emitted as self-describing tables.
//!
//! A table carries a metadata block (code version plus the preset request or
//! the full sweep spec) from which the identical table can be regenerated.
//! Points are evaluated in parallel and assembled in sweep order.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuous::{find_gamma_pair, lifetime_continuous, populations};
use crate::error::{Error, Result};
use crate::matcher::{
    calibrate_delta0, match_approx, newton_iterates, pulse_interval_approx, solve_pulse_interval,
    CalibrationMode, DerivativeMode, SolveOptions,
};
use crate::params::{hertz_to_angular, reduce_to_effective, EffectiveParams, ThreeLevelParams};
use crate::pulsed::{mean_detection_time, PulseScheme};
use crate::three_level::{build_hamiltonian, lifetime_three_level, propagate, StateVector3};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    GammaOverOmega,
    S0,
    DeltaT,
    Time,
}

impl SweepVariable {
    fn column(self) -> &'static str {
        match self {
            SweepVariable::GammaOverOmega => "gamma_over_omega",
            SweepVariable::S0 => "s0",
            SweepVariable::DeltaT => "delta_t",
            SweepVariable::Time => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl SweepRange {
    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidParams(format!("count = {} must be >= 2", self.count)));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidParams(format!(
                "range needs finite min < max (min = {}, max = {})",
                self.min, self.max
            )));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return Err(Error::InvalidParams("log spacing requires min > 0".into()));
        }
        Ok(())
    }

    /// Sample points; the endpoints are exact.
    pub fn points(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|k| {
                if k == 0 {
                    return self.min;
                }
                if k == last {
                    return self.max;
                }
                let f = k as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.min + f * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + f * (self.max / self.min).ln()).exp(),
                }
            })
            .collect()
    }
}

/// Two-level input; `delta0` defaults to `delta` (no light shift, Δ̃ = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveInput {
    pub omega: f64,
    pub gamma: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
}

impl EffectiveInput {
    pub fn to_params(&self) -> Result<EffectiveParams> {
        EffectiveParams::new(self.omega, self.gamma, self.delta, self.delta0.unwrap_or(self.delta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FixedParams {
    ThreeLevel(ThreeLevelParams),
    Effective(EffectiveInput),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    TauC,
    MeanT,
    DeltaTApprox,
    DeltaTExact,
    Populations,
    Gamma,
    Delta,
    Delta0,
    Tau3level,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub range: SweepRange,
    pub fixed: FixedParams,
    pub outputs: Vec<Output>,
    /// s0 sweeps only: re-solve δ₀ at each point so that δ = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate_delta0: Option<CalibrationMode>,
}

/// A table entry: a number, or a marker naming why there is none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Value(f64),
    Marker(String),
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(*v),
            Cell::Marker(_) => None,
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Value(v) => write!(f, "{v}"),
            Cell::Marker(m) => f.write_str(m),
        }
    }
}

/// Solver outcomes that become a marked cell instead of aborting the sweep.
fn marker(e: &Error) -> Option<&'static str> {
    match e {
        Error::NeverDetected(_) => Some("never-detected"),
        Error::NoPulseInterval { .. } => Some("no-pulse-interval"),
        Error::NoSolution { .. } => Some("no-solution"),
        Error::NonConvergence { .. } => Some("non-convergence"),
        Error::SingularStep { .. } => Some("singular-step"),
        _ => None,
    }
}

fn cell(r: Result<f64>) -> Result<Cell> {
    match r {
        Ok(v) if v.is_finite() => Ok(Cell::Value(v)),
        Ok(_) => Ok(Cell::Marker("non-finite".into())),
        Err(e) => match marker(&e) {
            Some(m) => Ok(Cell::Marker(m.into())),
            None => Err(e),
        },
    }
}

/// Which side of the 2-3 resonance the calibrated configuration uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaSign {
    /// Δ = +2π × 3.18 MHz.
    #[default]
    Positive,
    /// Δ = −20 × 10⁶ s⁻¹.
    Negative,
}

impl DeltaSign {
    pub fn coupling_detuning(self) -> f64 {
        match self {
            DeltaSign::Positive => hertz_to_angular(3.18e6),
            DeltaSign::Negative => -20e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "fig2")]
    Fig2,
    #[serde(rename = "fig3")]
    Fig3,
    #[serde(rename = "fig4")]
    Fig4,
    #[serde(rename = "fig5")]
    Fig5,
    #[serde(rename = "fig6-solid")]
    Fig6Solid,
    #[serde(rename = "fig6-dashed")]
    Fig6Dashed,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6Solid,
        Preset::Fig6Dashed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6Solid => "fig6-solid",
            Preset::Fig6Dashed => "fig6-dashed",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// What produced a table; enough to produce it again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Preset {
        name: Preset,
        delta_sign: DeltaSign,
    },
    Sweep {
        spec: SweepSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub source: Source,
    /// Physical inputs behind the table, for the reader's benefit.
    pub parameters: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].clone()).collect())
    }

    /// Numeric column; markers become NaN.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        Some(self.column(name)?.iter().map(|c| c.value().unwrap_or(f64::NAN)).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", serde_json::to_string(&self.metadata)?)?;
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut out: W, format: Format) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
                Ok(())
            }
        }
    }
}

/// Pulls the metadata block out of a previously written table (CSV or JSON).
pub fn read_metadata(text: &str) -> Result<Option<Metadata>> {
    if let Some(first) = text.lines().next() {
        if let Some(json) = first.strip_prefix('#') {
            return Ok(Some(serde_json::from_str(json.trim())?));
        }
    }
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("metadata") {
        Some(m) => Ok(Some(serde_json::from_value(m.clone())?)),
        None => Ok(None),
    }
}

/// Regenerates a table from its metadata.
pub fn replay(m: &Metadata) -> Result<SweepTable> {
    match &m.source {
        Source::Preset { name, delta_sign } => run_preset(*name, *delta_sign),
        Source::Sweep { spec } => run_sweep(spec),
    }
}

fn collect_rows<F>(xs: &[f64], f: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(f64) -> Result<Vec<Cell>> + Sync,
{
    xs.par_iter().map(|&x| f(x)).collect()
}

fn three_level_at_s0(base: &ThreeLevelParams, s0: f64, calibrate: Option<CalibrationMode>) -> Result<ThreeLevelParams> {
    let mut p = ThreeLevelParams::from_saturation(base.omega, s0, base.decay, base.coupling_detuning, base.delta0)?;
    if let Some(mode) = calibrate {
        p.delta0 = calibrate_delta0(p.coupling_detuning, p.coupling, p.decay, mode)?;
    }
    Ok(p)
}

/// ⟨t⟩ at the approximate pulse interval.
fn mean_at_approx(e: &EffectiveParams) -> Result<f64> {
    Ok(match_approx(e)?.mean_t)
}

fn scalar_outputs(
    outputs: &[Output],
    e: &Result<EffectiveParams>,
    three: Option<&ThreeLevelParams>,
    delta_t: Option<f64>,
) -> Result<Vec<Cell>> {
    let mut row = Vec::new();
    for out in outputs {
        let e = match e {
            Ok(e) => e,
            Err(err) => return Err(Error::InvalidParams(err.to_string())),
        };
        let v = match out {
            Output::TauC => cell(lifetime_continuous(e))?,
            Output::MeanT => match delta_t {
                Some(dt) => cell(PulseScheme::new(dt, e.delta0, e.omega).and_then(|s| mean_detection_time(&s)))?,
                None => cell(mean_at_approx(e))?,
            },
            Output::DeltaTApprox => cell(lifetime_continuous(e).map(|_| pulse_interval_approx(e)))?,
            Output::DeltaTExact => cell(solve_pulse_interval(e, &SolveOptions::default()).map(|r| r.delta_t))?,
            Output::Gamma => Cell::Value(e.gamma),
            Output::Delta => Cell::Value(e.delta),
            Output::Delta0 => Cell::Value(e.delta0),
            Output::Tau3level => match three {
                Some(p) => cell(lifetime_three_level(p))?,
                None => {
                    return Err(Error::InvalidParams(
                        "tau_3level needs three-level fixed parameters".into(),
                    ))
                }
            },
            Output::Populations => unreachable!("handled by the time sweep"),
        };
        row.push(v);
    }
    Ok(row)
}

fn output_columns(outputs: &[Output], three_level: bool) -> Vec<String> {
    let mut cols = Vec::new();
    for out in outputs {
        let names: &[&str] = match out {
            Output::TauC => &["tau_c"],
            Output::MeanT => &["mean_t"],
            Output::DeltaTApprox => &["delta_t_approx"],
            Output::DeltaTExact => &["delta_t_exact"],
            Output::Gamma => &["gamma"],
            Output::Delta => &["delta"],
            Output::Delta0 => &["delta0"],
            Output::Tau3level => &["tau_3level"],
            Output::Populations if three_level => &["p1", "p2", "p3", "p_tot"],
            Output::Populations => &["p1", "p2", "p_tot"],
        };
        cols.extend(names.iter().map(|s| s.to_string()));
    }
    cols
}

fn check_spec(spec: &SweepSpec) -> Result<()> {
    spec.range.validate()?;
    if spec.outputs.is_empty() {
        return Err(Error::InvalidParams("no outputs requested".into()));
    }
    let three = matches!(spec.fixed, FixedParams::ThreeLevel(_));
    let fail = |msg: &str| Err(Error::InvalidParams(msg.into()));
    match spec.variable {
        SweepVariable::GammaOverOmega | SweepVariable::DeltaT if three => {
            fail("gamma_over_omega and delta_t sweeps take effective (two-level) parameters")
        }
        SweepVariable::S0 if !three => fail("s0 sweeps take three-level parameters"),
        SweepVariable::Time if spec.range.min != 0.0 || spec.range.spacing != Spacing::Linear => {
            fail("time sweeps run on a linear grid starting at 0")
        }
        v if v != SweepVariable::Time && spec.outputs.contains(&Output::Populations) => {
            fail("populations are only available in time sweeps")
        }
        v if v != SweepVariable::S0 && spec.calibrate_delta0.is_some() => {
            fail("calibrate_delta0 applies to s0 sweeps only")
        }
        _ => Ok(()),
    }
}

fn parameters_json(fixed: &FixedParams) -> serde_json::Value {
    serde_json::to_value(fixed).unwrap_or(serde_json::Value::Null)
}

/// Runs a user-defined sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    check_spec(spec)?;
    if let FixedParams::ThreeLevel(p) = &spec.fixed {
        p.validate()?;
    }
    let xs = spec.range.points();
    let three = matches!(spec.fixed, FixedParams::ThreeLevel(_));
    let mut columns = vec![spec.variable.column().to_string()];
    columns.extend(output_columns(&spec.outputs, three));

    let rows = match (spec.variable, &spec.fixed) {
        (SweepVariable::GammaOverOmega, FixedParams::Effective(f)) => collect_rows(&xs, |x| {
            let e = EffectiveInput { gamma: x * f.omega, ..*f }.to_params();
            let mut row = vec![Cell::Value(x)];
            row.extend(scalar_outputs(&spec.outputs, &e, None, None)?);
            Ok(row)
        })?,
        (SweepVariable::DeltaT, FixedParams::Effective(f)) => {
            let e = f.to_params()?;
            collect_rows(&xs, |x| {
                let mut row = vec![Cell::Value(x)];
                row.extend(scalar_outputs(&spec.outputs, &Ok(e), None, Some(x))?);
                Ok(row)
            })?
        }
        (SweepVariable::S0, FixedParams::ThreeLevel(base)) => collect_rows(&xs, |x| {
            let p = three_level_at_s0(base, x, spec.calibrate_delta0)?;
            let e = reduce_to_effective(&p);
            let mut row = vec![Cell::Value(x)];
            row.extend(scalar_outputs(&spec.outputs, &e, Some(&p), None)?);
            Ok(row)
        })?,
        (SweepVariable::Time, fixed) => time_rows(&xs, fixed, &spec.outputs)?,
        _ => unreachable!("rejected by check_spec"),
    };
    Ok(SweepTable {
        metadata: Metadata {
            version: VERSION.to_string(),
            source: Source::Sweep { spec: spec.clone() },
            parameters: parameters_json(&spec.fixed),
        },
        columns,
        rows,
    })
}

fn time_rows(ts: &[f64], fixed: &FixedParams, outputs: &[Output]) -> Result<Vec<Vec<Cell>>> {
    // One trajectory covers the whole grid; other outputs are constant in t.
    let (pops, e, three): (Vec<Vec<f64>>, Result<EffectiveParams>, Option<ThreeLevelParams>) = match fixed {
        FixedParams::Effective(f) => {
            let e = f.to_params()?;
            let pops = ts
                .iter()
                .map(|&t| {
                    let (p1, p2) = populations(&e, t);
                    vec![p1, p2, p1 + p2]
                })
                .collect();
            (pops, Ok(e), None)
        }
        FixedParams::ThreeLevel(p) => {
            let traj = propagate(&build_hamiltonian(p), &StateVector3::ground(), ts)?;
            let pops = traj.populations().map(|[a, b, c]| vec![a, b, c, a + b + c]).collect();
            (pops, reduce_to_effective(p), Some(*p))
        }
    };
    let scalars: Vec<Output> = outputs.iter().copied().filter(|o| *o != Output::Populations).collect();
    let constant = scalar_outputs(&scalars, &e, three.as_ref(), None)?;
    let mut rows = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        let mut row = vec![Cell::Value(t)];
        let mut consts = constant.iter();
        for out in outputs {
            if *out == Output::Populations {
                row.extend(pops[k].iter().map(|&v| Cell::Value(v)));
            } else {
                row.push(consts.next().expect("one constant per scalar output").clone());
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

// Figure presets. Two-level presets use ω = 1, so times are in units of 1/ω.

const FIG2_DETUNINGS: [f64; 3] = [0.0, 1.0, 3.0];
const FIG3_COUPLINGS: [f64; 2] = [0.1, 20.0];
const FIG5_DETUNING: f64 = 3.0;
const FIG6_OMEGA_HZ: f64 = 48.5;
const FIG6_DECAY_HZ: f64 = 1.74e6;

fn eff_unit(gamma: f64, delta: f64) -> Result<EffectiveParams> {
    EffectiveParams::new(1.0, gamma, delta, delta)
}

fn log_range(min: f64, max: f64, count: usize) -> Vec<f64> {
    SweepRange { min, max, count, spacing: Spacing::Log }.points()
}

pub fn run_preset(preset: Preset, delta_sign: DeltaSign) -> Result<SweepTable> {
    let (columns, rows, parameters) = match preset {
        Preset::Fig2 => fig2()?,
        Preset::Fig3 => fig3()?,
        Preset::Fig4 => fig4()?,
        Preset::Fig5 => fig5()?,
        Preset::Fig6Solid => fig6(None)?,
        Preset::Fig6Dashed => fig6(Some(delta_sign))?,
    };
    Ok(SweepTable {
        metadata: Metadata {
            version: VERSION.to_string(),
            source: Source::Preset { name: preset, delta_sign },
            parameters,
        },
        columns,
        rows,
    })
}

type PresetOutput = (Vec<String>, Vec<Vec<Cell>>, serde_json::Value);

fn fig2() -> Result<PresetOutput> {
    let xs = log_range(0.01, 100.0, 201);
    let mut columns = vec!["gamma_over_omega".to_string()];
    columns.extend(FIG2_DETUNINGS.iter().map(|d| format!("tau_c_delta{d}")));
    let rows = collect_rows(&xs, |x| {
        let mut row = vec![Cell::Value(x)];
        for d in FIG2_DETUNINGS {
            row.push(cell(lifetime_continuous(&eff_unit(x, d)?))?);
        }
        Ok(row)
    })?;
    let minima: Vec<f64> = FIG2_DETUNINGS
        .iter()
        .map(|&d| crate::continuous::gamma_at_minimum(1.0, d))
        .collect();
    let params = serde_json::json!({
        "omega": 1.0,
        "delta_over_omega": FIG2_DETUNINGS,
        "gamma_at_minimum": minima,
        "detuning_set": "illustrative",
    });
    Ok((columns, rows, params))
}

fn fig3() -> Result<PresetOutput> {
    let ts: Vec<f64> = SweepRange { min: 0.0, max: 100.0, count: 2001, spacing: Spacing::Linear }.points();
    let weak = eff_unit(FIG3_COUPLINGS[0], 0.0)?;
    let strong = eff_unit(FIG3_COUPLINGS[1], 0.0)?;
    let columns = ["t", "p1_weak", "p2_weak", "p_tot_weak", "p1_strong", "p2_strong", "p_tot_strong"]
        .map(String::from)
        .to_vec();
    let rows = collect_rows(&ts, |t| {
        let (a1, a2) = populations(&weak, t);
        let (b1, b2) = populations(&strong, t);
        Ok([t, a1, a2, a1 + a2, b1, b2, b1 + b2].map(Cell::Value).to_vec())
    })?;
    let tau_weak = lifetime_continuous(&weak)?;
    let tau_strong = lifetime_continuous(&strong)?;
    let partner = find_gamma_pair(1.0, 0.0, tau_strong)?;
    let params = serde_json::json!({
        "omega": 1.0,
        "delta": 0.0,
        "gamma_over_omega": FIG3_COUPLINGS,
        "tau_c": [tau_weak, tau_strong],
        "gamma_pair_for_strong_tau_c": partner,
    });
    Ok((columns, rows, params))
}

fn fig4() -> Result<PresetOutput> {
    let xs = log_range(0.1, 100.0, 201);
    let mut columns = vec!["gamma_over_omega".to_string()];
    for d in FIG2_DETUNINGS {
        columns.push(format!("tau_c_delta{d}"));
        columns.push(format!("mean_t_delta{d}"));
    }
    let rows = collect_rows(&xs, |x| {
        let mut row = vec![Cell::Value(x)];
        for d in FIG2_DETUNINGS {
            let e = eff_unit(x, d)?;
            row.push(cell(lifetime_continuous(&e))?);
            row.push(cell(mean_at_approx(&e))?);
        }
        Ok(row)
    })?;
    let params = serde_json::json!({
        "omega": 1.0,
        "delta_over_omega": FIG2_DETUNINGS,
        "delta0": "equal to delta",
    });
    Ok((columns, rows, params))
}

fn fig5() -> Result<PresetOutput> {
    let xs = log_range(0.5, 20.0, 101);
    let columns = [
        "gamma_over_omega",
        "tau_c",
        "delta_t_seed",
        "mean_t_seed",
        "delta_t_iter1",
        "mean_t_iter1",
        "delta_t_iter3",
        "mean_t_iter3",
        "delta_t_exact",
        "mean_t_exact",
    ]
    .map(String::from)
    .to_vec();
    let rows = collect_rows(&xs, |x| {
        let e = eff_unit(x, FIG5_DETUNING)?;
        let mean = |dt: f64| cell(PulseScheme::new(dt, e.delta0, e.omega).and_then(|s| mean_detection_time(&s)));
        let seed = pulse_interval_approx(&e);
        let mut row = vec![Cell::Value(x), cell(lifetime_continuous(&e))?];
        row.push(Cell::Value(seed));
        row.push(mean(seed)?);
        match newton_iterates(&e, seed, 3, DerivativeMode::Approximate) {
            Ok(its) => {
                for dt in [its[0], its[2]] {
                    row.push(Cell::Value(dt));
                    row.push(mean(dt)?);
                }
            }
            Err(err) => {
                let c = cell(Err(err))?;
                row.extend(std::iter::repeat_n(c, 4));
            }
        }
        match solve_pulse_interval(&e, &SolveOptions::default()) {
            Ok(r) => {
                row.push(Cell::Value(r.delta_t));
                row.push(Cell::Value(r.mean_t));
            }
            Err(err) => {
                let c = cell(Err(err))?;
                row.extend(std::iter::repeat_n(c, 2));
            }
        }
        Ok(row)
    })?;
    let params = serde_json::json!({
        "omega": 1.0,
        "delta": FIG5_DETUNING,
        "delta0": FIG5_DETUNING,
        "derivative": "approximate",
    });
    Ok((columns, rows, params))
}

fn fig6(dashed: Option<DeltaSign>) -> Result<PresetOutput> {
    let omega = hertz_to_angular(FIG6_OMEGA_HZ);
    let decay = hertz_to_angular(FIG6_DECAY_HZ);
    let big_delta = dashed.map_or(0.0, DeltaSign::coupling_detuning);
    let base = ThreeLevelParams::new(omega, 0.0, decay, big_delta, 0.0)?;
    let calibrate = dashed.map(|_| CalibrationMode::Exact);
    let xs = log_range(1e-5, 1e-1, 41);
    let columns = [
        "s0",
        "Omega",
        "delta0",
        "delta0_approx",
        "gamma",
        "delta",
        "tau_c",
        "tau_strong_line",
        "tau_3level",
    ]
    .map(String::from)
    .to_vec();
    let rows = collect_rows(&xs, |s0| {
        let p = three_level_at_s0(&base, s0, calibrate)?;
        let approx = match dashed {
            Some(_) => calibrate_delta0(p.coupling_detuning, p.coupling, p.decay, CalibrationMode::Approx)?,
            None => 0.0,
        };
        let e = reduce_to_effective(&p)?;
        Ok(vec![
            Cell::Value(s0),
            Cell::Value(p.coupling),
            Cell::Value(p.delta0),
            Cell::Value(approx),
            Cell::Value(e.gamma),
            Cell::Value(e.delta),
            cell(lifetime_continuous(&e))?,
            Cell::Value(e.gamma / (omega * omega)),
            cell(lifetime_three_level(&p))?,
        ])
    })?;
    let params = serde_json::json!({
        "omega": omega,
        "Gamma": decay,
        "Delta": big_delta,
        "delta0": if dashed.is_some() { "calibrated so that delta = 0 (exact cubic)" } else { "0" },
        "strong_line": "gamma / omega^2",
    });
    Ok((columns, rows, params))
}
