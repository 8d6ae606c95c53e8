//! Pulsed measurement: free Rabi evolution at the bare detuning δ₀ between
//! instantaneous projections onto |1⟩ every δt.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Free evolution between projections. Uses the bare detuning δ₀, never the
/// light-shifted δ of the continuous model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseScheme {
    pub delta_t: f64,
    pub delta0: f64,
    pub omega: f64,
}

impl PulseScheme {
    pub fn new(delta_t: f64, delta0: f64, omega: f64) -> Result<Self> {
        if !(delta_t > 0.0) || !delta_t.is_finite() {
            return Err(Error::InvalidParams(format!("delta_t = {delta_t} must be > 0")));
        }
        if !(omega > 0.0) || !omega.is_finite() || !delta0.is_finite() {
            return Err(Error::InvalidParams(format!(
                "need omega > 0 and finite delta0 (omega = {omega}, delta0 = {delta0})"
            )));
        }
        Ok(PulseScheme { delta_t, delta0, omega })
    }

    /// Generalized Rabi frequency √(ω² + δ₀²).
    pub fn rabi(&self) -> f64 {
        self.omega.hypot(self.delta0)
    }

    /// Zeno time τ_Z = 2/ω.
    pub fn tau_z(&self) -> f64 {
        2.0 / self.omega
    }

    fn half_angle(&self) -> f64 {
        0.5 * self.delta_t * self.rabi()
    }
}

/// P2 = ω²/(ω² + δ₀²)·sin²(δt·√(ω² + δ₀²)/2).
pub fn excitation_probability(s: &PulseScheme) -> f64 {
    let rabi = s.rabi();
    let amp = s.omega / rabi;
    amp * amp * s.half_angle().sin().powi(2)
}

/// dP2/dδt = ω²/(2√(ω² + δ₀²))·sin(δt·√(ω² + δ₀²)).
pub fn excitation_probability_derivative(s: &PulseScheme) -> f64 {
    let rabi = s.rabi();
    s.omega * s.omega / (2.0 * rabi) * (s.delta_t * rabi).sin()
}

/// True when δt sits on a zero of sin(δt·√(ω²+δ₀²)/2) to within rounding, so
/// the atom is returned to |1⟩ at every pulse.
fn is_never_detected(s: &PulseScheme) -> bool {
    let theta = s.half_angle();
    theta.sin().abs() <= 8.0 * f64::EPSILON * theta.max(1.0)
}

/// Geometric distribution of the pulse index at which the atom is detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionDistribution {
    pub p2: f64,
    pub delta_t: f64,
}

impl DetectionDistribution {
    pub fn new(s: &PulseScheme) -> Self {
        DetectionDistribution {
            p2: excitation_probability(s),
            delta_t: s.delta_t,
        }
    }

    /// Probability of first detection at pulse `k` (k ≥ 1).
    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.p2 * survival_factor(self.p2, k - 1)
    }

    /// δt/P2; infinite when P2 = 0.
    pub fn mean_time(&self) -> f64 {
        self.delta_t / self.p2
    }
}

/// (1 − P2)^n, computed through log1p so that large n keeps full precision.
fn survival_factor(p2: f64, n: u64) -> f64 {
    if n == 0 {
        1.0
    } else if p2 >= 1.0 {
        0.0
    } else {
        (n as f64 * (-p2).ln_1p()).exp()
    }
}

/// Mean detection time ⟨t⟩ = δt/P2.
pub fn mean_detection_time(s: &PulseScheme) -> Result<f64> {
    if is_never_detected(s) {
        return Err(Error::NeverDetected("P2 = 0: the pulse interval is a full Rabi period"));
    }
    Ok(s.delta_t / excitation_probability(s))
}

/// Brute-force Σ_{k≥1} k·δt·P2·(1 − P2)^{k−1}, summed (compensated) until the
/// closed-form remainder δt·(1−P2)^K·(K·P2 + 1)/P2 is below
/// `tail_tol`·partial sum.
pub fn geometric_series_oracle(s: &PulseScheme, tail_tol: f64) -> Result<f64> {
    let p2 = excitation_probability(s);
    if !(p2 > 0.0) {
        return Err(Error::NeverDetected("P2 = 0"));
    }
    let dt = s.delta_t;
    let log_q = (-p2).ln_1p();
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    let mut k: u64 = 1;
    loop {
        let term = k as f64 * dt * p2 * survival_factor(p2, k - 1);
        // Neumaier summation
        let t = sum + term;
        if sum.abs() >= term.abs() {
            compensation += (sum - t) + term;
        } else {
            compensation += (term - t) + sum;
        }
        sum = t;
        let partial = sum + compensation;
        let tail = if p2 >= 1.0 {
            0.0
        } else {
            dt * (k as f64 * log_q).exp() * (k as f64 * p2 + 1.0) / p2
        };
        if tail < tail_tol * partial {
            return Ok(partial);
        }
        k += 1;
    }
}

/// Effective lifetime τ_EP = τ_Z²/δt of the exponential decay law reached
/// when δt ≪ τ_Z.
pub fn effective_pulsed_lifetime(s: &PulseScheme) -> f64 {
    let tau_z = s.tau_z();
    if s.delta_t > 0.5 * tau_z {
        log::warn!(
            "delta_t = {} exceeds tau_Z/2 = {}; the exponential law is a poor approximation",
            s.delta_t,
            0.5 * tau_z
        );
    }
    tau_z * tau_z / s.delta_t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub k: u64,
    pub t: f64,
    pub p1_exact: f64,
    pub p1_exponential: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    pub points: Vec<SurvivalPoint>,
}

/// Ground-state survival after each of the first `k_max` projections, next to
/// the exponential law exp(−t/τ_EP).
pub fn survival_curve(s: &PulseScheme, k_max: u64) -> Result<SurvivalCurve> {
    if k_max < 1 {
        return Err(Error::InvalidParams("k_max must be >= 1".into()));
    }
    let p2 = excitation_probability(s);
    let tau_ep = effective_pulsed_lifetime(s);
    let points = (1..=k_max)
        .map(|k| {
            let t = k as f64 * s.delta_t;
            SurvivalPoint {
                k,
                t,
                p1_exact: survival_factor(p2, k),
                p1_exponential: (-t / tau_ep).exp(),
            }
        })
        .collect();
    Ok(SurvivalCurve { points })
}

impl SurvivalCurve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,t,p1_exact,p1_exponential")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.k, p.t, p.p1_exact, p.p1_exponential)?;
        }
        Ok(())
    }
}
