//! Continuous measurement: the effective two-level atom decaying from level 2
//! at rate γ, its detection-time statistics, and the weak/strong coupling
//! pairs that share a lifetime.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{ComplexAmplitude, EffectiveParams};
use crate::quadrature::{self, QuadOptions};
use crate::roots;

/// |z| below which sinh(z)/z is replaced by its Taylor series.
const SINHC_SERIES_LIMIT: f64 = 1e-4;

fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < SINHC_SERIES_LIMIT {
        let z2 = z * z;
        1.0 + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// Ground and excited amplitudes at time `t` for a start in |1⟩.
pub fn amplitudes(e: &EffectiveParams, t: f64) -> (ComplexAmplitude, ComplexAmplitude) {
    amplitudes_on_branch(e, e.root, t)
}

/// Same as [`amplitudes`] with an explicit choice of the root `r` (either sign).
pub(crate) fn amplitudes_on_branch(
    e: &EffectiveParams,
    r: Complex64,
    t: f64,
) -> (ComplexAmplitude, ComplexAmplitude) {
    let i = Complex64::i();
    let z = r * (t / 2.0);
    let g = e.gamma0 * (t / 4.0);
    if z.norm() < 1.0 {
        // ψ1 = e^{-g}[cosh z + g·sinhc z],  ψ2 = −iω e^{-g} (t/2) sinhc z
        let envelope = (-g).exp();
        let s = sinhc(z);
        let psi1 = envelope * (z.cosh() + g * s);
        let psi2 = -i * e.omega * envelope * (t / 2.0) * s;
        (psi1, psi2)
    } else {
        // Split into the two eigenmodes so that no factor overflows at large t.
        let plus = (z - g).exp();
        let minus = (-z - g).exp();
        let psi1 = 0.5 * (plus + minus) + e.gamma0 / (4.0 * r) * (plus - minus);
        let psi2 = -i * e.omega / (2.0 * r) * (plus - minus);
        (psi1, psi2)
    }
}

/// (p1, p2) at time `t`.
pub fn populations(e: &EffectiveParams, t: f64) -> (f64, f64) {
    let (a1, a2) = amplitudes(e, t);
    (a1.norm_sqr(), a2.norm_sqr())
}

/// Detection probability per unit time, W(t) = γ·p2(t).
pub fn detection_rate(e: &EffectiveParams, t: f64) -> f64 {
    e.gamma * amplitudes(e, t).1.norm_sqr()
}

/// τ_c = 2/γ + γ/ω² + 4δ²/(γω²) for explicit (ω, γ, δ).
pub fn tau_c(omega: f64, gamma: f64, delta: f64) -> f64 {
    let w2 = omega * omega;
    2.0 / gamma + gamma / w2 + 4.0 * delta * delta / (gamma * w2)
}

/// Mean time before detection under continuous measurement.
pub fn lifetime_continuous(e: &EffectiveParams) -> Result<f64> {
    if e.gamma <= 0.0 {
        return Err(Error::NeverDetected("gamma = 0: no decay channel"));
    }
    Ok(tau_c(e.omega, e.gamma, e.delta))
}

/// Decay rate of the slowest population mode and the population beat
/// frequency, both from the eigenvalues −γ₀/4 ± R/2.
fn mode_rates(e: &EffectiveParams) -> (f64, f64) {
    let slow = e.gamma / 2.0 - e.root.re.abs();
    (slow, e.root.im.abs())
}

/// ∫₀^∞ t·W(t) dt by adaptive quadrature, independent of the closed form.
///
/// The half-line is covered by consecutive panels whose width grows
/// geometrically but never exceeds a quarter beat period while the
/// oscillating cross term is alive, nor the slow-mode decay time. Integration
/// stops once p_tot(T)·(T + 1/slow) drops below 1e-12 of the running result.
pub fn lifetime_quadrature_oracle(e: &EffectiveParams) -> Result<f64> {
    lifetime_quadrature_with(e, 1e-12, 1_000_000)
}

pub fn lifetime_quadrature_with(e: &EffectiveParams, tail_tol: f64, max_panels: usize) -> Result<f64> {
    if e.gamma <= 0.0 {
        return Err(Error::NeverDetected("gamma = 0: no decay channel"));
    }
    let (slow, beat) = mode_rates(e);
    if !(slow > 0.0) {
        return Err(Error::Quadrature(format!("slowest mode does not decay (rate {slow:e})")));
    }
    let fast = e.gamma / 2.0 + e.root.re.abs();
    let split = e.root.re.abs();
    let quarter_beat = if beat > 0.0 {
        std::f64::consts::FRAC_PI_2 / beat
    } else {
        f64::INFINITY
    };
    let slow_time = 1.0 / slow;

    let integrand = |t: f64| t * detection_rate(e, t);
    let mut width = (0.5 / fast).min(quarter_beat).min(slow_time);
    let mut a = 0.0;
    let mut total = 0.0;
    for _ in 0..max_panels {
        // The cross term decays relative to the slow mode as e^{-|Re R| t}.
        let oscillating = split * a < 40.0;
        let cap = if oscillating { quarter_beat.min(slow_time) } else { slow_time };
        width = width.min(cap);
        let b = a + width;
        let opts = QuadOptions {
            abs_tol: 1e-12 * total,
            rel_tol: 1e-11,
            max_subdivisions: 200,
        };
        total += quadrature::integrate(integrand, a, b, &opts)?.value;
        let (p1, p2) = populations(e, b);
        let remaining = (p1 + p2) * (b + slow_time);
        if remaining < tail_tol * total {
            return Ok(total);
        }
        a = b;
        width *= 2.0;
    }
    Err(Error::Quadrature(format!(
        "tail not below {tail_tol:e} after {max_panels} panels (T = {a:e})"
    )))
}

/// γ minimizing τ_c at fixed ω and δ: ω·√(2 + 4(δ/ω)²).
pub fn gamma_at_minimum(omega: f64, delta: f64) -> f64 {
    let r = delta / omega;
    omega * (2.0 + 4.0 * r * r).sqrt()
}

/// Two decay rates on either side of the minimum with the same lifetime.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GammaPair {
    pub gamma_weak: f64,
    pub gamma_strong: f64,
    pub target_tau: f64,
}

impl GammaPair {
    pub fn is_degenerate(&self) -> bool {
        self.gamma_weak == self.gamma_strong
    }
}

/// Relative distance from the minimum lifetime treated as "at the minimum".
const DEGENERATE_TOL: f64 = 1e-10;

/// Solves τ_c(γ) = `target_tau` on both monotone branches by bisection.
pub fn find_gamma_pair(omega: f64, delta: f64, target_tau: f64) -> Result<GammaPair> {
    if !(omega > 0.0) || !target_tau.is_finite() || !delta.is_finite() {
        return Err(Error::InvalidParams(format!(
            "need omega > 0 and finite target (omega = {omega}, target = {target_tau})"
        )));
    }
    let g_min = gamma_at_minimum(omega, delta);
    let tau_min = tau_c(omega, g_min, delta);
    if (target_tau - tau_min).abs() <= DEGENERATE_TOL * tau_min {
        return Ok(GammaPair {
            gamma_weak: g_min,
            gamma_strong: g_min,
            target_tau,
        });
    }
    if target_tau < tau_min {
        return Err(Error::NoSolution {
            target: target_tau,
            minimum: tau_min,
        });
    }
    let f = |g: f64| tau_c(omega, g, delta) - target_tau;

    let weak = roots::bisect(f, 1e-12 * omega, g_min, 1e-16, 400)?;

    let mut hi = 2.0 * g_min;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoBracket { lo: g_min, hi });
        }
    }
    let strong = roots::bisect(f, g_min, hi, 1e-16, 400)?;

    for g in [weak, strong] {
        let residual = (f(g) / target_tau).abs();
        if residual >= 1e-10 {
            return Err(Error::NonConvergence {
                iterations: 400,
                best: g,
                residual,
            });
        }
    }
    Ok(GammaPair {
        gamma_weak: weak,
        gamma_strong: strong,
        target_tau,
    })
}

/// Populations and detection rate sampled on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTrace {
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub p_tot: Vec<f64>,
    pub w: Vec<f64>,
}

/// Minimum samples per population beat period.
pub const POINTS_PER_PERIOD: f64 = 40.0;

impl ContinuousTrace {
    /// Samples `[0, t_max]` with at least `min_points` points and at least 40
    /// points per beat period 2π/|Im R|.
    pub fn sample(e: &EffectiveParams, t_max: f64, min_points: usize) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidParams(format!("t_max = {t_max} must be > 0")));
        }
        let beat = e.root.im.abs();
        let periods = t_max * beat / (2.0 * std::f64::consts::PI);
        let n = min_points
            .max(2)
            .max((POINTS_PER_PERIOD * periods).ceil() as usize + 1);
        let times: Vec<f64> = (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect();
        Ok(Self::on_grid(e, &times))
    }

    pub fn on_grid(e: &EffectiveParams, times: &[f64]) -> Self {
        let mut trace = ContinuousTrace {
            times: times.to_vec(),
            p1: Vec::with_capacity(times.len()),
            p2: Vec::with_capacity(times.len()),
            p_tot: Vec::with_capacity(times.len()),
            w: Vec::with_capacity(times.len()),
        };
        for &t in times {
            let (p1, p2) = populations(e, t);
            trace.p1.push(p1);
            trace.p2.push(p2);
            trace.p_tot.push(p1 + p2);
            trace.w.push(e.gamma * p2);
        }
        trace
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,p1,p2,p_tot,W")?;
        for k in 0..self.times.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.times[k], self.p1[k], self.p2[k], self.p_tot[k], self.w[k]
            )?;
        }
        Ok(())
    }
}
