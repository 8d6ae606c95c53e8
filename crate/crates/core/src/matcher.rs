//! Pulse interval δt for which the pulsed mean detection time equals the
//! continuous lifetime τ_c, plus the 1-2 detuning calibration that cancels
//! the effective detuning δ.

use serde::{Deserialize, Serialize};

use crate::continuous::lifetime_continuous;
use crate::error::{Error, Result};
use crate::params::EffectiveParams;
use crate::pulsed::{excitation_probability, excitation_probability_derivative, PulseScheme};
use crate::roots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMethod {
    Approx,
    Newton,
}

/// How P2′(δt) enters the Newton step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMode {
    /// Short-time form δt·ω²/2.
    #[default]
    Approximate,
    /// Closed-form derivative of P2.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub delta_t: f64,
    pub iterations: usize,
    /// |⟨t⟩ − τ_c| / τ_c at `delta_t`.
    pub residual: f64,
    pub tau_c: f64,
    pub mean_t: f64,
    pub method: MatchMethod,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub derivative: DerivativeMode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 50,
            derivative: DerivativeMode::Approximate,
        }
    }
}

/// First positive root of tan(u) = 2u; sin²(u)/u peaks there.
const PEAK_PHASE: f64 = 1.165_561_185_207_211_2;

fn scheme(e: &EffectiveParams, delta_t: f64) -> Result<PulseScheme> {
    PulseScheme::new(delta_t, e.delta0, e.omega)
}

fn p2(e: &EffectiveParams, delta_t: f64) -> Result<f64> {
    Ok(excitation_probability(&scheme(e, delta_t)?))
}

/// δt = 4γ/(2ω² + γ² + 4δ²), from equating τ_c with δt/P2 at P2 ≈ δt²ω²/4.
pub fn pulse_interval_approx(e: &EffectiveParams) -> f64 {
    let w2 = e.omega * e.omega;
    4.0 * e.gamma / (2.0 * w2 + e.gamma * e.gamma + 4.0 * e.delta * e.delta)
}

/// |δt/P2(δt) − τ_c| / τ_c.
pub fn match_residual(e: &EffectiveParams, delta_t: f64) -> Result<f64> {
    let tau_c = lifetime_continuous(e)?;
    let mean_t = delta_t / p2(e, delta_t)?;
    Ok(((mean_t - tau_c) / tau_c).abs())
}

/// One Newton step on P2(δt) − δt/τ_c = 0 from `delta_t0`:
/// δt = [P2 − δt₀P2′] / [τ_c⁻¹ − P2′].
pub fn newton_step(e: &EffectiveParams, delta_t0: f64, mode: DerivativeMode) -> Result<f64> {
    let tau_c = lifetime_continuous(e)?;
    let s = scheme(e, delta_t0)?;
    let p = excitation_probability(&s);
    let dp = match mode {
        DerivativeMode::Approximate => delta_t0 * e.omega * e.omega / 2.0,
        DerivativeMode::Exact => excitation_probability_derivative(&s),
    };
    let inv_tau = 1.0 / tau_c;
    let denom = inv_tau - dp;
    if denom.abs() <= 1e-14 * inv_tau {
        return Err(Error::SingularStep { delta_t0 });
    }
    Ok((p - delta_t0 * dp) / denom)
}

/// The first `n` plain Newton iterates from `seed` (no safeguarding).
pub fn newton_iterates(
    e: &EffectiveParams,
    seed: f64,
    n: usize,
    mode: DerivativeMode,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut x = seed;
    for _ in 0..n {
        x = newton_step(e, x, mode)?;
        out.push(x);
    }
    Ok(out)
}

fn finish(e: &EffectiveParams, delta_t: f64, iterations: usize, method: MatchMethod) -> Result<MatchResult> {
    let tau_c = lifetime_continuous(e)?;
    let mean_t = delta_t / p2(e, delta_t)?;
    Ok(MatchResult {
        delta_t,
        iterations,
        residual: ((mean_t - tau_c) / tau_c).abs(),
        tau_c,
        mean_t,
        method,
    })
}

/// The short-time approximation packaged as a [`MatchResult`].
pub fn match_approx(e: &EffectiveParams) -> Result<MatchResult> {
    lifetime_continuous(e)?;
    finish(e, pulse_interval_approx(e), 0, MatchMethod::Approx)
}

/// Solves δt = τ_c·P2(δt) for its smallest positive root.
///
/// Newton steps start from the approximate interval. The root is bracketed
/// by (0, δt_peak], where δt_peak maximizes P2(δt)/δt; a step that leaves the
/// bracket is replaced by bisection. Convergence is judged on the residual
/// |⟨t⟩ − τ_c|/τ_c.
pub fn solve_pulse_interval(e: &EffectiveParams, opts: &SolveOptions) -> Result<MatchResult> {
    let tau_c = lifetime_continuous(e)?;
    let rabi = e.omega.hypot(e.delta0);
    let f = |x: f64| -> Result<f64> { Ok(x - tau_c * p2(e, x)?) };

    let mut hi = 2.0 * PEAK_PHASE / rabi;
    if f(hi)? > 0.0 {
        return Err(Error::NoPulseInterval {
            tau_c,
            max_ratio: p2(e, hi)? / hi,
        });
    }
    // f(x) ≈ x(1 − τ_c ω² x / 4) > 0 for small x.
    let mut lo = (1.0 / (tau_c * e.omega * e.omega)).min(0.5 * hi);
    while f(lo)? <= 0.0 {
        lo *= 0.5;
    }

    let seed = pulse_interval_approx(e);
    let mut x = if seed > lo && seed < hi { seed } else { 0.5 * (lo + hi) };
    let mut best = (x, f64::INFINITY);
    let mut last_width = hi - lo;
    for iterations in 0..=opts.max_iter {
        let residual = match_residual(e, x)?;
        if residual < best.1 {
            best = (x, residual);
        }
        if residual < opts.tol {
            return finish(e, x, iterations, MatchMethod::Newton);
        }
        if iterations == opts.max_iter {
            break;
        }
        if f(x)? > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // The approximate-derivative step converges only linearly where P2 has
        // left its short-time regime; when the bracket stalls, take an
        // exact-derivative step, and bisect if that leaves the bracket too.
        let width = hi - lo;
        let inside = |v: f64| v > lo && v < hi;
        let next = newton_step(e, x, opts.derivative)?;
        x = if inside(next) && width < 0.5 * last_width {
            next
        } else {
            match newton_step(e, x, DerivativeMode::Exact) {
                Ok(exact) if inside(exact) => exact,
                _ => 0.5 * (lo + hi),
            }
        };
        last_width = width;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        best: best.0,
        residual: best.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationMode {
    /// δ₀ ≈ ΔΩ²/(4Δ² + Γ²), i.e. Δ̃ ≈ Δ.
    Approx,
    /// Root of 4δ₀(Δ+δ₀)² + δ₀Γ² − (Δ+δ₀)Ω² = 0 nearest the approximation.
    Exact,
}

/// 1-2 detuning δ₀ that makes the effective detuning δ vanish.
pub fn calibrate_delta0(
    coupling_detuning: f64,
    coupling: f64,
    decay: f64,
    mode: CalibrationMode,
) -> Result<f64> {
    if !(decay > 0.0) || !(coupling >= 0.0) || !coupling_detuning.is_finite() {
        return Err(Error::InvalidParams(format!(
            "calibration needs Gamma > 0 and Omega >= 0 (Gamma = {decay}, Omega = {coupling})"
        )));
    }
    let approx = coupling_detuning * coupling * coupling
        / (4.0 * coupling_detuning * coupling_detuning + decay * decay);
    if mode == CalibrationMode::Approx || coupling == 0.0 {
        return Ok(approx);
    }

    // Scaled units keep the cubic's coefficients O(1).
    let scale = decay.max(coupling_detuning.abs()).max(coupling);
    let d = coupling_detuning / scale;
    let w2 = (coupling / scale).powi(2);
    let g2 = (decay / scale).powi(2);
    let cubic = |x: f64| 4.0 * x * (d + x) * (d + x) + x * g2 - (d + x) * w2;
    let slope = |x: f64| 4.0 * (d + x) * (d + x) + 8.0 * x * (d + x) + g2 - w2;

    let a = approx / scale;
    let limit = d.abs() + coupling / scale + 1.0;
    let mut half = 0.5 * a.abs() + 1e-12;
    loop {
        let (lo, hi) = (a - half, a + half);
        if cubic(lo).signum() != cubic(hi).signum() || cubic(lo) == 0.0 || cubic(hi) == 0.0 {
            let root = roots::newton_bisect(cubic, slope, lo, hi, a, 1e-15, 200)?;
            return Ok(root * scale);
        }
        if half > limit {
            return Err(Error::NoBracket {
                lo: lo * scale,
                hi: hi * scale,
            });
        }
        half *= 4.0;
    }
}
