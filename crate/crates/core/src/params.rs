//! Physical parameters of the driven atom and the adiabatic elimination of the
//! fast-decaying third level.
//!
//! All frequencies and rates are angular (rad/s). Inputs quoted as `2π × Hz`
//! are converted with [`hertz_to_angular`] before they reach these types.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Level-population amplitude.
pub type ComplexAmplitude = Complex64;

/// Ω/Γ below which the elimination of level 3 is considered trustworthy.
pub const DEFAULT_ADIABATIC_THRESHOLD: f64 = 0.1;

pub fn hertz_to_angular(f: f64) -> f64 {
    2.0 * std::f64::consts::PI * f
}

/// The five inputs of the three-level model.
///
/// Serialized as a flat record with keys `omega`, `Omega`, `Gamma`, `Delta`
/// and `delta0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeLevelParams {
    /// Rabi frequency ω of the 1-2 driving laser.
    pub omega: f64,
    /// Rabi frequency Ω of the 2-3 coupling laser.
    #[serde(rename = "Omega")]
    pub coupling: f64,
    /// Decay rate Γ of level 3.
    #[serde(rename = "Gamma")]
    pub decay: f64,
    /// Detuning Δ of the 2-3 laser.
    #[serde(rename = "Delta")]
    pub coupling_detuning: f64,
    /// Detuning δ₀ of the 1-2 laser.
    pub delta0: f64,
}

impl ThreeLevelParams {
    pub fn new(
        omega: f64,
        coupling: f64,
        decay: f64,
        coupling_detuning: f64,
        delta0: f64,
    ) -> Result<Self> {
        let p = ThreeLevelParams {
            omega,
            coupling,
            decay,
            coupling_detuning,
            delta0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds the parameters from the saturation parameter s₀ = 2Ω²/Γ².
    pub fn from_saturation(
        omega: f64,
        s0: f64,
        decay: f64,
        coupling_detuning: f64,
        delta0: f64,
    ) -> Result<Self> {
        if !(s0 >= 0.0) {
            return Err(Error::InvalidParams(format!("saturation s0 = {s0} must be >= 0")));
        }
        Self::new(omega, decay * (s0 / 2.0).sqrt(), decay, coupling_detuning, delta0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega,
            self.coupling,
            self.decay,
            self.coupling_detuning,
            self.delta0,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega = {} must be > 0",
                self.omega
            )));
        }
        if self.coupling < 0.0 || self.decay < 0.0 {
            return Err(Error::InvalidParams(
                "Omega and Gamma must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Δ̃ = Δ + δ₀.
    pub fn delta_tilde(&self) -> f64 {
        self.coupling_detuning + self.delta0
    }

    /// s₀ = 2Ω²/Γ².
    pub fn saturation(&self) -> f64 {
        2.0 * self.coupling * self.coupling / (self.decay * self.decay)
    }

    /// Ω/Γ; infinite when Γ = 0 and Ω > 0.
    pub fn coupling_ratio(&self) -> f64 {
        if self.coupling == 0.0 {
            0.0
        } else {
            self.coupling / self.decay
        }
    }

    /// Advisory only: nothing refuses to run when this is false.
    pub fn adiabatic_elimination_valid(&self, threshold: f64) -> bool {
        self.coupling_ratio() < threshold
    }
}

/// Effective two-level quantities after eliminating level 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// Driving Rabi frequency ω.
    pub omega: f64,
    /// Effective decay rate γ of level 2.
    pub gamma: f64,
    /// Effective (light-shifted) 1-2 detuning δ.
    pub delta: f64,
    /// Bare 1-2 detuning δ₀, used for free evolution between pulses.
    pub delta0: f64,
    /// Δ̃ = Δ + δ₀; `None` when the parameters were given directly as a
    /// two-level model.
    pub delta_tilde: Option<f64>,
    /// γ₀ = γ − 2iδ.
    pub gamma0: Complex64,
    /// R = (γ₀² − 4ω²)^{1/2} / 2, principal branch.
    pub root: Complex64,
    /// Zeno time τ_Z = 2/ω.
    pub tau_z: f64,
}

impl EffectiveParams {
    /// Effective model given directly by its two-level quantities.
    pub fn new(omega: f64, gamma: f64, delta: f64, delta0: f64) -> Result<Self> {
        if !(omega.is_finite() && gamma.is_finite() && delta.is_finite() && delta0.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if omega <= 0.0 {
            return Err(Error::InvalidParams(format!("omega = {omega} must be > 0")));
        }
        if gamma < 0.0 {
            return Err(Error::InvalidParams(format!("gamma = {gamma} must be >= 0")));
        }
        Ok(Self::assemble(omega, gamma, delta, delta0, None))
    }

    fn assemble(omega: f64, gamma: f64, delta: f64, delta0: f64, delta_tilde: Option<f64>) -> Self {
        let gamma0 = Complex64::new(gamma, -2.0 * delta);
        let mut e = EffectiveParams {
            omega,
            gamma,
            delta,
            delta0,
            delta_tilde,
            gamma0,
            root: Complex64::new(0.0, 0.0),
            tau_z: 2.0 / omega,
        };
        e.root = complex_root_r(&e);
        e
    }

    /// Same model with a different effective decay rate.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.omega, gamma, self.delta, self.delta0)
    }
}

/// Eliminates level 3, giving γ = ΓΩ²/(Γ² + 4Δ̃²) and
/// δ = δ₀ − Δ̃Ω²/(4Δ̃² + Γ²).
pub fn reduce_to_effective(p: &ThreeLevelParams) -> Result<EffectiveParams> {
    p.validate()?;
    let dt = p.delta_tilde();
    let omega2 = p.coupling * p.coupling;
    let denom = p.decay * p.decay + 4.0 * dt * dt;
    let (gamma, delta) = if omega2 == 0.0 {
        (0.0, p.delta0)
    } else if denom == 0.0 {
        return Err(Error::InvalidReduction);
    } else {
        (p.decay * omega2 / denom, p.delta0 - dt * omega2 / denom)
    };
    Ok(EffectiveParams::assemble(
        p.omega,
        gamma,
        delta,
        p.delta0,
        Some(dt),
    ))
}

/// Principal branch of R = (γ₀² − 4ω²)^{1/2}/2. Everything downstream is even
/// in R, so the branch is irrelevant.
pub fn complex_root_r(e: &EffectiveParams) -> Complex64 {
    let w2 = 4.0 * e.omega * e.omega;
    (e.gamma0 * e.gamma0 - w2).sqrt() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn on_resonance_limit() {
        let p = ThreeLevelParams::new(1.0, 1.0, 10.0, 0.0, 0.0).unwrap();
        let e = reduce_to_effective(&p).unwrap();
        assert!(close(e.gamma, 0.1, 1e-15));
        assert_eq!(e.delta, 0.0);
        assert_eq!(e.delta_tilde, Some(0.0));
        assert_eq!(e.tau_z, 2.0);
    }

    #[test]
    fn no_coupling_laser() {
        let p = ThreeLevelParams::new(1.0, 0.0, 10.0, 5.0, 2.0).unwrap();
        let e = reduce_to_effective(&p).unwrap();
        assert_eq!(e.gamma, 0.0);
        assert_eq!(e.delta, 2.0);
    }

    #[test]
    fn experimental_parameters_by_substitution() {
        // Rewritten in terms of s0 and Δ/Γ: γ = (s0/2) Γ / (1 + 4(Δ/Γ)²).
        let gamma_big = hertz_to_angular(1.74e6);
        let delta_big = hertz_to_angular(3.18e6);
        let s0 = 0.001;
        let p = ThreeLevelParams::from_saturation(hertz_to_angular(48.5), s0, gamma_big, delta_big, 0.0)
            .unwrap();
        let e = reduce_to_effective(&p).unwrap();
        let ratio = delta_big / gamma_big;
        let expected = 0.5 * s0 * gamma_big / (1.0 + 4.0 * ratio * ratio);
        assert!(close(e.gamma, expected, 1e-13), "{} vs {}", e.gamma, expected);
        // 40-digit evaluation of ΓΩ²/(Γ² + 4Δ²)
        let reference = 380.658_954_517_188_7;
        assert!((e.gamma - reference).abs() < 1e-12 * reference, "{}", e.gamma);
    }

    #[test]
    fn undefined_reduction() {
        let p = ThreeLevelParams::new(1.0, 1.0, 0.0, 2.0, -2.0).unwrap();
        assert!(matches!(reduce_to_effective(&p), Err(Error::InvalidReduction)));
        // Γ = 0 with Δ̃ ≠ 0 is fine: pure light shift, no decay.
        let p = ThreeLevelParams::new(1.0, 1.0, 0.0, 2.0, 0.0).unwrap();
        let e = reduce_to_effective(&p).unwrap();
        assert_eq!(e.gamma, 0.0);
        assert!(close(e.delta, -2.0 / 16.0, 1e-15));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(ThreeLevelParams::new(0.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(ThreeLevelParams::new(1.0, -1.0, 1.0, 0.0, 0.0).is_err());
        assert!(ThreeLevelParams::new(1.0, 1.0, -1.0, 0.0, 0.0).is_err());
        assert!(ThreeLevelParams::new(1.0, f64::NAN, 1.0, 0.0, 0.0).is_err());
        assert!(EffectiveParams::new(1.0, -0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn root_examples() {
        let e = EffectiveParams::new(1.0, 0.0, 0.0, 0.0).unwrap();
        // ±i; the sign of zero in γ₀ picks the side of the branch cut
        assert!((e.root.im.abs() - 1.0).abs() < 1e-15 && e.root.re == 0.0);
        let e = EffectiveParams::new(1.0, 4.0, 0.0, 0.0).unwrap();
        assert!((e.root - Complex64::new(3f64.sqrt(), 0.0)).norm() < 1e-15);
        let e = EffectiveParams::new(1.0, 2.0, 0.0, 0.0).unwrap();
        assert_eq!(e.root.norm(), 0.0);
    }

    #[test]
    fn gamma0_components() {
        let e = EffectiveParams::new(2.0, 0.7, -1.3, 0.0).unwrap();
        assert_eq!(e.gamma0.re, 0.7);
        assert_eq!(e.gamma0.im, 2.6);
        let lhs = e.root * e.root;
        let rhs = (e.gamma0 * e.gamma0 - 4.0 * e.omega * e.omega) / 4.0;
        assert!((lhs - rhs).norm() < 1e-14 * rhs.norm().max(1.0));
    }

    #[test]
    fn gamma_increases_with_coupling() {
        let mut last = 0.0;
        for i in 1..200 {
            let coupling = 0.05 * i as f64;
            let p = ThreeLevelParams::new(1.0, coupling, 3.0, 0.4, -0.1).unwrap();
            let g = reduce_to_effective(&p).unwrap().gamma;
            assert!(g > last);
            last = g;
        }
    }

    #[test]
    fn removing_coupling_restores_bare_detuning() {
        for &(d, d0) in &[(3.0, -1.0), (0.0, 2.5), (-7.0, 0.3)] {
            let mut p = ThreeLevelParams::new(1.0, 2.0, 5.0, d, d0).unwrap();
            p.coupling = 0.0;
            assert_eq!(reduce_to_effective(&p).unwrap().delta, d0);
        }
    }

    #[test]
    fn advisory_flag() {
        let p = ThreeLevelParams::new(1.0, 0.5, 10.0, 0.0, 0.0).unwrap();
        assert!(p.adiabatic_elimination_valid(DEFAULT_ADIABATIC_THRESHOLD));
        let p = ThreeLevelParams::new(1.0, 5.0, 10.0, 0.0, 0.0).unwrap();
        assert!(!p.adiabatic_elimination_valid(DEFAULT_ADIABATIC_THRESHOLD));
        assert!((p.saturation() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn json_keys() {
        let p = ThreeLevelParams::new(1.0, 2.0, 3.0, 4.0, 5.0).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"omega":1.0,"Omega":2.0,"Gamma":3.0,"Delta":4.0,"delta0":5.0}"#);
        let back: ThreeLevelParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
