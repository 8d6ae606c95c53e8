//! Direct propagation of the three-level non-Hermitian Hamiltonian, used to
//! check the adiabatically eliminated two-level model.
//!
//! Amplitudes obey dψ/dt = −iHψ with H (in rad/s, ħ stripped) acting on the
//! ordered basis |1⟩, |2⟩, |3⟩. Population leaves only through level 3, so
//! d(p1 + p2 + p3)/dt = −Γ·p3.

use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::continuous::populations;
use crate::error::{Error, Result};
use crate::params::{reduce_to_effective, ComplexAmplitude, ThreeLevelParams};
use crate::quadrature::{integrate, QuadOptions};

/// RK4 steps allowed for a single interval before giving up.
pub const MAX_STEPS: u64 = 1 << 40;

/// Steps per shortest oscillation period 2π/Λ.
pub const STEPS_PER_PERIOD: f64 = 40.0;

type C3 = Matrix3<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian3 {
    m: C3,
}

/// H/ħ for the given parameters:
///
/// ```text
/// [ 0     ω/2    0              ]
/// [ ω/2   −δ₀    Ω/2            ]
/// [ 0     Ω/2    −iΓ/2 − (Δ+δ₀) ]
/// ```
pub fn build_hamiltonian(p: &ThreeLevelParams) -> Hamiltonian3 {
    let c = |x: f64| Complex64::new(x, 0.0);
    let half_w = c(p.omega / 2.0);
    let half_c = c(p.coupling / 2.0);
    let m = C3::new(
        c(0.0),
        half_w,
        c(0.0),
        half_w,
        c(-p.delta0),
        half_c,
        c(0.0),
        half_c,
        Complex64::new(-p.delta_tilde(), -p.decay / 2.0),
    );
    Hamiltonian3 { m }
}

impl Hamiltonian3 {
    /// Wraps an arbitrary generator; rejects non-finite entries and any gain.
    pub fn from_matrix(m: C3) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParams("non-finite Hamiltonian entry".into()));
        }
        let h = Hamiltonian3 { m };
        if !h.is_dissipative() {
            return Err(Error::InvalidParams(
                "Hamiltonian has an amplifying (positive) anti-Hermitian part".into(),
            ));
        }
        Ok(h)
    }

    pub fn matrix(&self) -> &C3 {
        &self.m
    }

    /// Eigenvalues of (H − H†)/2i, ascending. All are ≤ 0 for a physical H.
    pub fn anti_hermitian_spectrum(&self) -> Vector3<f64> {
        let k = (self.m - self.m.adjoint()) * Complex64::new(0.0, -0.5);
        let mut ev = k.symmetric_eigenvalues();
        ev.as_mut_slice().sort_by(f64::total_cmp);
        ev
    }

    pub fn is_dissipative(&self) -> bool {
        let scale = self.m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.anti_hermitian_spectrum()[2] <= 1e-12 * scale
    }

    /// Complex eigenvalues of H. Decay rates of the amplitude modes are −Im λ.
    pub fn eigenvalues(&self) -> [Complex64; 3] {
        match self.m.eigenvalues() {
            Some(v) => [v[0], v[1], v[2]],
            None => {
                // Schur failed to converge: fall back to the Gershgorin disc radius.
                let r = self.gershgorin_radius();
                [Complex64::new(r, 0.0); 3]
            }
        }
    }

    fn gershgorin_radius(&self) -> f64 {
        (0..3)
            .map(|i| (0..3).map(|j| self.m[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Λ = max(|λ|, Γ), the fastest rate the integrator must resolve.
    pub fn fastest_rate(&self) -> f64 {
        let decay = -2.0 * self.m[(2, 2)].im;
        self.eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(decay, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector3(pub [ComplexAmplitude; 3]);

impl StateVector3 {
    /// All population in |1⟩.
    pub fn ground() -> Self {
        let z = Complex64::new(0.0, 0.0);
        StateVector3([Complex64::new(1.0, 0.0), z, z])
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.0[0].norm_sqr(), self.0[1].norm_sqr(), self.0[2].norm_sqr()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.populations().iter().sum()
    }

    fn to_vector(self) -> Vector3<Complex64> {
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }

    fn from_vector(v: Vector3<Complex64>) -> Self {
        StateVector3([v[0], v[1], v[2]])
    }
}

/// Fixed-step RK4 for the constant generator −iH.
///
/// For a linear autonomous system one RK4 step of size h is multiplication by
/// the degree-4 Taylor polynomial of e^{−iHh}; n equal steps are therefore
/// its n-th power, formed by repeated squaring. Time is measured internally
/// in units of 1/Λ so that the stiff ratio Γ/ω does not reach the step logic.
#[derive(Debug, Clone, Copy)]
pub struct Propagator {
    generator: C3,
    scale: f64,
    max_step: f64,
}

impl Propagator {
    pub fn new(h: &Hamiltonian3) -> Self {
        Self::with_steps_per_period(h, STEPS_PER_PERIOD)
    }

    /// Same integrator with `per_period` steps per 2π/Λ; doubling it halves h.
    pub fn with_steps_per_period(h: &Hamiltonian3, per_period: f64) -> Self {
        let scale = h.fastest_rate();
        let scale = if scale > 0.0 { scale } else { 1.0 };
        Propagator {
            generator: h.m * Complex64::new(0.0, -1.0 / scale),
            scale,
            max_step: 2.0 * std::f64::consts::PI / per_period,
        }
    }

    /// Step size in seconds.
    pub fn step(&self) -> f64 {
        self.max_step / self.scale
    }

    fn steps_for(&self, dt: f64) -> Result<u64> {
        let n = (dt * self.scale / self.max_step).ceil().max(1.0);
        if !(n <= MAX_STEPS as f64) {
            return Err(Error::StepUnderflow { steps: n });
        }
        Ok(n as u64)
    }

    /// The matrix mapping ψ(t) to ψ(t + dt).
    pub fn interval_matrix(&self, dt: f64) -> Result<C3> {
        if dt == 0.0 {
            return Ok(C3::identity());
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParams(format!("time step {dt} must be > 0")));
        }
        let n = self.steps_for(dt)?;
        let x = self.generator * Complex64::new(dt * self.scale / n as f64, 0.0);
        let id = C3::identity();
        let c = |v: f64| Complex64::new(v, 0.0);
        let one_step = id + x * (id + x * c(0.5) * (id + x * c(1.0 / 3.0) * (id + x * c(0.25))));
        Ok(matrix_power(one_step, n))
    }

    pub fn advance(&self, psi: &StateVector3, dt: f64) -> Result<StateVector3> {
        Ok(StateVector3::from_vector(self.interval_matrix(dt)? * psi.to_vector()))
    }
}

fn matrix_power(mut base: C3, mut n: u64) -> C3 {
    let mut acc = C3::identity();
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        n >>= 1;
        if n > 0 {
            base *= base;
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory3 {
    pub times: Vec<f64>,
    pub states: Vec<StateVector3>,
    /// Largest population change at any grid point when h is halved.
    pub halving_deviation: f64,
}

impl Trajectory3 {
    pub fn populations(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.states.iter().map(|s| s.populations())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,p1,p2,p3,p_tot")?;
        for (t, [p1, p2, p3]) in self.times.iter().zip(self.populations()) {
            writeln!(out, "{},{},{},{},{}", t, p1, p2, p3, p1 + p2 + p3)?;
        }
        Ok(())
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => return Err(Error::InvalidParams("empty time grid".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::InvalidParams(format!("time grid must start at 0, not {t0}")))
        }
        _ => {}
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidParams("time grid must be strictly increasing".into()));
    }
    Ok(())
}

fn run(prop: &Propagator, psi0: &StateVector3, t_grid: &[f64]) -> Result<Vec<StateVector3>> {
    let mut states = Vec::with_capacity(t_grid.len());
    let mut psi = *psi0;
    states.push(psi);
    let mut cached: Option<(f64, C3)> = None;
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        let m = match cached {
            Some((d, m)) if d == dt => m,
            _ => {
                let m = prop.interval_matrix(dt)?;
                cached = Some((dt, m));
                m
            }
        };
        psi = StateVector3::from_vector(m * psi.to_vector());
        states.push(psi);
    }
    Ok(states)
}

/// Integrates from `psi0` at t = 0 and reports each grid point, together with
/// the step-halving deviation.
pub fn propagate(h: &Hamiltonian3, psi0: &StateVector3, t_grid: &[f64]) -> Result<Trajectory3> {
    check_grid(t_grid)?;
    let coarse = run(&Propagator::new(h), psi0, t_grid)?;
    let fine = run(
        &Propagator::with_steps_per_period(h, 2.0 * STEPS_PER_PERIOD),
        psi0,
        t_grid,
    )?;
    let halving_deviation = coarse
        .iter()
        .zip(&fine)
        .flat_map(|(a, b)| {
            let (pa, pb) = (a.populations(), b.populations());
            (0..3).map(move |i| (pa[i] - pb[i]).abs())
        })
        .fold(0.0, f64::max);
    Ok(Trajectory3 {
        times: t_grid.to_vec(),
        states: coarse,
        halving_deviation,
    })
}

/// Panels allowed before the lifetime integral is abandoned.
const MAX_PANELS: usize = 100_000;
/// p_tot level at which the exponential tail takes over.
const TAIL_START: f64 = 1e-8;

/// τ₃ = ∫₀^∞ t·Γ·p3(t) dt for a start in |1⟩: the mean time of the
/// irreversible emission from level 3.
///
/// The integral runs over geometrically widening panels until p_tot < 1e-8.
/// The rest is closed with p_tot(T)·(T + 1/k), where k is the decay rate of
/// p_tot fitted over its last decade.
pub fn lifetime_three_level(p: &ThreeLevelParams) -> Result<f64> {
    p.validate()?;
    if !(p.decay > 0.0) {
        return Err(Error::NeverDetected("no decay from level 3 (Gamma = 0)"));
    }
    if p.coupling == 0.0 {
        return Err(Error::NeverDetected("level 3 is not coupled (Omega = 0)"));
    }
    let h = build_hamiltonian(p);
    let prop = Propagator::new(&h);
    let s = prop.scale;

    // Amplitude decay rates and frequencies in scaled units.
    let modes: Vec<(f64, f64)> = h
        .eigenvalues()
        .iter()
        .map(|z| (-z.im / s, z.re / s))
        .collect();
    let slow = modes.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    if !(slow > 1e-15) {
        return Err(Error::NeverDetected("a non-decaying state is populated"));
    }
    let pop_rate = 2.0 * slow;
    let cap = |a: f64| -> f64 {
        let mut cap = 1.0 / pop_rate;
        for (i, mi) in modes.iter().enumerate() {
            for mj in &modes[i + 1..] {
                let alive = (mi.0 - slow) * a < 40.0 && (mj.0 - slow) * a < 40.0;
                let beat = (mi.1 - mj.1).abs();
                if alive && beat > 0.0 {
                    cap = cap.min(0.5 * std::f64::consts::PI / beat);
                }
            }
        }
        cap
    };

    let gamma_scaled = p.decay / s;
    let mut psi = StateVector3::ground();
    let mut a = 0.0;
    let mut width: f64 = 0.25;
    let mut total = 0.0;
    let mut history = vec![(0.0, 1.0)];
    for _ in 0..MAX_PANELS {
        width = width.min(cap(a));
        let start = psi;
        let origin = a;
        let density = |x: f64| match prop.advance(&start, x / s) {
            Ok(v) => (origin + x) * gamma_scaled * v.populations()[2],
            Err(_) => f64::NAN,
        };
        let opts = QuadOptions {
            abs_tol: 1e-12 * total,
            rel_tol: 1e-10,
            max_subdivisions: 200,
        };
        total += integrate(density, 0.0, width, &opts)?.value;
        psi = prop.advance(&psi, width / s)?;
        a += width;
        let p_tot = psi.norm_sqr();
        history.push((a, p_tot));
        if p_tot < TAIL_START {
            let &(a0, p0) = history
                .iter()
                .rev()
                .find(|(_, q)| *q >= 10.0 * p_tot)
                .unwrap_or(&history[0]);
            let k = (p0 / p_tot).ln() / (a - a0);
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::Quadrature(format!("tail decay rate {k} is not positive")));
            }
            total += p_tot * (a + 1.0 / k);
            return Ok(total / s);
        }
        width *= 2.0;
    }
    Err(Error::Quadrature(format!(
        "p_tot still above {TAIL_START:e} after {MAX_PANELS} panels"
    )))
}

/// Largest population differences between the three-level and effective
/// models over a time grid, starting from |1⟩.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModelComparison {
    pub max_dp1: f64,
    pub max_dp2: f64,
    /// Step-halving deviation of the three-level trajectory.
    pub integrator_error: f64,
}

pub fn compare_models(p: &ThreeLevelParams, t_grid: &[f64]) -> Result<ModelComparison> {
    let e = reduce_to_effective(p)?;
    let traj = propagate(&build_hamiltonian(p), &StateVector3::ground(), t_grid)?;
    let mut cmp = ModelComparison {
        max_dp1: 0.0,
        max_dp2: 0.0,
        integrator_error: traj.halving_deviation,
    };
    for (&t, [p1, p2, _]) in traj.times.iter().zip(traj.populations()) {
        let (q1, q2) = populations(&e, t);
        cmp.max_dp1 = cmp.max_dp1.max((p1 - q1).abs());
        cmp.max_dp2 = cmp.max_dp2.max((p2 - q2).abs());
    }
    Ok(cmp)
}
