//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! PASS/FAIL lines are always printed; exits non-zero if any criterion fails.

use std::panic;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use zeno::continuous::{
    find_gamma_pair, gamma_at_minimum, lifetime_continuous, lifetime_quadrature_oracle, tau_c,
};
use zeno::matcher::{
    calibrate_delta0, newton_iterates, pulse_interval_approx, solve_pulse_interval, CalibrationMode,
    DerivativeMode, SolveOptions,
};
use zeno::params::{hertz_to_angular, reduce_to_effective, EffectiveParams, ThreeLevelParams};
use zeno::pulsed::{excitation_probability, geometric_series_oracle, mean_detection_time, PulseScheme};
use zeno::sweep::{run_preset, DeltaSign, Preset};
use zeno::three_level::{compare_models, lifetime_three_level};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    outcome(
        o.pass && in_time,
        format!("{}; {:.2} s (limit {} s)", o.detail, elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn eff(omega: f64, gamma: f64, delta: f64, delta0: f64) -> EffectiveParams {
    EffectiveParams::new(omega, gamma, delta, delta0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn lifetime_vs_quadrature() -> Outcome {
    timed(Duration::from_secs(10), || {
        let mut rng = StdRng::seed_from_u64(1);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let g = 10f64.powf(rng.random_range(-2.0..2.0));
            let d = rng.random_range(0.0..5.0);
            let e = eff(1.0, g, d, d);
            let closed = lifetime_continuous(&e).unwrap();
            let quad = lifetime_quadrature_oracle(&e).unwrap();
            worst = worst.max(rel(quad, closed));
        }
        outcome(worst < 1e-8, format!("1000 draws, max rel err {worst:.2e} (< 1e-8)"))
    })
}

fn pulsed_mean_vs_series() -> Outcome {
    timed(Duration::from_secs(5), || {
        let mut rng = StdRng::seed_from_u64(2);
        let mut worst = 0.0f64;
        let mut accepted = 0;
        while accepted < 1000 {
            let omega = 10f64.powf(rng.random_range(-1.0..1.0));
            let delta0 = omega * rng.random_range(0.0..5.0);
            let period = 2.0 * std::f64::consts::PI / omega.hypot(delta0);
            let s = PulseScheme::new(period * rng.random_range(0.0..1.0), delta0, omega).unwrap();
            if excitation_probability(&s) <= 1e-6 {
                continue;
            }
            accepted += 1;
            let closed = mean_detection_time(&s).unwrap();
            let series = geometric_series_oracle(&s, 1e-14).unwrap();
            worst = worst.max(rel(series, closed));
        }
        outcome(worst < 1e-9, format!("1000 schemes, max rel err {worst:.2e} (< 1e-9)"))
    })
}

fn schulman_limit() -> Outcome {
    timed(Duration::from_secs(1), || {
        let mut pass = true;
        let mut parts = Vec::new();
        for (g, bound) in [(20.0, 0.01), (50.0, 0.0016), (100.0, 0.0004)] {
            let e = eff(1.0, g, 0.0, 0.0);
            let dev = rel(pulse_interval_approx(&e), 4.0 / g);
            let r = solve_pulse_interval(&e, &SolveOptions::default()).unwrap();
            pass &= dev < bound && r.residual < 1e-10;
            parts.push(format!("γ={g}: {dev:.2e} (< {bound}), residual {:.1e}", r.residual));
        }
        outcome(pass, parts.join("; "))
    })
}

fn three_iterations() -> Outcome {
    timed(Duration::from_secs(1), || {
        let mut worst = 0.0f64;
        for k in 0..50 {
            let g = 0.5 + 19.5 * k as f64 / 49.0;
            let e = eff(1.0, g, 3.0, 3.0);
            let its = newton_iterates(&e, pulse_interval_approx(&e), 3, DerivativeMode::Approximate).unwrap();
            let mean = mean_detection_time(&PulseScheme::new(its[2], 3.0, 1.0).unwrap()).unwrap();
            worst = worst.max(rel(mean, lifetime_continuous(&e).unwrap()));
        }
        outcome(worst < 0.005, format!("50 points, worst |<t> - tau_c|/tau_c = {worst:.3e} (< 5e-3)"))
    })
}

/// Golden-section search on ln γ.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while (b - a).abs() > 1e-12 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

fn minimum_location() -> Outcome {
    timed(Duration::from_secs(1), || {
        let mut worst = 0.0f64;
        for d in [0.0, 1.0, 3.0] {
            let x = golden_min(|lg| tau_c(1.0, lg.exp(), d), (1e-3f64).ln(), (1e3f64).ln());
            worst = worst.max(rel(x.exp(), gamma_at_minimum(1.0, d)));
        }
        outcome(worst < 1e-6, format!("δ/ω ∈ {{0,1,3}}, max rel err {worst:.2e} (< 1e-6)"))
    })
}

fn gamma_duality() -> Outcome {
    timed(Duration::from_secs(1), || {
        let pair = find_gamma_pair(1.0, 0.0, 3.0).unwrap();
        let err = (pair.gamma_weak - 1.0).abs().max((pair.gamma_strong - 2.0).abs());
        outcome(
            err < 1e-9,
            format!("pair = ({}, {}), max err {err:.1e} (< 1e-9)", pair.gamma_weak, pair.gamma_strong),
        )
    })
}

fn model_agreement() -> Outcome {
    timed(Duration::from_secs(60), || {
        let omega = hertz_to_angular(48.5);
        let decay = hertz_to_angular(1.74e6);
        let mut worst_tau = 0.0f64;
        let mut worst_pop = 0.0f64;
        for big_delta in [0.0, hertz_to_angular(3.18e6)] {
            for s0 in [1e-4, 1e-3, 1e-2] {
                let mut p = ThreeLevelParams::from_saturation(omega, s0, decay, big_delta, 0.0).unwrap();
                p.delta0 = calibrate_delta0(big_delta, p.coupling, decay, CalibrationMode::Exact).unwrap();
                let e = reduce_to_effective(&p).unwrap();
                let tc = lifetime_continuous(&e).unwrap();
                worst_tau = worst_tau.max(rel(lifetime_three_level(&p).unwrap(), tc));
                let grid: Vec<f64> = (0..2001).map(|k| 5.0 * tc * k as f64 / 2000.0).collect();
                let cmp = compare_models(&p, &grid).unwrap();
                worst_pop = worst_pop.max(cmp.max_dp1).max(cmp.max_dp2);
            }
        }
        outcome(
            worst_tau < 0.01 && worst_pop < 0.01,
            format!("max |tau_3/tau_c - 1| = {worst_tau:.2e} (< 1e-2), max population gap {worst_pop:.2e} (< 1e-2)"),
        )
    })
}

fn short_time_independence() -> Outcome {
    timed(Duration::from_secs(1), || {
        let omega = 1.0;
        let dt = 1e-3 * 2.0 / omega;
        let mut parts = Vec::new();
        let mut pass = true;
        for d0 in [0.0, 1.0, 10.0] {
            let p2 = excitation_probability(&PulseScheme::new(dt, d0, omega).unwrap());
            let dev = rel(dt * dt * omega * omega / 4.0, p2);
            pass &= dev < 1e-5;
            parts.push(format!("δ₀/ω={d0}: {dev:.2e}"));
        }
        outcome(pass, format!("{} (each < 1e-5)", parts.join(", ")))
    })
}

fn calibration_residual() -> Outcome {
    timed(Duration::from_secs(1), || {
        let omega = hertz_to_angular(48.5);
        let decay = hertz_to_angular(1.74e6);
        let mut worst_delta = 0.0f64;
        let mut worst_agree = 0.0f64;
        for big_delta in [hertz_to_angular(3.18e6), -20e6] {
            for k in 0..41 {
                let s0 = 10f64.powf(-5.0 + 4.0 * k as f64 / 40.0);
                let coupling = decay * (s0 / 2.0).sqrt();
                let exact = calibrate_delta0(big_delta, coupling, decay, CalibrationMode::Exact).unwrap();
                let p = ThreeLevelParams::new(omega, coupling, decay, big_delta, exact).unwrap();
                let e = reduce_to_effective(&p).unwrap();
                let scale = exact.abs().max(coupling * coupling / decay);
                worst_delta = worst_delta.max(e.delta.abs() / scale);
                if s0 <= 0.01 * (1.0 + 1e-12) {
                    let approx = calibrate_delta0(big_delta, coupling, decay, CalibrationMode::Approx).unwrap();
                    worst_agree = worst_agree.max(rel(approx, exact));
                }
            }
        }
        outcome(
            worst_delta < 1e-10 && worst_agree < 1e-3,
            format!("max scaled |δ| = {worst_delta:.2e} (< 1e-10), approx vs exact {worst_agree:.2e} (< 1e-3)"),
        )
    })
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for preset in Preset::ALL {
        let mut files = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{}-{run}.csv", preset.name()));
            let table = run_preset(preset, DeltaSign::Positive).unwrap();
            table.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
            files.push(std::fs::read(&path).unwrap());
        }
        if files[0] != files[1] {
            differing.push(preset.name());
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} presets run twice, differing: {:?}", Preset::ALL.len(), differing),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("lifetime closed form vs quadrature", lifetime_vs_quadrature),
        ("pulsed mean vs geometric series", pulsed_mean_vs_series),
        ("strong-coupling limit dt = 4/gamma", schulman_limit),
        ("three Newton iterations suffice", three_iterations),
        ("location of the lifetime minimum", minimum_location),
        ("two-gamma duality", gamma_duality),
        ("three-level vs effective model", model_agreement),
        ("short-time detuning independence", short_time_independence),
        ("calibration residual", calibration_residual),
        ("preset determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] AC-{} {name}: {}", k + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
