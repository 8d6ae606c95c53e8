use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Γ = Δ̃ = 0 with a nonzero coupling: the elimination denominator vanishes.
    #[error("adiabatic elimination undefined: Gamma and Delta + delta0 are both zero with Omega > 0")]
    InvalidReduction,

    #[error("never detected: {0}")]
    NeverDetected(&'static str),

    #[error("no solution: target lifetime {target} is below the minimum {minimum}")]
    NoSolution { target: f64, minimum: f64 },

    #[error("no pulse interval reproduces tau_c = {tau_c}: max P2(dt)/dt = {max_ratio} < 1/tau_c")]
    NoPulseInterval { tau_c: f64, max_ratio: f64 },

    #[error("no convergence after {iterations} iterations (best {best}, residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        best: f64,
        residual: f64,
    },

    #[error("singular Newton step at delta_t0 = {delta_t0}")]
    SingularStep { delta_t0: f64 },

    #[error("no sign change bracketing a root in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("step size underflow: {steps:e} RK4 steps needed for one interval; rescale time units")]
    StepUnderflow { steps: f64 },

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NeverDetected(_) => 4,
            Error::NoSolution { .. }
            | Error::NoPulseInterval { .. }
            | Error::NonConvergence { .. }
            | Error::SingularStep { .. }
            | Error::NoBracket { .. }
            | Error::Quadrature(_)
            | Error::StepUnderflow { .. } => 3,
            Error::InvalidParams(_) | Error::InvalidReduction | Error::UnknownPreset(_) => 2,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
