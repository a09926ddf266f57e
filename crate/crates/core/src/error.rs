use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Problem data failed structural validation.
    #[error("invalid problem data: {0}")]
    InvalidSpec(String),

    /// Grid construction or grid compatibility failed.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidInput(String),

    /// A cell average of the initial data left `[0, u_max]`.
    #[error("initial datum out of range in cell {cell}: value {value} not in [0, {u_max}]")]
    InitOutOfRange { cell: usize, value: f64, u_max: f64 },

    /// A state became non-finite during time stepping.
    #[error("non-finite value detected at step {step} (cell {cell})")]
    NanDetected { step: usize, cell: usize },

    /// Rusanov speed below the sampled Lipschitz constant of `f`.
    #[error("rusanov speed too small: given {given}, need at least {required}")]
    SpeedTooSmall { given: f64, required: f64 },

    /// `b` takes different values at states that `phi` cannot separate.
    #[error(
        "b does not factor through phi: b({s}) = {b_s} but b({t}) = {b_t} while phi({s}) = phi({t})"
    )]
    InconsistentB { s: f64, t: f64, b_s: f64, b_t: f64 },

    /// A viscous evaluation needs `beta` with `b = beta(phi)` but none is available.
    #[error("no usable beta: b does not factor through phi and no explicit beta was supplied")]
    NoBeta,

    /// Pseudo-time marching failed to reach the residual tolerance.
    #[error("no convergence after {iterations} iterations: residual {residual} > tol {tol}")]
    NoConvergence { iterations: u64, residual: f64, tol: f64 },

    /// A fixed time step exceeds the monotonicity bound.
    #[error("time step too large: dt {dt} exceeds the monotonicity bound {bound}")]
    TimeStepTooLarge { dt: f64, bound: f64 },

    /// Two records are not comparable (different grid, steps, flux or mode).
    #[error("records not comparable: {0}")]
    ConfigMismatch(String),

    /// Record metadata disagrees with the supplied flux.
    #[error("flux mismatch: record was produced with '{recorded}', got '{supplied}'")]
    FluxMismatch { recorded: String, supplied: String },

    /// An export failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
