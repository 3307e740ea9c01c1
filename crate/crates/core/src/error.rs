use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("nonlinearity specification error: {0}")]
    Spec(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("iteration is not contracting: ratio >= 1 for {consecutive} consecutive steps (measured eta = {eta:.3e}, last ratio = {last_ratio:.3e})")]
    NonContraction {
        eta: f64,
        last_ratio: f64,
        consecutive: usize,
    },

    #[error(
        "iteration did not converge within {max_iter} steps (last relative step {last_step:.3e})"
    )]
    NotConverged { max_iter: usize, last_step: f64 },

    #[error(
        "uniqueness violated: initialisation {index} reached a fixed point {distance:.3e} away"
    )]
    Uniqueness { index: usize, distance: f64 },

    #[error("weight is not monotone along the flow: it moves the wrong way by {change:.3e} between t = {t_start} and t = {t_end}")]
    WeightNotMonotone {
        t_start: f64,
        t_end: f64,
        change: f64,
    },

    #[error("field format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
