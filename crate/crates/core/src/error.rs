use thiserror::Error;

/// Errors raised across the solving, sampling and learning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("singular matrix (pivot {pivot:.3e} below threshold {threshold:.3e})")]
    SingularMatrix { pivot: f64, threshold: f64 },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("invalid oscillator count {0}; the Kuramoto model needs N >= 2")]
    InvalidN(usize),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("degenerate gamma: denominator of tau vanishes at t = {t}")]
    DegenerateGamma { t: f64 },
    #[error("generic start failed: {0}")]
    GenericStartFailed(String),
    #[error("real-solution count unreliable: {failed} of {total} paths failed or merged")]
    CountUnreliable { failed: usize, total: usize },
    #[error("could not label parameter point {0:?}")]
    LabelFailed(Vec<f64>),
    #[error("point {0:?} is not strictly inside the box")]
    PointOutsideBox(Vec<f64>),
    #[error("witness line failed: {failed} of {total} paths failed")]
    WitnessFailed { failed: usize, total: usize },
    #[error("line discarded: {0}")]
    LineDiscarded(String),
    #[error("invalid class set: {0}")]
    InvalidClasses(String),
    #[error("seed bank is empty")]
    EmptyBank,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("schema mismatch in {file}: expected {expected}, found {found}")]
    Schema {
        file: String,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
