use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("numeric error: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },
    #[error("point lies on the singular set (distance {distance:e})")]
    Singular { distance: f64 },
    #[error("tube violation: distance {distance} to the target exceeds the tubular radius at {location:?}{}", cell_suffix(.cell))]
    TubeViolation {
        distance: f64,
        location: Vec<f64>,
        cell: Option<Vec<i64>>,
    },
    #[error("filling error: {0}")]
    Filling(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("padding error: {0}")]
    Padding(String),
    #[error("io error: {0}")]
    Io(String),
}

fn cell_suffix(cell: &Option<Vec<i64>>) -> String {
    match cell {
        Some(c) => format!(" in cell {c:?}"),
        None => String::new(),
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
