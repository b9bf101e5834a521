use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pole of {function} at s = {re} + {im}i")]
    Pole { function: &'static str, re: f64, im: f64 },

    #[error("degenerate shift combination {name} (|value| = {modulus:e} < {min:e})")]
    DegenerateShift { name: String, modulus: f64, min: f64 },

    #[error("ratio {m}/{n} lies outside the arcs of order {q}")]
    OutOfRange { m: u64, n: u64, q: u64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn pole(function: &'static str, s: num_complex::Complex64) -> Self {
        Error::Pole { function, re: s.re, im: s.im }
    }
}
