use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite Rabi frequency for field {field}")]
    NonFiniteRabi { field: usize },

    #[error("invalid level scheme: {0}")]
    Scheme(String),

    #[error("invalid relaxation model: {0}")]
    Relaxation(String),

    #[error(
        "time step {dt:e} s too large: dt * max rate = {product:.3} exceeds the stability limit 0.5"
    )]
    StepSize { dt: f64, product: f64 },

    #[error("dark-state coherence undefined when both Rabi frequencies vanish")]
    UndefinedDarkState,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("unknown preset `{name}`; valid presets: {}", .valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<String> },

    #[error("unsupported waveguide mode TE{n}{m}; supported: {supported}")]
    UnsupportedMode { n: u32, m: u32, supported: String },

    #[error("grid under-resolved: {0}")]
    UnderResolved(String),

    #[error("non-finite value at z index {iz}, tau index {it}")]
    NonFinite { iz: usize, it: usize },

    #[error("signature mismatch: grid was produced for {grid}, check requested {requested}")]
    SignatureMismatch { grid: String, requested: String },

    #[error("sweep error: {0}")]
    Sweep(String),

    #[error("corrupt artifact {path}: {reason}")]
    CorruptArtifact { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
