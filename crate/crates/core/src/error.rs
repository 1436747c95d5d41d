use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate message: every component is -inf")]
    DegenerateMessage,

    #[error("degenerate prior at symbol {index}: every component is -inf")]
    DegeneratePrior { index: usize },

    #[error("alist parse error at line {line}: {msg}")]
    AlistParse { line: usize, msg: String },

    #[error("generator polynomial parse error: {0}")]
    PolyParse(String),

    #[error("code construction failed: {0}")]
    Construction(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("channel configuration error: {0}")]
    ChannelConfig(String),

    #[error("spectral factorization did not converge (residual {residual:.3e})")]
    Factorization { residual: f64 },

    #[error("covariance assembly failed: {0}")]
    CovarianceAssembly(String),

    #[error("degenerate sampling: epsilon = {0} leaves an empty integration interval")]
    DegenerateSampling(f64),

    #[error("invalid trellis reduction: tap {tap} has magnitude {magnitude:.3e} on the A column")]
    InvalidReduction { tap: usize, magnitude: f64 },

    #[error("trellis too large: memory {memory} gives {states} states")]
    TrellisTooLarge { memory: usize, states: usize },

    #[error("frame offset error: {0}")]
    FrameOffset(String),

    #[error("delay resolution ambiguous: candidates {candidates:?}")]
    AmbiguousDelay { candidates: Vec<i64> },

    #[error("delay resolution failed: no shift passes the CRC")]
    NoDelayCandidate,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("frame {frame} at Eb/N0 index {snr_index}: {source}")]
    Trial {
        snr_index: usize,
        frame: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
