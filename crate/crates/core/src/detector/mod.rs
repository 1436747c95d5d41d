//! Symbol-level MAP detection on the vector-ISI channel.

mod bcjr;
mod trellis;

pub use bcjr::{bcjr, branch_metric, branch_outputs, ApSequence, BMac, DetectorOptions, Reduction};
pub use trellis::{build_trellis, check_reduction, Trellis, MAX_MEMORY, REDUCTION_TOLERANCE};
