//! Construction and certification of perfect LOCC discrimination schemes for
//! multipartite unitary operations.
//!
//! Two unitaries `U1`, `U2` on `⊗_k C^{d_k}` are told apart with certainty
//! when some input product state is mapped to orthogonal outputs. The
//! planners here build such inputs for a single run, for `N` parallel copies
//! and for sequences of runs interleaved with local unitaries, and the
//! verifiers recompute the overlap of the outputs independently.

pub mod cli;
pub mod error;
pub mod exec;
pub mod matrixcore;
pub mod hermbasis;
pub mod localrange;
pub mod numrange;
pub mod oracle;
pub mod schemes;

pub use error::{Error, Result};
