//! Jobs, result documents, the resolution cache, and suite orchestration.

pub mod cache;
pub mod job;
pub mod result;
pub mod suite;

pub use cache::ResolutionCache;
pub use job::{run, Job, JobCommand};
pub use result::{ResultDoc, ResultRow};
pub use suite::{run_suite, SuiteSummary};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
