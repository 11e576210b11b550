//! spfh — an exact homological workbench for strict polynomial functors.
//!
//! The library realizes strict polynomial functors as weight-graded modules
//! over Schur algebras, computes Ext/Tor through certified Γ^λ-resolutions,
//! stabilizes them under Frobenius twisting (generic Ext/Tor with stable-range
//! certificates), computes Ext in truncated categories of F_q-vector spaces,
//! builds the comparison maps between the two worlds at chain level, and
//! checks everything against closed-form combinatorial oracles.
//!
//! Start with the runnable examples (`cargo run --example ...`) or the `spfh`
//! binary (`cargo run --bin spfh -- --help`).

pub mod field;
pub mod polyfun;
pub mod homalg;
pub mod generic;
pub mod fqcat;
pub mod compare;
pub mod oracle;
pub mod driver;

pub use field::{FieldSpec, FqCtx, Mat};
pub mod error;
pub use error::EngineError;
pub use polyfun::{Caps, Expr, GradedModule, WeightedModule};
