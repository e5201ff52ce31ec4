//! Attributed Erdős–Rényi graph pairs and the algorithms that align them.
//!
//! A base graph on `n` users and `m` attributes is sampled, two correlated
//! copies are obtained by independent edge subsampling, and the second copy's
//! users are relabelled by a hidden permutation. [`align::attr_rich`] and
//! [`align::attr_sparse`] try to recover that permutation exactly; the
//! [`harness`] runs them over parameter grids and writes CSV results.
//!
//! Users and attributes are 0-based internally ([`graph::UserId`],
//! [`graph::AttrId`]). Edge-list files use 1-based labels with users first:
//! users are `1..=n` and attributes `n+1..=n+m`.

pub mod align;
pub mod error;
pub mod exec;
pub mod graph;
pub mod harness;
pub mod io;
pub mod model;

pub use align::{AlignFailure, AlignmentResult, AnchorSet, FailureKind};
pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{AttrId, AttributedGraph, Permutation, UserId};
pub use model::{GraphPairInstance, ModelParams};
