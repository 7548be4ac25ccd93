//! Certification of measurement schemes that distinguish all quantum states of bounded rank.
//!
//! A scheme is complete on rank-`r` states exactly when no nonzero hermitian matrix in the
//! representing set of rank at most `2r` lies in its kernel. [`certify`] searches that set
//! numerically, [`varieties`] describes it, and [`lab`] holds the experiments built on both.

// Negated comparisons are deliberate: they reject NaN along with the failing values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod lab;
pub mod matcore;
pub mod schemes;
pub mod seed;
pub mod varieties;

pub use error::{Error, Result};
