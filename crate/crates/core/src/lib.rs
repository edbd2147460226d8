//! Large covariance estimation under a low-rank plus sparse decomposition.
//!
//! The crate is `no_std` (it needs `alloc`). It provides the ALCE proximal
//! solver and its UNALCE unshrinkage, the POET baseline, threshold selection
//! by the MC criterion or cross-validation, a simulation harness for
//! low-rank plus sparse ensembles, and the comparison metrics.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod estimators;
pub mod linalg;
pub mod metrics;
pub mod simgen;
pub mod tuning;

pub use error::{Error, Result};
pub use estimators::{Estimate, Method, SolverConfig};
pub use linalg::{EigenDecomposition, NormKind, SymmetricMatrix};
pub use simgen::{GroundTruth, SettingSpec};
