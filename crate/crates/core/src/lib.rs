//! Matrix-valued inner functions, their model spaces, the generalized Crofoot
//! transform between `K_Θ` and `K_Θ′`, and matrix-valued truncated Toeplitz
//! operators, with residual checks for every identity relating them.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conjugation;
pub mod crofoot;
pub mod demo;
pub mod error;
pub mod inner_function;
pub mod instance;
pub mod linalg;
pub mod model_space;
pub mod oracle;
pub mod sampling;
pub mod suite;
pub mod tto;

pub use error::{Error, Result};
