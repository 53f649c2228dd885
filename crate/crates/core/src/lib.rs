#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical core for band-width comparison in scalar curvature geometry:
//! warped-product model spaces, glued potentials, width bounds and discrete
//! μ-bubble minimization.

pub mod assembly;
pub mod bubble;
pub mod comparison;
pub mod error;
pub mod model_spaces;
pub mod roots;
pub mod spline;

pub use error::{Error, Result};
pub use model_spaces::{FiberTag, Interval, ModelSpace};
