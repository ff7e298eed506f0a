#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod certifier;
pub mod error;
pub mod flow;
pub mod lyapunov;
pub mod manifold;
pub mod systems;
pub mod tolerances;

pub use error::{Error, Result};
