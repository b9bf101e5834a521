//! Numerical laboratory for the discrete circle method applied to the
//! shifted fourth moment of the Riemann zeta function.

pub mod accum;
pub mod cli;
pub mod closed_forms;
pub mod decomposer;
pub mod error;
pub mod farey;
pub mod quad;
pub mod shift_arith;
pub mod special;
pub mod weights;

pub use error::{Error, Result};
