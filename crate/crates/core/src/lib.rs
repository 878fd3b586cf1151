//! Second-quantized neural-network quantum states and constructive
//! approximation builders for them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod constructors;
pub mod error;
pub mod exec;
pub mod fockspace;
pub mod fourier;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
