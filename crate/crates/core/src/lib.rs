//! Dimension profiles of compact subsets of the half-line with respect to
//! Levy-process kernels, and image-dimension experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod ladder;
pub mod process;
pub mod profiles;
pub mod quadrature;
pub mod rng;
pub mod sets;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
