#![no_std]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod counting;
pub mod cutoff;
pub mod error;
pub mod evolution;
pub mod extremizers;
pub mod exec;
pub mod fft;
pub mod fit;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod nls;
pub mod norms;
pub mod optimizer;
pub mod separable;
pub mod snorm;
pub mod theory;
pub mod weyl;

pub use error::{Error, Result};
