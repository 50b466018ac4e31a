//! Core arithmetic for computing the mock modular constant `alpha_g` of a
//! weight-2 rational CM newform at an inert prime.
//!
//! Everything here is `no_std` with `alloc`; file formats, the command line
//! and reporting live in the companion `mockalpha` crate.
#![no_std]

extern crate alloc;

pub mod cmforms;
pub mod decomp;
pub mod formalgroup;
pub mod kernel;
pub mod padic;
pub mod series;
pub mod weierstrass;

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;
pub use padic::{PadicError, PadicScalar};
pub use series::{LaurentSeries, SeriesError};
