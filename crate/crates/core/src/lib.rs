//! Rayleigh triangles, the ultra-beta family of integrals over them, and the
//! machinery used to check every closed form numerically: nested quadrature,
//! importance-sampled Monte Carlo, exact sequential samplers and random-matrix
//! corner processes over the reals, complexes and quaternions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod changevar;
pub mod error;
pub mod integrands;
pub mod matrixcheck;
pub mod montecarlo;
pub mod patterns;
pub mod quadrature;
pub mod sampler;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;
