//! Learning sums of powers of low-degree polynomials from black-box access.
//!
//! The crate is organised bottom-up: exact arithmetic (`algebra`), sparse
//! polynomials (`multipoly`), evaluation oracles (`blackbox`), decomposition
//! of vector spaces under operators (`decomp`), the reconstruction pipeline
//! (`learner`), non-degenerate instance builders (`witness`), the lower-bound
//! measure (`appmeasure`) and moment-based Gaussian mixture recovery
//! (`gaussians`).

#![allow(clippy::type_complexity)]

pub mod algebra;
pub mod appmeasure;
pub mod blackbox;
pub mod decomp;
pub mod error;
pub mod gaussians;
pub mod learner;
pub mod multipoly;
pub mod witness;

pub use error::{Error, Result};
