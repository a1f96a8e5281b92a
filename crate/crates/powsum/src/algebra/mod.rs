//! Exact scalar, univariate and matrix arithmetic.

pub mod field;
pub mod matrix;
pub mod prime;
pub mod ratrec;
pub mod roots;
pub mod series;
pub mod uni;

pub use field::{format_rational, parse_rational, Field, FieldSpec, Fp, Fp128, Fp192, Fp64, PrimeField, Rationals};
pub use matrix::{Matrix, Solution};
pub use prime::{is_probable_prime, random_prime};
pub use ratrec::rational_reconstruct;
pub use roots::roots_in_field;
pub use series::{series_eth_root, series_inverse};
pub use uni::UniPoly;
