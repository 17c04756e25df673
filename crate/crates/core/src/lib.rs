//! Numerical toolkit for arithmetic sums of self-similar sets.

pub mod boxdim;
pub mod budget;
pub mod cli;
pub mod config;
pub mod drop;
pub mod error;
pub mod homogenize;
pub mod ifs;
pub mod marstrand;
mod par;
pub mod planar;
pub mod resonance;
pub mod scalar;
pub mod tower;

pub use budget::Budget;
pub use error::{Error, Result};
pub use ifs::{central_cantor, Ifs1d, Ifs2d, Interval, Similitude1d, Similitude2d, Word};
pub use scalar::{Mode, Scalar};
