// NaN must fail validation, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod error;
pub mod experiments;
mod fft;
pub mod field;
pub mod grid;
pub mod initial_data;
pub mod lab;
pub mod littlewood_paley;
pub mod monitor;
pub mod random;
pub mod solver;
pub mod spaces;

pub use error::{Error, Result};
pub use field::{Axis, Components, SpectralField, VectorField};
pub use grid::Grid;
pub use littlewood_paley::DyadicPartition;
pub use spaces::{BesovParams, BlockNormHistory, Exponent};
