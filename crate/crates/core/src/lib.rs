//! Spectral laboratory for norm inflation in transport and Euler equations.

pub mod calculus;
pub mod calibration;
pub mod counterexamples;
pub mod error;
mod fft;
pub mod euler;
pub mod field;
pub mod fit;
pub mod flow;
pub mod grid;
pub mod interp;
pub mod io;
pub mod jet;
pub mod littlewood_paley;
pub mod multiplier;
pub mod quadrature;
pub mod stepping;
pub mod transport;

pub use error::{Error, Result};
pub use field::{Field, VectorField};
pub use grid::Grid;
pub use multiplier::{Multiplier, ZeroMode};
