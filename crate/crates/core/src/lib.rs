//! Numerics for homogeneous Sobolev spaces and whole-space linear elliptic
//! systems `-div C:∂u = f`, discretized on a periodic box.

pub mod ellipticity;
pub mod error;
pub mod functionals;
mod exact;
mod fft;
pub mod grid;
pub mod growth;
pub mod io;
pub mod quotient;
pub mod solver;
pub mod testfields;

pub use error::{Error, Result};
pub use grid::{Field, Grid, SpectralField};
