//! Pseudo-spectral solver for the 3D barotropic compressible Navier-Stokes
//! system on a periodic box, with short-pulse initial data, a diagnostics
//! layer, Lagrangian tracking and a verification harness.

pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod quadrature;
pub mod spectral;
pub mod dyadic;

pub use error::{Error, Result};
pub use field::{Field, ScalarField, Spectrum, VectorField};
pub use grid::Grid;
pub mod checkpoint;
pub mod config;
pub mod csv;
pub mod diagnostics;
pub mod envelope;
pub mod fit;
pub mod harness;
pub mod lagrangian;
pub mod mms;
pub mod ode;
pub mod params;
pub mod pulse;
pub mod solver;
pub mod state;
pub mod verify;

pub use params::PulseParams;
pub use state::State;
