//! Dynamical suppression of tunneling for a spin-orbit-coupled atom in a
//! modulated double well: stationary states, driven propagation, the
//! four-mode reduced model, and parameter scans.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fourmode;
pub mod grid;
pub mod io;
pub mod scan;
pub mod spinor;
pub mod stationary;

pub use error::{Error, Result};
pub use grid::{Grid, GridSpec, TrapParams};
pub use spinor::{SpinorField, Symmetry};
