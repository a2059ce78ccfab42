//! Interacting Bessel processes, Dyson's Brownian motion and the type-B
//! Dunkl machinery behind their steady states and freezing limits.

pub mod dunkl;
pub mod error;
pub mod orthopoly;
pub mod sde;
pub mod stats;
pub mod symfunc;

pub use error::{Error, Result};
