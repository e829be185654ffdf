//! Open continuous-time Markov processes with composable boundaries.
//!
//! A process here is a finite-state continuous-time Markov semigroup together
//! with chosen input and output interfaces, so processes can be glued end to
//! end, run side by side, coarse-grained onto smaller state spaces, and
//! black-boxed into the exact linear relation their steady states impose on
//! boundary data. All structural laws are checked over arbitrary-precision
//! rationals; floating point appears only in the simulation layer.

pub mod error;
pub mod exactlin;
pub mod finset;
pub mod laws;
pub mod blackbox;
pub mod cli;
pub mod coarse;
pub mod dynamics;
pub mod linrel;
pub mod markov;

pub use error::{Error, Result};
