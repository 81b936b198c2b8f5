//! Contention resolution laboratory: LP-based sequential pricing, random-order
//! contention resolution schemes, and a numeric bounds engine.

pub mod attenuation;
pub mod bounds;
pub mod error;
pub mod graph;
pub mod lp;
pub mod rng;
pub mod simulate;
pub mod suite;

pub use error::{Error, Result};
