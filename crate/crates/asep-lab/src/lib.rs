//! Exact q-moment formulas, Markov dualities and KPZ-limit moments for
//! half-line and segment open ASEP.

pub mod duality;
pub mod error;
pub mod kpz;
pub mod model;
pub mod moments;
pub mod partitions;
pub mod quadrature;
pub mod residue;
pub mod segment;
pub mod simulator;

mod par;

pub use error::{Error, Result};
