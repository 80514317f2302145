//! Three two-level emitters coupled to the modes of a ring cavity, restricted
//! to the three-excitation sector: basis enumeration, generator assembly,
//! RK4 time evolution, tripartite negativity and GHZ fidelity.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod sparse;

pub use error::{Error, Result};
