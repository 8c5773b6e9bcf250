//! Composite non-Markovian qubit dynamics.
//!
//! A qubit exchanging excitations with a partner qubit (Jaynes-Cummings-type
//! coupling) while also exposed to random telegraph noise and/or
//! non-Markovian amplitude damping. The crate provides the channels, the
//! usual non-Markovianity witnesses (trace-distance backflow, canonical
//! decoherence rate, Choi test of intermediate maps) and a spectral toolkit
//! that attributes peaks in a witness time series to the noise source that
//! produced them.

pub mod channels;
pub mod error;
pub mod matcore;
pub mod spectral;
pub mod witnesses;

pub use error::{Error, Result};
pub use matcore::{CMatrix, DensityMatrix, Tolerances};
