//! Feasibility estimates for event-ready Bell tests with two remote trapped
//! atoms entangled by photonic entanglement swapping.
//!
//! The crate chains an experimental error budget into the heralded atom-atom
//! Werner state ([`swap_chain`]), maps it through two atomic readout models
//! ([`detection`]) to CHSH values and the event counts needed for a k-sigma
//! violation ([`chsh`]), converts those counts into measurement time
//! ([`schedule`]) and checks every analytic number against a seeded event
//! sampler ([`montecarlo`]). [`cli`] holds the scenario format and reports
//! behind the `bellfeas` binary.

pub mod chsh;
pub mod cli;
pub mod detection;
mod error;
pub mod montecarlo;
pub mod quantum_state;
pub mod schedule;
pub mod swap_chain;

pub use error::{Error, Result};
