//! Semiclassical periodic-orbit evaluation of the microcanonical
//! out-of-time-order correlator (OTOC) near an index-1 saddle.

pub mod amplitude;
pub mod cli;
pub mod error;
pub mod normal_form;
pub mod oracle;
pub mod otoc_trace;
pub mod reaction_trace;
pub mod resonance;
pub mod stability;

pub use error::{OtocError, Result};
