//! Channel-aware admission control and routing for tele-operated driving.
//!
//! The pipeline: [`nr_radio`] turns spectral efficiency into resource blocks,
//! [`channel`] gives the SINR distribution under Rayleigh fading, [`graph`]
//! builds a road graph weighted by how many tele-operated vehicles each road
//! can carry, [`routing`] admits and routes vehicles against that capacity,
//! and [`evaluation`] simulates packet-level outcomes of the resulting schedules.

pub mod channel;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod geo;
pub mod graph;
pub mod nr_radio;
pub mod routing;

pub use error::{Error, Result};
pub use exec::Exec;
