//! System-level simulator of adaptive video streaming over an LTE-A cell
//! with Licensed Assisted Access.
//!
//! The eNodeB aggregates one licensed and one unlicensed carrier. Unlicensed
//! availability is modeled through the idle probability of a saturated WiFi
//! DCF ([`wifi`]). Every 10 s interval a convex utility maximization picks
//! per-UE resource fractions and segment qualities ([`admm`], [`quality`]);
//! every 10 ms interval resource blocks are scheduled under a
//! backlog-and-channel-aware policy or one of the baselines ([`scheduler`]).
//! [`engine::run_scenario`] ties the two timescales together and reports
//! quality and video-freeze metrics ([`metrics`]).

pub mod admm;
pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod quality;
pub mod rng;
pub mod runner;
pub mod scheduler;
pub mod wifi;

pub use error::{Error, Result};
