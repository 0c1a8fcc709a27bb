//! Data-driven state-feedback synthesis for pole placement in LMI regions.
//!
//! Noisy input-state data define a set of systems consistent with a disturbance bound.
//! The [`synthesis`] module searches for a single gain that places the closed-loop
//! eigenvalues of every such system in a target [`regions::RegionIntersection`], and
//! [`verify`] checks a gain against systems sampled from that set.

pub mod error;
pub mod linalg;
pub mod lmi;
pub mod solve;
pub mod regions;
pub mod consistency;
pub mod sim;
pub mod synthesis;
pub mod verify;
pub mod cli;

pub use error::{Error, Result};
