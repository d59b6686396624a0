//! Design optimization of dual-chemistry hybrid battery systems.
//!
//! A high-power pack sits directly on the traction bus; a high-energy pack
//! feeds the bus through a bidirectional DC-DC converter. The crate sizes the
//! pair from a capacity split `gamma`, simulates a drive cycle with the
//! per-step optimal converter power, and sweeps `gamma` and the chemistry
//! pairing for minimum energy or minimum total cost of ownership.

pub mod aging;
pub mod cell;
pub mod config;
pub mod drivetrain;
pub mod error;
pub mod pack;
pub mod powersplit;
pub mod report;
pub mod sizing;
pub mod table;
pub mod thermal;

pub use error::{Error, Result};
