//! Link- and system-level simulation of non-terrestrial network access:
//! a single LEO satellite serving ground terminals with fixed-beam
//! frequency reuse or user-centric precoding, and a UAV collecting NOMA
//! uplink traffic with energy-efficient power control.

pub mod array;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod noma;
pub mod precoding;
pub mod scenario;
pub mod seed;

pub use error::{NtnError, Result};
