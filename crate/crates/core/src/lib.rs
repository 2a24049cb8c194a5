//! Simulation library for QSVT-based post-selection: fixed-point and linear
//! amplitude amplification, mixed-state post-selection metrics and
//! measurement-induced teleportation decoders.

pub mod blockenc;
pub mod bounds;
pub mod decoders;
pub mod error;
pub mod linalg;
pub mod protocols;
pub mod qsvt;
pub mod svtfun;
pub mod tol;

pub use error::{Error, Result};
