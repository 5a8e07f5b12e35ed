//! Symbolic engine for the one-loop structure of the gauge theory of
//! volume-preserving diffeomorphisms of a flat inner space.

pub mod brst;
pub mod error;
pub mod heatkernel;
pub mod innerspace;
pub mod looptab;
pub mod powercount;
pub mod renorm;
pub mod rules;
pub mod symcore;
pub mod verify;

pub use error::{Error, Result};
