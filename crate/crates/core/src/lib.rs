//! Diffuse-interface solver for two-phase flow with a semi-permeable
//! membrane and a passive solute.

pub mod energy;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod model;
pub mod scheme;

pub use error::{Error, Result};
