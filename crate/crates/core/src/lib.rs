//! Double-cross network modelling of discrete masonry and simulation of
//! scaffold-free robotic arch construction sequences.

pub mod error;
pub mod model;
pub mod solver;
pub mod geometry;
pub mod sequences;
pub mod optimizer;
pub mod calibration;
pub mod config;

pub use error::{Error, Result};
