pub mod baseline;
pub mod datagen;
pub mod error;
pub mod framework;
pub mod graphs;
pub mod harness;
pub mod model;
pub mod problem;
pub mod problems;
pub mod pwl;
pub mod trainer;

pub use error::{Error, Result};
