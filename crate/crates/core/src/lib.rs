pub mod analysis;
pub mod bench;
pub mod cli;
pub mod engine;
pub mod error;
pub mod model;
pub mod precision;
pub mod topology;

pub use error::{Error, Result};
