pub mod dataset;
pub mod error;
pub mod exec;
pub mod harness;
pub mod identifier;
pub mod kernel;
pub mod mmd;
pub mod regressor;
pub mod variation;

pub use error::{Result, VceiError};
