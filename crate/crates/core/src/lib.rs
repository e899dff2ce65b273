pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod quantization;
pub mod sphere;

pub use error::{Error, Result};
