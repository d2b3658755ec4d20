pub mod cli;
pub mod error;
pub mod estimation;
pub mod fock;
pub mod measurement;
pub mod optics;
pub mod protocols;

pub use error::{Error, Result};
