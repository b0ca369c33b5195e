pub mod combinatorics;
pub mod dynamics;
pub mod error;
pub mod hierarchy;
pub mod kinetic;
pub mod linalg;

pub use error::{Error, Result};
