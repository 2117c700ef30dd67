pub mod center;
pub mod characters;
pub mod error;
pub mod geometry;
pub mod jet;
pub mod partitions;
pub mod poly;
pub mod rational;
pub mod series;
pub mod star;
pub mod tensor_action;

pub use error::{Error, Result};
