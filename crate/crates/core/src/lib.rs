pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod json;
pub mod limits;
pub mod linalg;
pub mod matmeasure;
pub mod stieltjes_repr;
pub mod transforms;

pub use error::{Error, Result};
pub use exec::Exec;
