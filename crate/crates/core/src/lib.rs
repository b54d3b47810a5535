pub mod benchmarks;
pub mod correction;
pub mod error;
pub mod eval;
pub mod grey;
pub mod lsq;
pub mod rolling;
pub mod series;

pub use error::{GreyError, Result};
