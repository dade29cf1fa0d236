pub mod anderson;
pub mod cli;
pub mod error;
pub mod hyperbolic;
pub mod estimators;
pub mod linalg;
pub mod measures;
pub mod rng;
pub mod scalar;
pub mod transport;
pub mod walk;

pub use error::{Error, Result};
