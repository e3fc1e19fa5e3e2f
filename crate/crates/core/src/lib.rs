pub mod capacity;
pub mod codec;
pub mod duality;
pub mod error;
pub mod gauss;
pub mod linalg;
pub mod waterfill;

pub use error::{Error, Result};
