pub mod digital_net;
pub mod error;
pub mod error_bounds;
pub mod gf_linalg;
pub mod mapping;
pub mod partition;
pub mod quadrature;
pub mod walsh;

pub use error::{Error, Result};
