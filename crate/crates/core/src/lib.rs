pub mod central_config;
pub mod conserved;
pub mod error;
pub mod linalg;
pub mod nbody;
pub mod presets;
pub mod quaternion;
pub mod report;
pub mod rotating_frame;
pub mod spectral_flow;
pub mod stability;
pub mod symplectic;

pub use error::{Error, Result};
