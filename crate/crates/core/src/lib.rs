//! Fiber-fiber interaction for planar Bernoulli-Euler beams using a
//! section-section potential with an offset-aware closed form.

pub mod beam;
pub mod bspline;
pub mod error;
pub mod interaction;
pub mod kinematics;
pub mod laws;
pub mod quad;
pub mod scalar;
pub mod solver;
pub mod specialfn;
pub mod vec2;
pub mod verify;

pub use error::{Error, Result};
pub mod cli_io;
