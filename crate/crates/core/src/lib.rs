//! Gaussian area, entropy and weak mean curvature flow of discrete hypersurfaces.
//!
//! Everything numeric is generic over [`Real`] (implemented for `f32` and
//! `f64`); the aliases below fix the scalar to `f64`.

pub mod acceptance;
pub mod error;
pub mod flow;
pub mod functionals;
pub mod geometry;
pub mod levelset;
pub mod scalar;
pub mod shapes;
pub mod singularity;
pub mod vector;

pub use error::{Error, Result};
pub use scalar::Real;
pub use vector::{Mat3, Vec3};

pub type Point = vector::Vec3<f64>;
pub type Surface = geometry::DiscreteHypersurface<f64>;
pub type Field = geometry::VectorField<f64>;
