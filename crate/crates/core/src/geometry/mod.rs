//! Discrete closed hypersurfaces (polygons in R², triangle meshes in R³) and
//! the differential quantities computed on them.

mod field;
pub mod io;
mod ops;
pub mod spatial;
mod surface;

pub use field::{FieldKind, ScalarField, VectorField, VertexField};
pub use ops::{CurvatureDiagnostics, ASPECT_RATIO_CAP};
pub use surface::{DiscreteHypersurface, Elements, Orientation, DEFAULT_FLOOR_FACTOR};
