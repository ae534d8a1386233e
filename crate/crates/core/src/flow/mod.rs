//! Parametric X-mean-curvature flow of meshes: normal velocity H + X^⊥.

mod avoidance;
mod convexity;
mod export;
mod field;
mod remesh;
mod run;
mod step;
mod transform;

pub use avoidance::{avoidance_distance, AvoidanceSeries};
pub use convexity::{convexity_floor, inward_perturb, reach_estimate, x_mean_convex, ConvexityReport, PerturbResult, RegionSide};
pub use export::{read_trajectory_index, write_trajectory, TrajectoryIndex};
pub use field::{AmbientVectorField, FieldType};
pub use remesh::{remesh, RemeshConfig, RemeshEvent};
pub use run::{run, FlowConfig, FlowStatus, FlowTrajectory, Sample, SampleSchedule, StepDiagnostics};
pub use step::{step, Scheme, StepConfig};
pub use transform::{renormalize_transform, unrenormalize_transform};
