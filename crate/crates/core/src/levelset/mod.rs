//! Weak X-mean-curvature flow of closed regions on a signed-distance grid.

mod build;
mod evolve;
mod extract;
mod fmm;
mod grid;
mod query;
mod snapshot;

pub use build::from_surface;
pub use evolve::{run, stable_dt, step, Horizon, LevelSetRunConfig, LevelSetSample, LevelSetTrajectory, StepRecord, TopologyEvent};
pub use extract::extract_boundary;
pub use fmm::reinitialize;
pub use grid::{GridConfig, GridGeometry, LevelSetRegion, RegionStatus, RegionStats};
pub use query::{
    component_count, containment_check, distance_to_origin, enclosed_volume, front_curvature, pinch_location,
    ContainmentReport, FrontCurvature,
};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotHeader};

#[cfg(test)]
mod tests;
