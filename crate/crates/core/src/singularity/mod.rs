//! Singular points of flow trajectories and their tangent flows.

mod chain;
mod classify;
mod detect;
mod track;

pub use chain::{density_entropy_bound_check, BoundCheckConfig, BoundReport, ChainEntry};
pub use classify::{classify_tangent_flow, sphere_entropy, ClassifyConfig, TangentFlowClassification, TangentFlowLabel};
pub use detect::{detect_singularities, CandidateSource, SingularPoint};
pub use track::{CurvatureRecord, Track};

#[cfg(test)]
mod tests;
