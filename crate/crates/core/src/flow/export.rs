use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::field::AmbientVectorField;
use super::remesh::RemeshEvent;
use super::run::{FlowStatus, FlowTrajectory, StepDiagnostics};
use crate::error::Result;
use crate::functionals::gaussian_area;
use crate::geometry::io;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrajectoryIndex<T> {
    pub vectorfield: AmbientVectorField<T>,
    pub status: FlowStatus,
    pub extinction_time: Option<T>,
    pub message: Option<String>,
    pub times: Vec<T>,
    /// Manifest file names, one per sample, relative to the index.
    pub meshes: Vec<String>,
    pub remesh_events: Vec<RemeshEvent<T>>,
    pub diagnostics: Vec<StepDiagnostics<T>>,
}

/// Writes `index.json`, one mesh + manifest per sample and `series.csv`
/// (t, F, enclosed measure, total measure). Returns the index path.
pub fn write_trajectory<T: Real>(traj: &FlowTrajectory<T>, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut meshes = Vec::new();
    let mut csv = fs::File::create(dir.join("series.csv"))?;
    writeln!(csv, "t,gaussian_area,enclosed_measure,total_measure")?;
    for (i, s) in traj.samples.iter().enumerate() {
        let stem = format!("sample_{i:05}");
        let manifest = io::save(&s.surface, dir, &stem)?;
        meshes.push(manifest.file_name().unwrap().to_string_lossy().into_owned());
        writeln!(
            csv,
            "{:.12e},{:.12e},{:.12e},{:.12e}",
            s.t.as_f64(),
            gaussian_area(&s.surface).value.as_f64(),
            s.surface.enclosed_measure().as_f64(),
            s.surface.total_measure().as_f64()
        )?;
    }
    let index = TrajectoryIndex {
        vectorfield: traj.vectorfield,
        status: traj.status,
        extinction_time: traj.extinction_time,
        message: traj.message.clone(),
        times: traj.times(),
        meshes,
        remesh_events: traj.remesh_events.clone(),
        diagnostics: traj.diagnostics.clone(),
    };
    let path = dir.join("index.json");
    fs::write(&path, serde_json::to_string_pretty(&index)?)?;
    Ok(path)
}

/// Reads an index and the sampled meshes back into a trajectory.
pub fn read_trajectory_index<T: Real>(index_path: &Path) -> Result<FlowTrajectory<T>> {
    let index: TrajectoryIndex<T> = serde_json::from_str(&fs::read_to_string(index_path)?)?;
    let dir = index_path.parent().unwrap_or(Path::new("."));
    let mut samples = Vec::new();
    for (t, m) in index.times.iter().zip(&index.meshes) {
        samples.push(super::run::Sample {
            t: *t,
            surface: io::load(&dir.join(m))?,
        });
    }
    Ok(FlowTrajectory {
        vectorfield: index.vectorfield,
        samples,
        diagnostics: index.diagnostics,
        remesh_events: index.remesh_events,
        status: index.status,
        extinction_time: index.extinction_time,
        message: index.message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, FlowConfig, SampleSchedule};
    use crate::shapes;
    use crate::vector::Vec3;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = shapes::circle(1.0, 64, Vec3::<f64>::zero()).unwrap();
        let cfg = FlowConfig { samples: SampleSchedule::Every(0.05), ..FlowConfig::default() };
        let tr = run(&c, &AmbientVectorField::zero(), 0.2, &cfg).unwrap();
        let p = write_trajectory(&tr, dir.path()).unwrap();
        let back: FlowTrajectory<f64> = read_trajectory_index(&p).unwrap();
        assert_eq!(back.times(), tr.times());
        for (a, b) in back.samples.iter().zip(&tr.samples) {
            assert_eq!(a.surface.vertices(), b.surface.vertices());
        }
        let csv = fs::read_to_string(dir.path().join("series.csv")).unwrap();
        assert_eq!(csv.lines().count(), tr.samples.len() + 1);
    }
}
