use std::borrow::Cow;

use crate::error::Result;
use crate::flow::{unrenormalize_transform, FlowTrajectory};
use crate::geometry::DiscreteHypersurface;
use crate::levelset::{LevelSetTrajectory, TopologyEvent};
use crate::scalar::Real;
use crate::vector::{Mat3, Vec3};

/// Largest curvature of one sample or step, with its location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureRecord<T> {
    pub t: T,
    pub max_curvature: T,
    pub at: Vec3<T>,
    pub measure: T,
    /// Curvature above which the sample counts as unresolved.
    pub cap: T,
}

/// Ordinary-MCF view of a trajectory shared by the parametric and level-set solvers.
#[derive(Debug, Clone)]
pub struct Track<'a, T: Real> {
    pub ambient_dim: usize,
    pub samples: Vec<(T, Cow<'a, DiscreteHypersurface<T>>)>,
    pub curvature: Vec<CurvatureRecord<T>>,
    pub topology: Vec<TopologyEvent<T>>,
    pub extinction_time: Option<T>,
    pub initial_measure: T,
    /// Grid spacing, or the smallest initial edge of a parametric run.
    pub resolution: T,
    pub time_step: T,
    pub renormalized_source: bool,
    /// Consecutive over-cap records needed before a curvature cluster counts.
    pub min_cluster_records: usize,
}

fn parametric_records<T: Real>(samples: &[(T, Cow<'_, DiscreteHypersurface<T>>)]) -> Vec<CurvatureRecord<T>> {
    samples
        .iter()
        .filter(|(_, s)| !s.is_empty())
        .map(|(t, s)| {
            let h = s.mean_curvature_vector();
            let (mut best, mut at) = (T::zero(), s.vertices()[0]);
            for (v, hv) in s.vertices().iter().zip(h.iter()) {
                if hv.norm() > best {
                    best = hv.norm();
                    at = *v;
                }
            }
            CurvatureRecord {
                t: *t,
                max_curvature: best,
                at,
                measure: s.enclosed_measure(),
                cap: T::one() / (T::lit(5.0) * s.edge_length_stats().min),
            }
        })
        .collect()
}

impl<'a, T: Real> Track<'a, T> {
    /// Renormalized runs are mapped back with t = −e^{−s}, x ↦ e^{−s/2} x.
    pub fn parametric(traj: &'a FlowTrajectory<T>) -> Result<Self> {
        let renormalized = traj.vectorfield.is_renormalizing();
        let (samples, extinction): (Vec<(T, Cow<'a, DiscreteHypersurface<T>>)>, Option<T>) = if renormalized {
            let ordinary = unrenormalize_transform(traj)?;
            (
                ordinary.samples.into_iter().map(|s| (s.t, Cow::Owned(s.surface))).collect(),
                ordinary.extinction_time,
            )
        } else {
            (traj.samples.iter().map(|s| (s.t, Cow::Borrowed(&s.surface))).collect(), traj.extinction_time)
        };
        let first = samples.first().map(|s| s.1.clone());
        let dt = traj
            .diagnostics
            .iter()
            .map(|d| d.dt)
            .fold(T::zero(), |a, b| a.max(b));
        let curvature = parametric_records(&samples);
        Ok(Self {
            ambient_dim: first.as_ref().map(|s| s.ambient_dim()).unwrap_or(2),
            initial_measure: first.as_ref().map(|s| s.enclosed_measure()).unwrap_or_else(T::zero),
            resolution: first.as_ref().map(|s| s.edge_length_stats().min).unwrap_or_else(T::zero),
            samples,
            curvature,
            topology: Vec::new(),
            extinction_time: extinction,
            time_step: dt,
            renormalized_source: renormalized,
            min_cluster_records: 1,
        })
    }

    pub fn level_set(traj: &'a LevelSetTrajectory<T>) -> Result<Self> {
        let g = &traj.final_region.geometry;
        let renormalized = traj.final_region.field.is_renormalizing();
        let map_t = |s: T| if renormalized { -(-s).exp() } else { s };
        let scale = |s: T| if renormalized { (-s * T::lit(0.5)).exp() } else { T::one() };
        let mut samples = Vec::new();
        for (t, b) in traj.boundaries() {
            let surface = if renormalized {
                Cow::Owned(b.transformed(&Mat3::identity(), Vec3::zero(), scale(t))?)
            } else {
                Cow::Borrowed(b)
            };
            samples.push((map_t(t), surface));
        }
        let cap = T::one() / (T::lit(5.0) * g.h);
        let curvature = traj
            .records
            .iter()
            .map(|r| CurvatureRecord {
                t: map_t(r.t),
                max_curvature: r.max_curvature / scale(r.t),
                at: r.max_curvature_at * scale(r.t),
                measure: r.volume * scale(r.t).powi(g.dim as i32),
                cap: cap / scale(r.t),
            })
            .collect();
        let topology = traj
            .topology_events
            .iter()
            .map(|e| TopologyEvent {
                t_before: map_t(e.t_before),
                t_after: map_t(e.t_after),
                location: e.location * scale(e.t_before),
                curvature: e.curvature / scale(e.t_before),
                ..*e
            })
            .collect();
        Ok(Self {
            ambient_dim: g.dim,
            initial_measure: traj.records.first().map(|r| r.volume).unwrap_or_else(T::zero),
            resolution: g.h,
            samples,
            curvature,
            topology,
            extinction_time: traj.extinction_time.map(map_t),
            time_step: traj.dt,
            renormalized_source: renormalized,
            min_cluster_records: 3,
        })
    }

    /// Applies x ↦ R x + b to every sample (used for equivariance checks).
    pub fn transformed(&self, rotation: &Mat3<T>, translation: Vec3<T>) -> Result<Track<'static, T>> {
        let map = |p: Vec3<T>| rotation.apply(p) + translation;
        let mut samples = Vec::with_capacity(self.samples.len());
        for (t, s) in &self.samples {
            samples.push((*t, Cow::Owned(s.transformed(rotation, translation, T::one())?)));
        }
        Ok(Track {
            ambient_dim: self.ambient_dim,
            samples,
            curvature: self.curvature.iter().map(|c| CurvatureRecord { at: map(c.at), ..*c }).collect(),
            topology: self
                .topology
                .iter()
                .map(|e| TopologyEvent {
                    location: map(e.location),
                    ..*e
                })
                .collect(),
            extinction_time: self.extinction_time,
            initial_measure: self.initial_measure,
            resolution: self.resolution,
            time_step: self.time_step,
            renormalized_source: self.renormalized_source,
            min_cluster_records: self.min_cluster_records,
        })
    }
}
