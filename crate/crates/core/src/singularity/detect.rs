use serde::{Deserialize, Serialize};

use super::track::Track;
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    /// Curvature passed the resolution cap while the region was still large.
    CurvatureBlowup,
    /// The region vanished.
    Extinction,
    /// The component count changed.
    TopologyChange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SingularPoint<T> {
    pub x: Vec3<T>,
    pub t: T,
    pub peak_curvature: T,
    pub source: CandidateSource,
}

/// Fraction of the initial measure below which the region counts as extinct.
const EXTINCTION_FLOOR: f64 = 1e-4;

/// Singular spacetime candidates in time order.
pub fn detect_singularities<T: Real>(track: &Track<'_, T>) -> Vec<SingularPoint<T>> {
    let mut out: Vec<SingularPoint<T>> = Vec::new();
    for e in &track.topology {
        out.push(SingularPoint {
            x: e.location,
            t: e.t_after,
            peak_curvature: e.curvature,
            source: CandidateSource::TopologyChange,
        });
    }
    if let Some(te) = track.extinction_time {
        if let Some((_, s)) = track.samples.iter().rev().find(|(_, s)| !s.is_empty()) {
            let peak = track
                .curvature
                .iter()
                .filter(|c| c.t <= te)
                .map(|c| c.max_curvature)
                .fold(T::zero(), |a, b| a.max(b));
            out.push(SingularPoint {
                x: s.centroid(),
                t: te,
                peak_curvature: peak,
                source: CandidateSource::Extinction,
            });
        }
    }
    let diameter = track
        .samples
        .first()
        .map(|(_, s)| s.diameter())
        .unwrap_or_else(T::zero);
    let radius = (T::lit(10.0) * track.resolution).max(T::lit(0.05) * diameter);
    let floor = T::lit(EXTINCTION_FLOOR) * track.initial_measure;
    // Consecutive over-cap records with nearby argmax vertices form one cluster.
    let mut clusters: Vec<(Vec3<T>, T, T, usize)> = Vec::new();
    let mut open = false;
    for c in &track.curvature {
        if !(c.max_curvature > c.cap && c.measure > floor) {
            open = false;
            continue;
        }
        match clusters.last_mut() {
            Some(last) if open && last.0.distance(c.at) <= radius => {
                *last = (c.at, c.t, last.2.max(c.max_curvature), last.3 + 1);
            }
            _ => clusters.push((c.at, c.t, c.max_curvature, 1)),
        }
        open = true;
    }
    for (x, t, peak, _) in clusters.into_iter().filter(|c| c.3 >= track.min_cluster_records.max(1)) {
        if let Some(p) = out
            .iter_mut()
            .filter(|p| p.source != CandidateSource::CurvatureBlowup)
            .find(|p| p.x.distance(x) <= radius)
        {
            p.peak_curvature = p.peak_curvature.max(peak);
            continue;
        }
        out.push(SingularPoint {
            x,
            t,
            peak_curvature: peak,
            source: CandidateSource::CurvatureBlowup,
        });
    }
    out.sort_by(|a, b| a.t.as_f64().total_cmp(&b.t.as_f64()));
    out
}
