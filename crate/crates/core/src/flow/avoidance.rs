use serde::{Deserialize, Serialize};

use super::run::FlowTrajectory;
use crate::error::{Error, Result};
use crate::geometry::spatial::min_distance;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AvoidanceSeries<T> {
    pub times: Vec<T>,
    pub distances: Vec<T>,
    /// e^{−t/2} · distance, present for renormalizing fields.
    pub weighted: Option<Vec<T>>,
}

impl<T: Real> AvoidanceSeries<T> {
    /// Largest drop between consecutive entries of a series (0 when non-decreasing).
    pub fn worst_decrease(series: &[T]) -> T {
        series.windows(2).map(|w| w[0] - w[1]).fold(T::zero(), T::max)
    }
}

/// Minimum mesh-to-mesh distance at the sample times both trajectories share.
pub fn avoidance_distance<T: Real>(a: &FlowTrajectory<T>, b: &FlowTrajectory<T>) -> Result<AvoidanceSeries<T>> {
    if a.vectorfield.kind_name() != b.vectorfield.kind_name() {
        return Err(Error::InvalidParameter("trajectories use different vector fields".into()));
    }
    let scale = a
        .samples
        .iter()
        .chain(&b.samples)
        .map(|s| s.t.abs())
        .fold(T::one(), T::max);
    let tol = T::lit(1e-9) * scale;
    let mut times = Vec::new();
    let mut distances = Vec::new();
    for sa in &a.samples {
        if let Some(sb) = b.sample_at(sa.t, tol) {
            times.push(sa.t);
            distances.push(min_distance(&sa.surface, &sb.surface));
        }
    }
    if times.is_empty() {
        return Err(Error::NoOverlap);
    }
    let weighted = a.vectorfield.is_renormalizing().then(|| {
        times
            .iter()
            .zip(&distances)
            .map(|(t, d)| (-*t / T::lit(2.0)).exp() * *d)
            .collect()
    });
    Ok(AvoidanceSeries { times, distances, weighted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, AmbientVectorField, FlowConfig, SampleSchedule};
    use crate::shapes;
    use crate::vector::Vec3;

    #[test]
    fn concentric_circles_separate() {
        let cfg = FlowConfig { samples: SampleSchedule::Every(0.05), ..FlowConfig::default() };
        let inner = shapes::circle(1.0, 256, Vec3::<f64>::zero()).unwrap();
        let outer = shapes::circle(3.0, 256, Vec3::<f64>::zero()).unwrap();
        for f in [AmbientVectorField::zero(), AmbientVectorField::renormalizing()] {
            let a = run(&inner, &f, 0.6, &cfg).unwrap();
            let b = run(&outer, &f, 0.6, &cfg).unwrap();
            let s = avoidance_distance(&a, &b).unwrap();
            assert!(s.times.len() > 5);
            let series = s.weighted.clone().unwrap_or(s.distances.clone());
            assert!(AvoidanceSeries::worst_decrease(&series) <= 1e-3);
        }
    }

    #[test]
    fn mismatched_times_are_rejected() {
        let c = shapes::circle(1.0, 64, Vec3::<f64>::zero()).unwrap();
        let f = AmbientVectorField::zero();
        let a = run(&c, &f, 0.1, &FlowConfig::default()).unwrap();
        let cfg = FlowConfig { start_time: 1.0, ..FlowConfig::default() };
        let b = run(&c, &f, 1.1, &cfg).unwrap();
        assert!(matches!(avoidance_distance(&a, &b), Err(Error::NoOverlap)));
        let r = run(&c, &AmbientVectorField::renormalizing(), 0.1, &FlowConfig::default()).unwrap();
        assert!(avoidance_distance(&a, &r).is_err());
    }
}
