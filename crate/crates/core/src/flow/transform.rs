use super::field::AmbientVectorField;
use super::run::{FlowTrajectory, Sample};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::{Mat3, Vec3};

/// Ordinary flow on t ∈ [−1, 0) to the renormalized flow: s = −ln(−t), Σ′ = Σ/√(−t).
pub fn renormalize_transform<T: Real>(traj: &FlowTrajectory<T>) -> Result<FlowTrajectory<T>> {
    let mut samples = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        if !(s.t >= -T::one() && s.t < T::zero()) {
            return Err(Error::OutsideTimeDomain(s.t.as_f64()));
        }
        let scale = T::one() / (-s.t).sqrt();
        samples.push(Sample {
            t: -(-s.t).ln(),
            surface: s.surface.transformed(&Mat3::identity(), Vec3::zero(), scale)?,
        });
    }
    Ok(FlowTrajectory {
        vectorfield: AmbientVectorField::renormalizing(),
        samples,
        diagnostics: Vec::new(),
        remesh_events: Vec::new(),
        status: traj.status,
        extinction_time: None,
        message: traj.message.clone(),
    })
}

/// Inverse of [`renormalize_transform`]: t = −e^{−s}, Σ = e^{−s/2} Σ′, for s ≥ 0.
pub fn unrenormalize_transform<T: Real>(traj: &FlowTrajectory<T>) -> Result<FlowTrajectory<T>> {
    let mut samples = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        if !(s.t >= T::zero()) || !s.t.is_finite() {
            return Err(Error::OutsideTimeDomain(s.t.as_f64()));
        }
        let t = -(-s.t).exp();
        samples.push(Sample {
            t,
            surface: s.surface.transformed(&Mat3::identity(), Vec3::zero(), (-t).sqrt())?,
        });
    }
    Ok(FlowTrajectory {
        vectorfield: AmbientVectorField::zero(),
        samples,
        diagnostics: Vec::new(),
        remesh_events: Vec::new(),
        status: traj.status,
        extinction_time: traj.extinction_time.map(|s| -(-s).exp()),
        message: traj.message.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, FlowConfig, SampleSchedule};
    use crate::shapes;

    #[test]
    fn stationary_shrinker_maps_to_shrinking_circle() {
        let c = shapes::circle(2f64.sqrt(), 128, Vec3::<f64>::zero()).unwrap();
        let cfg = FlowConfig { samples: SampleSchedule::Every(0.25), ..FlowConfig::default() };
        let tr = run(&c, &AmbientVectorField::renormalizing(), 2.0, &cfg).unwrap();
        let back = unrenormalize_transform(&tr).unwrap();
        for s in &back.samples {
            assert!(s.t >= -1.0 && s.t <= -(-2.0f64).exp() + 1e-12);
            let r = s.surface.vertices()[0].norm();
            assert!((r - (-2.0 * s.t).sqrt()).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        let c = shapes::circle(1.0, 32, Vec3::<f64>::zero()).unwrap();
        let tr = run(&c, &AmbientVectorField::zero(), 0.1, &FlowConfig::default()).unwrap();
        assert!(matches!(renormalize_transform(&tr), Err(Error::OutsideTimeDomain(_))));
    }
}
