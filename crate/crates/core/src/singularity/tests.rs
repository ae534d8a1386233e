use super::*;
use crate::flow::{run, AmbientVectorField, FlowConfig, SampleSchedule};
use crate::functionals::entropy;
use crate::functionals::OptConfig;
use crate::shapes::{circle, icosphere};
use crate::vector::{Mat3, Vec3};

fn shrink(s: &crate::geometry::DiscreteHypersurface<f64>, horizon: f64, every: f64) -> crate::flow::FlowTrajectory<f64> {
    let cfg = FlowConfig {
        samples: SampleSchedule::Every(every),
        ..FlowConfig::default()
    };
    run(s, &AmbientVectorField::zero(), horizon, &cfg).unwrap()
}

#[test]
fn shrinking_circle_is_spherical_at_its_center() {
    let c = circle(1.0, 256, Vec3::new(0.3, -0.2, 0.0)).unwrap();
    let tr = shrink(&c, 1.0, 0.02);
    let track = Track::parametric(&tr).unwrap();
    let pts = detect_singularities(&track);
    assert_eq!(pts.len(), 1, "{pts:?}");
    let p = pts[0];
    assert_eq!(p.source, CandidateSource::Extinction);
    assert!(p.x.distance(Vec3::new(0.3, -0.2, 0.0)) < 1e-3);
    assert!((p.t - 0.5).abs() < 3e-3, "{}", p.t);
    let cl = classify_tangent_flow(&track, p.x, p.t, &ClassifyConfig::default()).unwrap();
    assert_eq!(cl.j, 1);
    assert_eq!(cl.label, TangentFlowLabel::Spherical);
    assert!(cl.fit_residual <= 0.05, "{}", cl.fit_residual);
    assert!(cl.density_match.unwrap() <= 0.05);
    assert!(cl.convex_type);
}

#[test]
fn sampling_depth_does_not_change_the_class() {
    let c = circle(1.0, 256, Vec3::zero()).unwrap();
    let tr = shrink(&c, 1.0, 0.02);
    let track = Track::parametric(&tr).unwrap();
    let p = detect_singularities(&track)[0];
    let a = classify_tangent_flow(&track, p.x, p.t, &ClassifyConfig { depth: 3, ..Default::default() }).unwrap();
    let b = classify_tangent_flow(&track, p.x, p.t, &ClassifyConfig { depth: 5, ..Default::default() }).unwrap();
    assert_eq!(a.samples_used.len(), 3);
    assert_eq!(b.samples_used.len(), 5);
    assert_eq!((a.j, a.label), (b.j, b.label));
}

#[test]
fn shrinking_sphere_matches_four_over_e() {
    let s = icosphere(1.0, 3, Vec3::zero()).unwrap();
    let tr = shrink(&s, 0.5, 0.02);
    let track = Track::parametric(&tr).unwrap();
    let pts = detect_singularities(&track);
    assert_eq!(pts.len(), 1, "{pts:?}");
    let cl = classify_tangent_flow(&track, pts[0].x, pts[0].t, &ClassifyConfig::default()).unwrap();
    assert_eq!(cl.j, 2);
    assert_eq!(cl.label, TangentFlowLabel::Spherical);
    let d = cl.density_match.unwrap();
    assert!(d <= 0.05, "{d}");
    assert!((cl.theta.unwrap() - 4.0 / std::f64::consts::E).abs() < 0.05 * 4.0 / std::f64::consts::E);
}

#[test]
fn stationary_shrinker_has_no_singularity() {
    let c = circle(2f64.sqrt(), 256, Vec3::zero()).unwrap();
    let cfg = FlowConfig {
        samples: SampleSchedule::Every(0.1),
        ..FlowConfig::default()
    };
    let tr = run(&c, &AmbientVectorField::renormalizing(), 2.0, &cfg).unwrap();
    let track = Track::parametric(&tr).unwrap();
    assert!(detect_singularities(&track).is_empty());
}

#[test]
fn rotating_the_trajectory_rotates_the_frame() {
    let c = icosphere(1.0, 3, Vec3::zero()).unwrap();
    let tr = shrink(&c, 0.5, 0.02);
    let track = Track::parametric(&tr).unwrap();
    let p = detect_singularities(&track)[0];
    let cfg = ClassifyConfig::default();
    let a = classify_tangent_flow(&track, p.x, p.t, &cfg).unwrap();
    assert!(a.fit_residual.is_finite());
    let rot = Mat3::rotation(Vec3::new(1.0, 2.0, -0.5) / 5.25f64.sqrt(), 0.7);
    let shift = Vec3::new(0.4, -1.0, 2.0);
    let moved = track.transformed(&rot, shift).unwrap();
    let b = classify_tangent_flow(&moved, rot.apply(p.x) + shift, p.t, &cfg).unwrap();
    assert_eq!((a.j, a.label), (b.j, b.label));
    assert!((a.fit_residual - b.fit_residual).abs() < 1e-8, "{} {}", a.fit_residual, b.fit_residual);
}

fn cylinder_track(rot: &Mat3<f64>) -> Track<'static, f64> {
    let t0 = 0.05;
    let samples = [0.01, 0.02, 0.03, 0.035, 0.04]
        .iter()
        .map(|&t: &f64| {
            let r = (2.0 * (t0 - t)).sqrt();
            let c = crate::shapes::cylinder(r, 2.0, 96, Vec3::zero()).unwrap();
            (t, std::borrow::Cow::Owned(c.transformed(rot, Vec3::zero(), 1.0).unwrap()))
        })
        .collect();
    Track {
        ambient_dim: 3,
        samples,
        curvature: Vec::new(),
        topology: Vec::new(),
        extinction_time: None,
        initial_measure: 1.0,
        resolution: 0.01,
        time_step: 1e-3,
        renormalized_source: false,
        min_cluster_records: 1,
    }
}

#[test]
fn shrinking_cylinder_axis_is_equivariant() {
    let cfg = ClassifyConfig {
        refine_time: false,
        ..Default::default()
    };
    let id = Mat3::identity();
    let a = classify_tangent_flow(&cylinder_track(&id), Vec3::zero(), 0.05, &cfg).unwrap();
    assert_eq!(a.label, TangentFlowLabel::Cylindrical { j: 1 }, "{a:?}");
    assert!(a.fit_residual < 0.05);
    assert!(a.axis_fit[2].z.abs() > 1.0 - 1e-6, "{:?}", a.axis_fit);
    let rot = Mat3::rotation(Vec3::new(0.3, -1.0, 0.2) / 1.13f64.sqrt(), 1.1);
    let b = classify_tangent_flow(&cylinder_track(&rot), Vec3::zero(), 0.05, &cfg).unwrap();
    assert_eq!((a.j, a.label), (b.j, b.label));
    assert!((a.fit_residual - b.fit_residual).abs() < 1e-8);
    let expected = rot.apply(a.axis_fit[2]);
    assert!(expected.dot(b.axis_fit[2]).abs() > 1.0 - 1e-6);
}

#[test]
fn chain_holds_for_a_shrinking_circle() {
    let c = circle(1.0, 256, Vec3::zero()).unwrap();
    let tr = shrink(&c, 1.0, 0.02);
    let track = Track::parametric(&tr).unwrap();
    let p = detect_singularities(&track)[0];
    let cl = classify_tangent_flow(&track, p.x, p.t, &ClassifyConfig::default()).unwrap();
    let e0 = entropy(&c, &OptConfig::default()).value;
    let rep = density_entropy_bound_check(std::slice::from_ref(&cl), e0, &BoundCheckConfig::default());
    assert!(rep.holds, "{:?}", rep.failures);
    let entry = &rep.entries[0];
    assert_eq!(entry.model_slack, 0.0);
    let fake = TangentFlowClassification {
        theta: Some(e0 + 0.1),
        ..cl
    };
    let bad = density_entropy_bound_check(&[fake], e0, &BoundCheckConfig::default());
    assert!(!bad.holds);
    assert!(bad.failures[0].contains("point"));
}
