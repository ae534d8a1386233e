use super::*;
use crate::flow::AmbientVectorField;
use crate::geometry::spatial::hausdorff;
use crate::shapes::{circle, icosphere};
use crate::vector::Vec3;

fn cfg(h: f64, lo: f64, hi: f64, dim: usize) -> GridConfig {
    let z = if dim == 2 { 0.0 } else { lo };
    let zh = if dim == 2 { 0.0 } else { hi };
    GridConfig {
        h,
        bounds: Some(([lo, lo, z], [hi, hi, zh])),
        ..GridConfig::default()
    }
}

fn radius_2d(r: &LevelSetRegion<f64>) -> f64 {
    (enclosed_volume(r) / std::f64::consts::PI).sqrt()
}

#[test]
fn circle_signed_distance() {
    let c = circle(1.0, 256, Vec3::<f64>::zero()).unwrap();
    let h = 1.0 / 64.0;
    let r = from_surface(&c, &cfg(h, -2.0, 2.0, 2), &AmbientVectorField::zero()).unwrap();
    let g = r.geometry;
    let mid = g.dims[0] / 2;
    let origin = g.index(mid, mid, 0);
    assert!(g.position(origin).norm() < 1e-12);
    assert!((r.phi[origin] + 1.0).abs() < 2.0 * h, "{}", r.phi[origin]);
    for (i, p) in r.phi.iter().enumerate().step_by(97) {
        let exact = g.position(i).norm() - 1.0;
        assert!((p - exact).abs() < 2.0 * h, "node {i}: {p} vs {exact}");
    }
}

#[test]
fn inward_orientation_gives_complement() {
    let c = circle(2.0, 256, Vec3::<f64>::zero()).unwrap().reversed();
    let r = from_surface(&c, &cfg(1.0 / 16.0, -3.0, 3.0, 2), &AmbientVectorField::zero()).unwrap();
    let d = distance_to_origin(&r);
    assert!((d - 2.0).abs() < 1.0 / 16.0, "{d}");
}

#[test]
fn margin_is_enforced() {
    let c = circle(1.0, 128, Vec3::<f64>::zero()).unwrap();
    let e = from_surface(&c, &cfg(0.1, -1.3, 1.3, 2), &AmbientVectorField::zero());
    assert!(matches!(e, Err(crate::Error::GridMargin(_))));
}

#[test]
fn sphere_volume_at_h_over_32() {
    let s = icosphere(1.0, 4, Vec3::<f64>::zero()).unwrap();
    let r = from_surface(&s, &cfg(1.0 / 32.0, -1.5, 1.5, 3), &AmbientVectorField::zero()).unwrap();
    let v = enclosed_volume(&r);
    let exact = 4.0 / 3.0 * std::f64::consts::PI;
    assert!((v - exact).abs() / exact < 0.03, "{v}");
    let b = extract_boundary(&r).unwrap();
    assert_eq!(b.component_count(), 1);
    assert!(hausdorff(&b, &s) < 2.0 / 32.0);
    assert!((b.enclosed_measure() - exact).abs() / exact < 0.03);
}

#[test]
fn extraction_is_oriented_outward() {
    let c = circle(1.0, 256, Vec3::<f64>::zero()).unwrap();
    let r = from_surface(&c, &cfg(1.0 / 32.0, -2.0, 2.0, 2), &AmbientVectorField::zero()).unwrap();
    let b = extract_boundary(&r).unwrap();
    assert!(b.signed_enclosed_measure() > 3.0);
    assert!(hausdorff(&b, &c) < 1.0 / 32.0);
}

#[test]
fn shrinking_circle_follows_radius_law() {
    let c = circle(1.0, 256, Vec3::<f64>::zero()).unwrap();
    let h = 1.0 / 32.0;
    let r = from_surface(&c, &cfg(h, -1.5, 1.5, 2), &AmbientVectorField::zero()).unwrap();
    let tr = run(&r, Horizon::Until { t: 0.4 }, &LevelSetRunConfig { sample_interval: 0.1, ..Default::default() }).unwrap();
    for s in &tr.samples {
        let b = s.boundary.as_ref().unwrap();
        let rad = (b.enclosed_measure() / std::f64::consts::PI).sqrt();
        let exact = (1.0 - 2.0 * s.t).sqrt();
        assert!((rad - exact).abs() < 3.0 * h, "t={} r={rad} exact={exact}", s.t);
    }
    assert!(tr.final_region.stats.gradient_ok);
    assert!((radius_2d(&tr.final_region) - 0.2f64.sqrt()).abs() < 3.0 * h);
}

#[test]
fn cfl_violation_is_rejected() {
    let c = circle(1.0, 128, Vec3::<f64>::zero()).unwrap();
    let h = 1.0 / 16.0;
    let r = from_surface(&c, &cfg(h, -2.0, 2.0, 2), &AmbientVectorField::zero()).unwrap();
    assert!(matches!(step(&r, h * h), Err(crate::Error::StabilityCap { .. })));
    assert!(step(&r, h * h / 4.0).is_ok());
}

#[test]
fn extinction_and_distance() {
    let c = circle(0.5, 128, Vec3::<f64>::zero()).unwrap();
    let h = 1.0 / 32.0;
    let r = from_surface(&c, &cfg(h, -1.0, 1.0, 2), &AmbientVectorField::zero()).unwrap();
    assert!(distance_to_origin(&r) < 1e-12);
    let tr = run(&r, Horizon::Until { t: 1.0 }, &LevelSetRunConfig::default()).unwrap();
    assert_eq!(tr.status, RegionStatus::Extinct);
    let te = tr.extinction_time.unwrap();
    assert!((te - 0.125).abs() < 0.0125, "{te}");
    assert!(distance_to_origin(&tr.final_region).is_infinite());
    assert!(extract_boundary(&tr.final_region).unwrap().is_empty());
}

#[test]
fn containment_of_shrinking_disc() {
    let c = circle(1.0, 256, Vec3::<f64>::zero()).unwrap();
    let h = 1.0 / 32.0;
    let r = from_surface(&c, &cfg(h, -1.5, 1.5, 2), &AmbientVectorField::zero()).unwrap();
    let dt = stable_dt(&r) * 0.9;
    let mut later = r.clone();
    while later.t < 0.1 {
        later = step(&later, dt).unwrap();
    }
    let rep = containment_check(&r, &later, None).unwrap();
    assert!(rep.holds, "{rep:?}");
    let back = containment_check(&later, &later, None).unwrap();
    assert!(!back.holds);
    let other = from_surface(&c, &cfg(h, -1.6, 1.6, 2), &AmbientVectorField::zero()).unwrap();
    assert!(matches!(containment_check(&r, &other, None), Err(crate::Error::GridMismatch)));
}

#[test]
fn renormalized_shrinker_is_stationary() {
    let rad = 2f64.sqrt();
    let c = circle(rad, 256, Vec3::<f64>::zero()).unwrap();
    let h = 1.0 / 32.0;
    let r = from_surface(&c, &cfg(h, -2.2, 2.2, 2), &AmbientVectorField::renormalizing()).unwrap();
    let tr = run(&r, Horizon::Until { t: 0.5 }, &LevelSetRunConfig { sample_interval: 0.25, ..Default::default() }).unwrap();
    assert!((radius_2d(&tr.final_region) - rad).abs() < 2.0 * h);
}

#[test]
fn two_discs_are_two_components() {
    let a = circle(0.4, 128, Vec3::<f64>::new(-0.6, 0.0, 0.0)).unwrap();
    let b = circle(0.4, 128, Vec3::new(0.6, 0.0, 0.0)).unwrap();
    let u = crate::geometry::DiscreteHypersurface::union(&[a, b]).unwrap();
    let r = from_surface(&u, &cfg(1.0 / 32.0, -1.5, 1.5, 2), &AmbientVectorField::zero()).unwrap();
    assert_eq!(component_count(&r), 2);
    assert_eq!(extract_boundary(&r).unwrap().component_count(), 2);
}

#[test]
fn snapshot_round_trip() {
    let c = circle(1.0, 64, Vec3::<f64>::zero()).unwrap();
    let r = from_surface(&c, &cfg(1.0 / 8.0, -2.0, 2.0, 2), &AmbientVectorField::renormalizing()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = write_snapshot(&r, dir.path(), "phi").unwrap();
    let back: LevelSetRegion<f64> = read_snapshot(&p).unwrap();
    assert_eq!(back.phi, r.phi);
    assert!(back.geometry.same_as(&r.geometry));
    assert_eq!(back.field, r.field);
}

#[test]
fn implicit_ball_in_space_shrinks() {
    let h = 1.0 / 16.0;
    let g = GridGeometry::new(3, Vec3::splat(-1.5), Vec3::splat(1.5), h).unwrap();
    let r = LevelSetRegion::from_implicit(g, |x| x.norm() - 1.0, AmbientVectorField::zero(), GridConfig { h, ..Default::default() }).unwrap();
    let tr = run(&r, Horizon::Until { t: 0.1 }, &LevelSetRunConfig::default()).unwrap();
    let v = enclosed_volume(&tr.final_region);
    let rad = (v * 3.0 / (4.0 * std::f64::consts::PI)).cbrt();
    let exact = (1.0f64 - 4.0 * 0.1).sqrt();
    assert!((rad - exact).abs() < 3.0 * h, "{rad} vs {exact}");
}
