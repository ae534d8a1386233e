//! Independent closed forms checked against the library.

use std::f64::consts::{E, PI};

use mcflab::flow::{self, AmbientVectorField, FlowConfig, SampleSchedule};
use mcflab::functionals::{f_translate_scale, gaussian_area, stone_entropy};
use mcflab::levelset::{enclosed_volume, GridConfig, GridGeometry, LevelSetRegion};
use mcflab::shapes;
use mcflab::Point;
use statrs::function::erf::erf;

/// |S^k| from |S^0| = 2, |S^1| = 2π and |S^k| = 2π |S^{k−2}| / (k − 1).
fn sphere_area(k: usize) -> f64 {
    let mut a = [2.0, 2.0 * PI];
    for j in 2..=k {
        a[j % 2] *= 2.0 * PI / (j as f64 - 1.0);
    }
    a[k % 2]
}

/// The round sphere of radius √(2k) gives the sup over radii of F.
fn sphere_entropy_oracle(k: usize) -> f64 {
    let kf = k as f64;
    sphere_area(k) * (kf / (2.0 * PI * E)).powf(kf / 2.0)
}

/// F of a regular n-gon of circumradius r centred at the origin.
fn polygon_f(r: f64, n: usize) -> f64 {
    let d = r * (PI / n as f64).cos();
    let a = r * (PI / n as f64).sin();
    n as f64 * (-d * d / 4.0).exp() * erf(a / 2.0)
}

#[test]
fn stone_entropy_matches_the_recursion() {
    for k in 1..=40 {
        let (got, want) = (stone_entropy(k as i64).unwrap(), sphere_entropy_oracle(k));
        assert!((got - want).abs() <= 1e-12 * want, "k = {k}: {got} vs {want}");
    }
    assert!((sphere_entropy_oracle(1) - (2.0 * PI / E).sqrt()).abs() < 1e-14);
    assert!((sphere_entropy_oracle(2) - 4.0 / E).abs() < 1e-14);
}

#[test]
fn polygon_gaussian_area_matches_the_edge_integrals() {
    for &(r, n) in &[(2f64.sqrt(), 256), (1.0, 512), (3.0, 1024)] {
        let s = shapes::circle(r, n, Point::zero()).unwrap();
        let f = gaussian_area(&s);
        let want = polygon_f(r, n);
        assert!((f.value - want).abs() <= 5.0 * f.quadrature_error_estimate + 1e-13, "r = {r}: {} vs {want}", f.value);
    }
}

#[test]
fn scaled_square_matches_the_error_function() {
    let s = shapes::flat_square(4.0, 64).unwrap();
    for &lambda in &[0.5, 1.0, 2.0] {
        let f = f_translate_scale(&s, Point::zero(), lambda).unwrap();
        let want = erf(lambda).powi(2);
        assert!((f.value - want).abs() <= 5.0 * f.quadrature_error_estimate + 1e-12, "lambda = {lambda}: {} vs {want}", f.value);
    }
}

fn mean_radius(s: &mcflab::Surface) -> f64 {
    s.vertices().iter().map(|v| v.norm()).sum::<f64>() / s.vertex_count() as f64
}

#[test]
fn circle_radius_follows_both_flow_laws() {
    let cfg = FlowConfig {
        samples: SampleSchedule::Times(vec![0.3]),
        ..FlowConfig::default()
    };
    let s = shapes::circle(1.2, 256, Point::zero()).unwrap();
    for (field, want) in [
        (AmbientVectorField::zero(), (1.44f64 - 0.6).sqrt()),
        (AmbientVectorField::renormalizing(), (2.0 - 0.56 * 0.3f64.exp()).sqrt()),
    ] {
        let traj = flow::run(&s, &field, 0.3, &cfg).unwrap();
        let got = mean_radius(&traj.last().surface);
        assert!((got - want).abs() <= 5e-3 * want, "{}: {got} vs {want}", field.kind_name());
    }
}

#[test]
fn sphere_radius_follows_mean_curvature_flow() {
    let cfg = FlowConfig {
        samples: SampleSchedule::Times(vec![0.1]),
        ..FlowConfig::default()
    };
    let s = shapes::icosphere(1.0, 3, Point::zero()).unwrap();
    let traj = flow::run(&s, &AmbientVectorField::zero(), 0.1, &cfg).unwrap();
    let want = (1.0f64 - 0.4).sqrt();
    let got = mean_radius(&traj.last().surface);
    assert!((got - want).abs() <= 2e-2 * want, "{got} vs {want}");
}

#[test]
fn disc_area_on_a_grid() {
    let h = 1.0 / 64.0;
    let g = GridGeometry::new(2, Point::new(-1.0, -1.0, 0.0), Point::new(1.0, 1.0, 0.0), h).unwrap();
    let cfg = GridConfig { h, ..GridConfig::default() };
    for &r in &[0.3, 0.5, 0.7] {
        let region = LevelSetRegion::from_implicit(g, |p: Point| p.norm() - r, AmbientVectorField::zero(), cfg.clone()).unwrap();
        let want = PI * r * r;
        let got = enclosed_volume(&region);
        assert!((got - want).abs() <= 2.0 * PI * r * h * h, "r = {r}: {got} vs {want}");
    }
}
