use std::f64::consts::{PI, TAU};

use mcflab::flow::{self, avoidance_distance, renormalize_transform, unrenormalize_transform, AmbientVectorField, FlowConfig, SampleSchedule};
use mcflab::functionals::{entropy, f_translate_scale, gaussian_area, stone_entropy, OptConfig};
use mcflab::levelset::{self, containment_check, extract_boundary, GridConfig, GridGeometry, LevelSetRegion};
use mcflab::shapes;
use mcflab::{Mat3, Point};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn f_is_invariant_under_rigid_motions(
        angle in 0.0..TAU,
        axis in prop::array::uniform3(-1.0f64..1.0),
        shift in prop::array::uniform3(-2.0f64..2.0),
        center in prop::array::uniform3(-0.5f64..0.5),
        lambda in 0.3f64..3.0,
    ) {
        let axis = Point::from_slice(&axis);
        prop_assume!(axis.norm() > 1e-2);
        let rot = Mat3::rotation(axis, angle);
        let b = Point::from_slice(&shift);
        let x0 = Point::from_slice(&center);
        let s = shapes::icosphere(1.3, 2, Point::zero()).unwrap();
        let moved = s.transformed(&rot, b, 1.0).unwrap();
        let f = f_translate_scale(&s, x0, lambda).unwrap().value;
        let g = f_translate_scale(&moved, rot.apply(x0) + b, lambda).unwrap().value;
        prop_assert!(close(f, g, 1e-12), "{f} vs {g}");
    }

    #[test]
    fn dilation_trades_against_scale(mu in 0.3f64..3.0, lambda in 0.3f64..3.0, r in 0.5f64..3.0) {
        let s = shapes::circle(r, 128, Point::new(0.2, -0.1, 0.0)).unwrap();
        let big = s.transformed(&Mat3::identity(), Point::zero(), mu).unwrap();
        let f = f_translate_scale(&big, Point::zero(), lambda).unwrap().value;
        let g = f_translate_scale(&s, Point::zero(), lambda * mu).unwrap().value;
        prop_assert!(close(f, g, 1e-12), "{f} vs {g}");
    }

    #[test]
    fn transform_round_trips(
        angle in 0.0..TAU,
        shift in prop::array::uniform2(-3.0f64..3.0),
        scale in 0.2f64..5.0,
    ) {
        let rot = Mat3::rotation(Point::axis(2), angle);
        let b = Point::planar(shift[0], shift[1]);
        let s = shapes::circle(1.0, 64, Point::zero()).unwrap();
        let there = s.transformed(&rot, b, scale).unwrap();
        let back = there.translated(-b).unwrap().transformed(&rot.transpose(), Point::zero(), 1.0 / scale).unwrap();
        for (p, q) in s.vertices().iter().zip(back.vertices()) {
            prop_assert!(p.distance(*q) <= 1e-12);
        }
    }

    #[test]
    fn sphere_entropies_decrease_towards_sqrt_two(k in 1i64..200) {
        let a = stone_entropy(k).unwrap();
        let b = stone_entropy(k + 1).unwrap();
        prop_assert!(b < a);
        prop_assert!(b > 2f64.sqrt());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn entropy_dominates_the_gaussian_area(r in 0.4f64..3.0, c in prop::array::uniform2(-0.5f64..0.5)) {
        let s = shapes::circle(r, 128, Point::planar(c[0], c[1])).unwrap();
        let cfg = OptConfig { restarts: 4, ..OptConfig::default() };
        let e = entropy(&s, &cfg);
        prop_assert!(e.value >= gaussian_area(&s).value - 1e-12);
        prop_assert!(e.value >= stone_entropy(1).unwrap() - 1e-2);
    }

    #[test]
    fn renormalization_round_trips(r in 0.8f64..1.6) {
        let cfg = FlowConfig {
            start_time: -1.0,
            samples: SampleSchedule::Every(0.1),
            ..FlowConfig::default()
        };
        let s = shapes::circle(r, 96, Point::zero()).unwrap();
        let traj = flow::run(&s, &AmbientVectorField::zero(), -0.6, &cfg).unwrap();
        let back = unrenormalize_transform(&renormalize_transform(&traj).unwrap()).unwrap();
        prop_assert_eq!(traj.samples.len(), back.samples.len());
        for (a, b) in traj.samples.iter().zip(&back.samples) {
            prop_assert!((a.t - b.t).abs() <= 1e-12);
            for (p, q) in a.surface.vertices().iter().zip(b.surface.vertices()) {
                prop_assert!(p.distance(*q) <= 1e-12);
            }
        }
    }

    #[test]
    fn nested_circles_never_approach(r1 in 0.6f64..1.2, gap in 0.2f64..1.0) {
        let cfg = FlowConfig { samples: SampleSchedule::Every(0.05), ..FlowConfig::default() };
        let inner = shapes::circle(r1, 96, Point::zero()).unwrap();
        let outer = shapes::circle(r1 + gap, 96, Point::zero()).unwrap();
        let horizon = 0.4 * r1 * r1 / 2.0;
        let a = flow::run(&inner, &AmbientVectorField::zero(), horizon, &cfg).unwrap();
        let b = flow::run(&outer, &AmbientVectorField::zero(), horizon, &cfg).unwrap();
        let d = avoidance_distance(&a, &b).unwrap();
        prop_assert!(mcflab::flow::AvoidanceSeries::worst_decrease(&d.distances) <= 1e-3);
    }

    #[test]
    fn extracted_ellipse_boundaries_are_valid(a in 0.3f64..0.8, b in 0.3f64..0.8, angle in 0.0..PI) {
        let h = 1.0 / 48.0;
        let g = GridGeometry::new(2, Point::new(-1.0, -1.0, 0.0), Point::new(1.0, 1.0, 0.0), h).unwrap();
        let (c, s) = (angle.cos(), angle.sin());
        let region = LevelSetRegion::from_implicit(
            g,
            move |p: Point| {
                let (u, v) = (c * p.x + s * p.y, -s * p.x + c * p.y);
                ((u / a).powi(2) + (v / b).powi(2)).sqrt() - 1.0
            },
            AmbientVectorField::zero(),
            GridConfig { h, ..GridConfig::default() },
        )
        .unwrap();
        let m = extract_boundary(&region).unwrap();
        prop_assert!(m.validate(1e-12).is_ok());
        prop_assert!(m.is_closed());
        prop_assert_eq!(m.component_count(), 1);
        prop_assert!((m.enclosed_measure() - PI * a * b).abs() <= 4.0 * PI * a.max(b) * h);
    }

    #[test]
    fn level_set_regions_shrink(a in 0.3f64..0.8, b in 0.3f64..0.8) {
        let h = 1.0 / 48.0;
        let g = GridGeometry::new(2, Point::new(-1.0, -1.0, 0.0), Point::new(1.0, 1.0, 0.0), h).unwrap();
        let region = LevelSetRegion::from_implicit(
            g,
            move |p: Point| ((p.x / a).powi(2) + (p.y / b).powi(2)).sqrt() - 1.0,
            AmbientVectorField::zero(),
            GridConfig { h, ..GridConfig::default() },
        )
        .unwrap();
        let dt = levelset::stable_dt(&region);
        let mut later = region.clone();
        for _ in 0..20 {
            later = levelset::step(&later, dt).unwrap();
        }
        prop_assert!(containment_check(&region, &later, None).unwrap().holds);
    }
}
