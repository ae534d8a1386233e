use serde::{Deserialize, Serialize};

use super::field::AmbientVectorField;
use super::step::normal_field;
use crate::error::{Error, Result};
use crate::geometry::DiscreteHypersurface;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionSide {
    /// The bounded region enclosed by the surface.
    Inside,
    /// The unbounded complement.
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConvexityReport<T> {
    pub holds: bool,
    /// min over vertices of ⟨H + X^⊥, ν_K⟩ with ν_K pointing into the region.
    pub margin: T,
    pub floor: T,
}

/// Floor for the strict predicate: max|H| (max|H| · mean edge)² / 6, the
/// curvature error of an inscribed regular polygon, and never below 1e-8.
pub fn convexity_floor<T: Real>(s: &DiscreteHypersurface<T>) -> T {
    let h = s.mean_curvature_vector().sup_norm();
    let e = s.edge_length_stats().mean;
    let kh = h * e;
    (h * kh * kh / T::lit(6.0)).max(T::lit(1e-8))
}

/// Strict X-mean-convexity: H + X^⊥ points into the region everywhere.
pub fn x_mean_convex<T: Real>(
    s: &DiscreteHypersurface<T>,
    field: &AmbientVectorField<T>,
    side: RegionSide,
    floor: T,
) -> Result<ConvexityReport<T>> {
    let nu = s.outward_normals()?;
    let h = s.mean_curvature_vector();
    let xp = normal_field(&nu, s, field);
    let sign = match side {
        RegionSide::Inside => -T::one(),
        RegionSide::Outside => T::one(),
    };
    let margin = h
        .iter()
        .zip(xp.iter())
        .zip(nu.iter())
        .map(|((hv, xv), n)| (*hv + *xv).dot(*n) * sign)
        .fold(T::infinity(), T::min);
    Ok(ConvexityReport {
        holds: margin > floor,
        margin,
        floor,
    })
}

/// Curvature-radius estimate 1 / max|H|.
pub fn reach_estimate<T: Real>(s: &DiscreteHypersurface<T>) -> T {
    let h = s.mean_curvature_vector().sup_norm();
    if h > T::zero() {
        T::one() / h
    } else {
        T::infinity()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PerturbResult<T> {
    pub surface: DiscreteHypersurface<T>,
    pub report: ConvexityReport<T>,
}

/// Pushes the surface a distance ε into the enclosed region (x ← x − εν) and
/// checks strict X-mean-convexity of the result with respect to that region.
/// With ε = 0 the surface is returned unchanged together with its report.
pub fn inward_perturb<T: Real>(
    s: &DiscreteHypersurface<T>,
    epsilon: T,
    field: &AmbientVectorField<T>,
) -> Result<PerturbResult<T>> {
    if epsilon == T::zero() {
        let report = x_mean_convex(s, field, RegionSide::Inside, convexity_floor(s))?;
        return Ok(PerturbResult { surface: s.clone(), report });
    }
    let limit = reach_estimate(s) / T::lit(4.0);
    if !(epsilon > T::zero()) || !(epsilon < limit) {
        return Err(Error::InvalidParameter(format!(
            "perturbation size {epsilon} must lie in (0, {limit}) (a quarter of the curvature radius)"
        )));
    }
    let nu = s.outward_normals()?;
    let verts = s.vertices().iter().zip(nu.iter()).map(|(x, n)| *x - *n * epsilon).collect();
    let out = s.with_vertices(verts)?;
    let report = x_mean_convex(&out, field, RegionSide::Inside, convexity_floor(&out))?;
    if !report.holds {
        return Err(Error::NotXMeanConvex { margin: report.margin.as_f64() });
    }
    Ok(PerturbResult { surface: out, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use crate::vector::Vec3;

    #[test]
    fn margins_of_round_circles() {
        let f = AmbientVectorField::renormalizing();
        let c1 = shapes::circle(1.0, 512, Vec3::<f64>::zero()).unwrap();
        let r = x_mean_convex(&c1, &f, RegionSide::Inside, convexity_floor(&c1)).unwrap();
        assert!(r.holds && (r.margin - 0.5).abs() < 2e-2);
        let c2 = shapes::circle(2.0, 512, Vec3::<f64>::zero()).unwrap();
        let r = x_mean_convex(&c2, &f, RegionSide::Outside, convexity_floor(&c2)).unwrap();
        assert!(r.holds && (r.margin - 0.5).abs() < 2e-2);
        let s = shapes::circle(2f64.sqrt(), 512, Vec3::<f64>::zero()).unwrap();
        for side in [RegionSide::Inside, RegionSide::Outside] {
            let r = x_mean_convex(&s, &f, side, convexity_floor(&s)).unwrap();
            assert!(!r.holds && r.margin.abs() <= 2e-2);
        }
    }

    #[test]
    fn perturbation_of_shrinkers() {
        let f = AmbientVectorField::renormalizing();
        let c = shapes::circle(2f64.sqrt(), 512, Vec3::<f64>::zero()).unwrap();
        let p = inward_perturb(&c, 0.05, &f).unwrap();
        assert!(p.report.holds);
        for v in p.surface.vertices() {
            assert!((v.norm() - (2f64.sqrt() - 0.05)).abs() < 1e-9);
        }
        let s = shapes::icosphere(2.0, 3, Vec3::<f64>::zero()).unwrap();
        let p = inward_perturb(&s, 0.05, &f).unwrap();
        assert!(p.report.holds);
        let mean = p.surface.vertices().iter().map(|v| v.norm()).sum::<f64>() / p.surface.vertex_count() as f64;
        assert!((mean - 1.95).abs() < 1e-3);
        let id = inward_perturb(&c, 0.0, &f).unwrap();
        assert_eq!(id.surface, c);
        assert!(!id.report.holds);
        assert!(inward_perturb(&c, -0.1, &f).is_err());
        assert!(inward_perturb(&c, 1.0, &f).is_err());
    }

    #[test]
    fn outward_push_fails_the_predicate() {
        let f = AmbientVectorField::renormalizing();
        let c = shapes::circle(2f64.sqrt() + 0.05, 256, Vec3::<f64>::zero()).unwrap();
        assert!(matches!(inward_perturb(&c, 0.01, &f), Err(Error::NotXMeanConvex { .. })));
    }
}
