use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DiscreteHypersurface, Elements, FieldKind, VectorField};
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GaussianAreaResult<T> {
    pub value: T,
    /// |F_refined − F| / 3 for one uniform midpoint refinement.
    pub quadrature_error_estimate: T,
}

fn normalization<T: Real>(m: usize) -> T {
    (T::lit(4.0) * T::PI()).powf(-T::from_usize_lossy(m) / T::lit(2.0))
}

/// Gaussian weight of a point after the map x ↦ λ(x − x₀).
#[inline]
fn kernel<T: Real>(x: Vec3<T>, center: Vec3<T>, lambda2: T) -> T {
    (-(x - center).norm_squared() * lambda2 / T::lit(4.0)).exp()
}

/// Vertex-lumped sum and the same rule on the once-refined mesh.
fn lumped_sums<T: Real>(s: &DiscreteHypersurface<T>, center: Vec3<T>, lambda: T) -> (T, T) {
    let v = s.vertices();
    let l2 = lambda * lambda;
    let g: Vec<T> = v.iter().map(|&x| kernel(x, center, l2)).collect();
    let mut coarse = T::zero();
    let mut fine = T::zero();
    let half = T::lit(0.5);
    match s.elements() {
        Elements::Segments(segs) => {
            let (q, h) = (T::lit(0.25), half);
            for e in segs {
                let len = v[e[0]].distance(v[e[1]]);
                let gm = kernel((v[e[0]] + v[e[1]]) * half, center, l2);
                coarse += len * half * (g[e[0]] + g[e[1]]);
                fine += len * (q * (g[e[0]] + g[e[1]]) + h * gm);
            }
        }
        Elements::Triangles(tris) => {
            let third = T::one() / T::lit(3.0);
            let twelfth = T::one() / T::lit(12.0);
            let quarter = T::lit(0.25);
            for t in tris {
                let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
                let area = (b - a).cross(c - a).norm() * half;
                let corners = g[t[0]] + g[t[1]] + g[t[2]];
                let mids = kernel((a + b) * half, center, l2)
                    + kernel((b + c) * half, center, l2)
                    + kernel((c + a) * half, center, l2);
                coarse += area * third * corners;
                fine += area * (twelfth * corners + quarter * mids);
            }
        }
    }
    (coarse, fine)
}

/// F[M] = (4π)^{−m/2} Σ_v w_v e^{−|x_v|²/4}.
pub fn gaussian_area<T: Real>(s: &DiscreteHypersurface<T>) -> GaussianAreaResult<T> {
    evaluate(s, Vec3::zero(), T::one())
}

fn evaluate<T: Real>(s: &DiscreteHypersurface<T>, center: Vec3<T>, lambda: T) -> GaussianAreaResult<T> {
    if s.element_count() == 0 {
        return GaussianAreaResult {
            value: T::zero(),
            quadrature_error_estimate: T::zero(),
        };
    }
    let m = s.intrinsic_dim();
    let c = normalization::<T>(m) * lambda.powi(m as i32);
    let (coarse, fine) = lumped_sums(s, center, lambda);
    GaussianAreaResult {
        value: c * coarse,
        quadrature_error_estimate: c * (fine - coarse).abs() / T::lit(3.0),
    }
}

/// F[λ(x − x₀)] evaluated on the original vertices.
pub fn f_translate_scale<T: Real>(s: &DiscreteHypersurface<T>, center: Vec3<T>, scale: T) -> Result<GaussianAreaResult<T>> {
    if !(scale > T::zero()) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("scale must be positive (got {scale})")));
    }
    Ok(evaluate(s, center, scale))
}

/// F[λ(x − x₀)] and its gradient with respect to (x₀, log λ).
pub fn f_with_gradient<T: Real>(s: &DiscreteHypersurface<T>, center: Vec3<T>, scale: T) -> (T, Vec3<T>, T) {
    let m = s.intrinsic_dim();
    let w = s.vertex_measures();
    let l2 = scale * scale;
    let mm = T::from_usize_lossy(m);
    let half = T::lit(0.5);
    let mut f = T::zero();
    let mut gc = Vec3::zero();
    let mut gs = T::zero();
    for (x, &wv) in s.vertices().iter().zip(w.iter()) {
        let d = *x - center;
        let term = wv * kernel(*x, center, l2);
        f += term;
        gc += d * (term * l2 * half);
        gs += term * (mm - l2 * d.norm_squared() * half);
    }
    let c = normalization::<T>(m) * scale.powi(m as i32);
    (f * c, gc * c, gs * c)
}

/// Kernel quadrature that subdivides elements wider than `resolution / λ`
/// near the center; on resolved elements it is the vertex-lumped rule.
pub(crate) struct KernelQuadrature<'a, T> {
    surface: &'a DiscreteHypersurface<T>,
    measures: Vec<T>,
    diameters: Vec<T>,
    centroids: Vec<Vec3<T>>,
    resolution: T,
}

/// Exponent beyond which the Gaussian weight is treated as zero.
const FAR_EXPONENT: f64 = 40.0;
const MAX_DEPTH: usize = 12;

impl<'a, T: Real> KernelQuadrature<'a, T> {
    pub(crate) fn new(surface: &'a DiscreteHypersurface<T>, resolution: T) -> Self {
        let v = surface.vertices();
        let mut diameters = Vec::with_capacity(surface.element_count());
        let mut centroids = Vec::with_capacity(surface.element_count());
        for e in 0..surface.element_count() {
            let ids = surface.elements().vertices_of(e);
            let mut d = T::zero();
            for a in 0..ids.len() {
                for b in a + 1..ids.len() {
                    d = d.max(v[ids[a]].distance(v[ids[b]]));
                }
            }
            diameters.push(d);
            let c = ids.iter().map(|&i| v[i]).sum::<Vec3<T>>() / T::from_usize_lossy(ids.len());
            centroids.push(c);
        }
        Self {
            surface,
            measures: surface.element_measures(),
            diameters,
            centroids,
            resolution,
        }
    }

    /// F[λ(x − x₀)] with gradient in (x₀, log λ).
    pub(crate) fn eval(&self, center: Vec3<T>, scale: T) -> (T, Vec3<T>, T) {
        let s = self.surface;
        let m = s.intrinsic_dim();
        let v = s.vertices();
        let l2 = scale * scale;
        let mm = T::from_usize_lossy(m);
        let half = T::lit(0.5);
        let share = T::one() / T::from_usize_lossy(m + 1);
        let limit = self.resolution / scale;
        let far = T::lit(FAR_EXPONENT);
        let mut lumped = vec![T::zero(); s.vertex_count()];
        let mut points: Vec<(Vec3<T>, T)> = Vec::new();
        let is_far = |c: Vec3<T>, d: T| {
            let gap = ((c - center).norm() - d).max(T::zero());
            gap * gap * l2 / T::lit(4.0) > far
        };
        for e in 0..s.element_count() {
            let ids = s.elements().vertices_of(e);
            if self.diameters[e] <= limit || is_far(self.centroids[e], self.diameters[e]) {
                for &i in ids {
                    lumped[i] += self.measures[e] * share;
                }
                continue;
            }
            let mut stack: Vec<(Vec<Vec3<T>>, T, usize)> = vec![(ids.iter().map(|&i| v[i]).collect(), self.measures[e], 0)];
            while let Some((pts, measure, depth)) = stack.pop() {
                let mut d = T::zero();
                for a in 0..pts.len() {
                    for b in a + 1..pts.len() {
                        d = d.max(pts[a].distance(pts[b]));
                    }
                }
                let c = pts.iter().copied().sum::<Vec3<T>>() / T::from_usize_lossy(pts.len());
                if d <= limit || depth >= MAX_DEPTH || is_far(c, d) {
                    for p in pts {
                        points.push((p, measure * share));
                    }
                    continue;
                }
                if pts.len() == 2 {
                    let mid = (pts[0] + pts[1]) * half;
                    stack.push((vec![pts[0], mid], measure * half, depth + 1));
                    stack.push((vec![mid, pts[1]], measure * half, depth + 1));
                } else {
                    let q = measure * T::lit(0.25);
                    let (a, b, cc) = (pts[0], pts[1], pts[2]);
                    let (ab, bc, ca) = ((a + b) * half, (b + cc) * half, (cc + a) * half);
                    stack.push((vec![a, ab, ca], q, depth + 1));
                    stack.push((vec![ab, b, bc], q, depth + 1));
                    stack.push((vec![ca, bc, cc], q, depth + 1));
                    stack.push((vec![ab, bc, ca], q, depth + 1));
                }
            }
        }
        let mut f = T::zero();
        let mut gc = Vec3::zero();
        let mut gs = T::zero();
        let mut add = |x: Vec3<T>, w: T| {
            if w == T::zero() {
                return;
            }
            let d = x - center;
            let term = w * kernel(x, center, l2);
            f += term;
            gc += d * (term * l2 * half);
            gs += term * (mm - l2 * d.norm_squared() * half);
        };
        for (x, w) in v.iter().zip(&lumped) {
            add(*x, *w);
        }
        for (x, w) in points {
            add(x, w);
        }
        let c = normalization::<T>(m) * scale.powi(m as i32);
        (f * c, gc * c, gs * c)
    }
}

/// E[S^k] = ω_k (k / (2πe))^{k/2}, ω_k = 2π^{(k+1)/2} / Γ((k+1)/2).
pub fn stone_entropy(k: i64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter(format!("sphere dimension must be at least 1 (got {k})")));
    }
    let kf = k as f64;
    let half = (kf + 1.0) / 2.0;
    let ln_omega = std::f64::consts::LN_2 + half * std::f64::consts::PI.ln() - statrs::function::gamma::ln_gamma(half);
    let ln_rest = kf / 2.0 * (kf.ln() - (2.0 * std::f64::consts::PI).ln() - 1.0);
    Ok((ln_omega + ln_rest).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ResidualReport<T> {
    pub field: VectorField<T>,
    pub sup_norm: T,
    pub l2_norm: T,
}

/// Pointwise H + x^⊥/2 with sup and measure-weighted L² norms.
pub fn shrinker_residual<T: Real>(s: &DiscreteHypersurface<T>) -> Result<ResidualReport<T>> {
    let h = s.mean_curvature_vector();
    let nu = s.outward_normals()?;
    let half = T::lit(0.5);
    let values = s
        .vertices()
        .iter()
        .zip(h.iter().zip(nu.iter()))
        .map(|(x, (hv, n))| *hv + *n * (x.dot(*n) * half))
        .collect();
    let field = VectorField::new(FieldKind::Residual, values);
    let w = s.vertex_measures();
    Ok(ResidualReport {
        sup_norm: field.sup_norm(),
        l2_norm: field.weighted_l2(&w),
        field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use crate::vector::Mat3;

    #[test]
    fn circle_at_shrinker_radius() {
        let c = shapes::circle(2f64.sqrt(), 512, Vec3::<f64>::zero()).unwrap();
        let f = gaussian_area(&c);
        let exact = (2.0 * std::f64::consts::PI / std::f64::consts::E).sqrt();
        assert!((f.value - exact).abs() < 1e-3);
        assert!(f.quadrature_error_estimate < 1e-4);
    }

    #[test]
    fn empty_surface_has_zero_area() {
        let e = DiscreteHypersurface::<f64>::empty(3).unwrap();
        assert_eq!(gaussian_area(&e).value, 0.0);
    }

    #[test]
    fn translate_scale_identity_and_rejection() {
        let s = shapes::icosphere(1.3, 2, Vec3::new(0.1, 0.2, -0.3)).unwrap();
        assert_eq!(f_translate_scale(&s, Vec3::<f64>::zero(), 1.0).unwrap(), gaussian_area(&s));
        assert!(f_translate_scale(&s, Vec3::<f64>::zero(), 0.0).is_err());
        assert!(f_translate_scale(&s, Vec3::<f64>::zero(), -1.0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s = shapes::icosphere(1.0, 2, Vec3::new(0.3, 0.0, 0.1)).unwrap();
        let c = Vec3::new(0.1, -0.2, 0.05);
        let lam: f64 = 1.7;
        let (f, g, gs) = f_with_gradient(&s, c, lam);
        let eps = 1e-6;
        for k in 0..3 {
            let mut cp = c;
            cp[k] += eps;
            let mut cm = c;
            cm[k] -= eps;
            let fd = (f_with_gradient(&s, cp, lam).0 - f_with_gradient(&s, cm, lam).0) / (2.0 * eps);
            assert!((fd - g[k]).abs() < 1e-7, "{fd} vs {}", g[k]);
        }
        let fd = (f_with_gradient(&s, c, lam * eps.exp()).0 - f_with_gradient(&s, c, lam * (-eps).exp()).0) / (2.0 * eps);
        assert!((fd - gs).abs() < 1e-7);
        assert!((f - f_translate_scale(&s, c, lam).unwrap().value).abs() < 1e-14);
    }

    #[test]
    fn resolved_kernel_quadrature_is_the_lumped_rule() {
        let s = shapes::icosphere(1.0, 3, Vec3::<f64>::zero()).unwrap();
        let q = KernelQuadrature::new(&s, 0.5);
        let c = Vec3::new(0.1, 0.0, -0.2);
        let (a, ga, sa) = q.eval(c, 1.5);
        let (b, gb, sb) = f_with_gradient(&s, c, 1.5);
        assert!((a - b).abs() < 1e-13 && (ga - gb).norm() < 1e-13 && (sa - sb).abs() < 1e-13);
    }

    #[test]
    fn refined_quadrature_stays_bounded_at_vertices() {
        let s = shapes::icosphere(1.0, 2, Vec3::<f64>::zero()).unwrap();
        let q = KernelQuadrature::new(&s, 0.5);
        let x = s.vertices()[0];
        for lam in [10.0, 100.0, 1000.0] {
            let (f, _, _) = q.eval(x, lam);
            assert!(f < 1.05, "F = {f} at scale {lam}");
        }
        assert!(f_with_gradient(&s, x, 1000.0).0 > 10.0);
        let seg = shapes::circle(1.0, 16, Vec3::<f64>::zero()).unwrap();
        let q = KernelQuadrature::new(&seg, 0.5);
        let (f, _, _) = q.eval(seg.vertices()[3], 500.0);
        assert!((f - 1.0).abs() < 1e-2, "{f}");
    }

    #[test]
    fn rotation_invariance() {
        let s = shapes::torus(0.5, 1.5, 16, 40, Vec3::new(0.2, 0.1, 0.0)).unwrap();
        let r = Mat3::rotation(Vec3::<f64>::new(0.3, -1.0, 0.2), 2.1);
        let rs = s.transformed(&r, Vec3::<f64>::zero(), 1.0).unwrap();
        assert!((gaussian_area(&s).value - gaussian_area(&rs).value).abs() < 1e-10);
    }

    #[test]
    fn stone_values() {
        assert!((stone_entropy(1).unwrap() - (2.0 * std::f64::consts::PI / std::f64::consts::E).sqrt()).abs() < 1e-12);
        assert!((stone_entropy(2).unwrap() - 4.0 / std::f64::consts::E).abs() < 1e-12);
        assert!(stone_entropy(0).is_err());
        assert!(stone_entropy(-3).is_err());
    }

    #[test]
    fn residual_of_unit_circle() {
        let c = shapes::circle(1.0, 512, Vec3::<f64>::zero()).unwrap();
        let r = shrinker_residual(&c).unwrap();
        assert!((r.sup_norm - 0.5).abs() < 2e-2);
        let s = shapes::circle(2f64.sqrt(), 512, Vec3::<f64>::zero()).unwrap();
        assert!(shrinker_residual(&s).unwrap().sup_norm < 5e-3);
    }
}
