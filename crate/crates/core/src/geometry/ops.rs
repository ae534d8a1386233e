use serde::{Deserialize, Serialize};

use super::field::{FieldKind, ScalarField, VectorField};
use super::surface::{DiscreteHypersurface, Elements};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Obtuse triangles with longest-edge²/(2·area) above this cap are reported.
pub const ASPECT_RATIO_CAP: f64 = 50.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurvatureDiagnostics {
    /// Indices of obtuse triangles whose aspect ratio exceeds the cap.
    pub poor_triangles: Vec<usize>,
}

impl<T: Real> DiscreteHypersurface<T> {
    /// Lumped vertex weights: half of each incident segment length, or a
    /// third of each incident triangle area. The weights sum to the total
    /// element measure.
    pub fn vertex_measures(&self) -> ScalarField<T> {
        let mut w = vec![T::zero(); self.vertex_count()];
        let share = T::one() / T::from_usize_lossy(self.intrinsic_dim() + 1);
        let measures = self.element_measures();
        for (e, m) in measures.into_iter().enumerate() {
            for &v in self.elements().vertices_of(e) {
                w[v] += m * share;
            }
        }
        ScalarField::new(FieldKind::MeasureWeight, w)
    }

    /// Lumped mass paired with the Laplacian: vertex measures for polygons,
    /// mixed Voronoi areas for triangle meshes. Both partition the total measure.
    pub fn curvature_mass(&self) -> ScalarField<T> {
        let Elements::Triangles(t) = self.elements() else {
            return self.vertex_measures();
        };
        let v = self.vertices();
        let mut w = vec![T::zero(); self.vertex_count()];
        let (half, quarter, eighth) = (T::lit(0.5), T::lit(0.25), T::lit(0.125));
        for tri in t {
            let p = [v[tri[0]], v[tri[1]], v[tri[2]]];
            let area = (p[1] - p[0]).cross(p[2] - p[0]).norm() * half;
            let dots: [T; 3] = std::array::from_fn(|k| (p[(k + 1) % 3] - p[k]).dot(p[(k + 2) % 3] - p[k]));
            match (0..3).find(|&k| dots[k] < T::zero()) {
                Some(obtuse) => {
                    for k in 0..3 {
                        w[tri[k]] += if k == obtuse { area * half } else { area * quarter };
                    }
                }
                None => {
                    let two_area = area + area;
                    for k in 0..3 {
                        let (q, r) = ((k + 1) % 3, (k + 2) % 3);
                        let cot_q = dots[q] / two_area;
                        let cot_r = dots[r] / two_area;
                        let pr = (p[r] - p[k]).norm_squared();
                        let pq = (p[q] - p[k]).norm_squared();
                        w[tri[k]] += (pr * cot_q + pq * cot_r) * eighth;
                    }
                }
            }
        }
        ScalarField::new(FieldKind::MeasureWeight, w)
    }

    /// Like [`Self::vertex_measures`] but fails when an element is degenerate.
    pub fn checked_vertex_measures(&self) -> Result<ScalarField<T>> {
        let floor = self.degeneracy_floor(T::lit(super::surface::DEFAULT_FLOOR_FACTOR));
        for (i, m) in self.element_measures().into_iter().enumerate() {
            if !(m > floor) {
                return Err(Error::DegenerateElement {
                    index: i,
                    measure: m.as_f64(),
                    floor: floor.as_f64(),
                });
            }
        }
        Ok(self.vertex_measures())
    }

    /// Unnormalized element normals (length = element measure) with the
    /// orientation flag applied.
    pub fn element_normals(&self) -> Vec<Vec3<T>> {
        let v = self.vertices();
        let sign = self.orientation().sign::<T>();
        match self.elements() {
            // Outward for counter-clockwise traversal.
            Elements::Segments(s) => s
                .iter()
                .map(|e| -(v[e[1]] - v[e[0]]).perp() * sign)
                .collect(),
            Elements::Triangles(t) => t
                .iter()
                .map(|e| (v[e[1]] - v[e[0]]).cross(v[e[2]] - v[e[0]]) * (T::lit(0.5) * sign))
                .collect(),
        }
    }

    /// Unit vertex normals pointing away from the enclosed region.
    ///
    /// Polygons average the two incident unit segment normals; triangle
    /// meshes use the area-weighted average.
    pub fn outward_normals(&self) -> Result<VectorField<T>> {
        let mut acc = vec![Vec3::zero(); self.vertex_count()];
        let en = self.element_normals();
        let unit = matches!(self.elements(), Elements::Segments(_));
        for (e, n) in en.into_iter().enumerate() {
            let n = if unit { n / n.norm() } else { n };
            for &v in self.elements().vertices_of(e) {
                acc[v] += n;
            }
        }
        let floor = T::epsilon() * T::lit(16.0);
        let mut out = Vec::with_capacity(acc.len());
        for (i, a) in acc.into_iter().enumerate() {
            let scale = a.max_abs();
            let u = if scale > T::zero() { a / scale } else { a };
            match u.try_normalize(floor) {
                Some(n) => out.push(n),
                None => return Err(Error::FoldOver(i)),
            }
        }
        Ok(VectorField::new(FieldKind::Normal, out))
    }

    /// Previous/next vertex along each polygon vertex (`None` at the ends of
    /// open fixtures).
    pub(crate) fn curve_links(&self) -> Vec<(Option<usize>, Option<usize>)> {
        let mut links = vec![(None, None); self.vertex_count()];
        if let Elements::Segments(s) = self.elements() {
            for e in s {
                links[e[0]].1 = Some(e[1]);
                links[e[1]].0 = Some(e[0]);
            }
        }
        links
    }

    /// Mean curvature vector. Points toward the center of a round sphere
    /// with magnitude m/R.
    pub fn mean_curvature_vector(&self) -> VectorField<T> {
        let (h, diag) = self.mean_curvature_with_diagnostics();
        if !diag.poor_triangles.is_empty() {
            log::warn!(
                "{} obtuse triangles exceed aspect-ratio cap {}",
                diag.poor_triangles.len(),
                ASPECT_RATIO_CAP
            );
        }
        h
    }

    pub fn mean_curvature_with_diagnostics(&self) -> (VectorField<T>, CurvatureDiagnostics) {
        match self.elements() {
            Elements::Segments(_) => (self.turning_angle_curvature(), CurvatureDiagnostics::default()),
            Elements::Triangles(_) => {
                let diag = self.triangle_quality();
                let lap = self.linear_laplacian_of_position();
                (lap, diag)
            }
        }
    }

    /// Polygon curvature from the turning angle θ at each vertex:
    /// |H| = θ / ((ℓ₋ + ℓ₊)/2), directed along t₊ − t₋.
    fn turning_angle_curvature(&self) -> VectorField<T> {
        let v = self.vertices();
        let links = self.curve_links();
        let two = T::lit(2.0);
        let h = links
            .iter()
            .enumerate()
            .map(|(i, l)| match *l {
                (Some(p), Some(n)) => {
                    let din = v[i] - v[p];
                    let dout = v[n] - v[i];
                    let (lin, lout) = (din.norm(), dout.norm());
                    let tin = din / lin;
                    let tout = dout / lout;
                    let cross = tin.x * tout.y - tin.y * tout.x;
                    let theta = cross.atan2(tin.dot(tout)).abs();
                    match (tout - tin).try_normalize(T::min_positive_value()) {
                        Some(dir) => dir * (theta * two / (lin + lout)),
                        None => Vec3::zero(),
                    }
                }
                _ => Vec3::zero(),
            })
            .collect();
        VectorField::new(FieldKind::CurvatureVector, h)
    }

    /// Symmetric Laplacian weights w_ij: 1/ℓ_ij along polygons, (cot α + cot β)/2
    /// on triangle meshes. `L x_i = Σ_j w_ij (x_j − x_i)`.
    pub fn laplacian_weights(&self) -> Vec<Vec<(usize, T)>> {
        let n = self.vertex_count();
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        let v = self.vertices();
        match self.elements() {
            Elements::Segments(s) => {
                for e in s {
                    let w = T::one() / v[e[0]].distance(v[e[1]]);
                    rows[e[0]].push((e[1], w));
                    rows[e[1]].push((e[0], w));
                }
            }
            Elements::Triangles(t) => {
                let half = T::lit(0.5);
                for tri in t {
                    for k in 0..3 {
                        let (i, j, o) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                        let a = v[i] - v[o];
                        let b = v[j] - v[o];
                        let cot = a.dot(b) / a.cross(b).norm();
                        let w = cot * half;
                        rows[i].push((j, w));
                        rows[j].push((i, w));
                    }
                }
                for r in &mut rows {
                    r.sort_unstable_by_key(|p| p.0);
                    let mut merged: Vec<(usize, T)> = Vec::with_capacity(r.len());
                    for &(j, w) in r.iter() {
                        match merged.last_mut() {
                            Some(last) if last.0 == j => last.1 += w,
                            _ => merged.push((j, w)),
                        }
                    }
                    *r = merged;
                }
            }
        }
        rows
    }

    /// M⁻¹ L x with lumped vertex measures M.
    pub fn linear_laplacian_of_position(&self) -> VectorField<T> {
        let w = self.laplacian_weights();
        let m = self.curvature_mass();
        let v = self.vertices();
        let h = w
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let s: Vec3<T> = row.iter().map(|&(j, wij)| (v[j] - v[i]) * wij).sum();
                if m[i] > T::zero() {
                    s / m[i]
                } else {
                    Vec3::zero()
                }
            })
            .collect();
        VectorField::new(FieldKind::CurvatureVector, h)
    }

    fn triangle_quality(&self) -> CurvatureDiagnostics {
        let mut poor = Vec::new();
        if let Elements::Triangles(t) = self.elements() {
            let v = self.vertices();
            for (i, tri) in t.iter().enumerate() {
                let e = [
                    v[tri[1]] - v[tri[0]],
                    v[tri[2]] - v[tri[1]],
                    v[tri[0]] - v[tri[2]],
                ];
                let area = e[0].cross(e[2]).norm() * T::lit(0.5);
                let longest = e.iter().map(|x| x.norm_squared()).fold(T::zero(), T::max);
                let obtuse = (0..3).any(|k| e[k].dot(-e[(k + 2) % 3]) < T::zero());
                if obtuse && longest > T::lit(2.0 * ASPECT_RATIO_CAP) * area {
                    poor.push(i);
                }
            }
        }
        CurvatureDiagnostics { poor_triangles: poor }
    }

    /// Per-vertex ⟨v, ν⟩ν.
    pub fn normal_projection(&self, field: &VectorField<T>) -> Result<VectorField<T>> {
        field.check_len(self.vertex_count())?;
        let nu = self.outward_normals()?;
        Ok(project_onto(&nu, field))
    }
}

/// ⟨v, ν⟩ν against precomputed normals.
pub(crate) fn project_onto<T: Real>(normals: &VectorField<T>, field: &VectorField<T>) -> VectorField<T> {
    VectorField::new(
        field.kind,
        normals
            .values
            .iter()
            .zip(field.values.iter())
            .map(|(n, v)| *n * n.dot(*v))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use crate::vector::Mat3;

    fn polygon(n: usize, r: f64, c: Vec3<f64>) -> DiscreteHypersurface<f64> {
        shapes::circle(r, n, c).unwrap()
    }

    #[test]
    fn inscribed_square_weights() {
        let s = polygon(4, 1.0, Vec3::<f64>::zero());
        let w = s.vertex_measures();
        for x in w.iter() {
            assert!((x - 2f64.sqrt()).abs() < 1e-14);
        }
        assert!((w.sum() - 4.0 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn icosphere_area_converges() {
        let s = shapes::icosphere(1.0, 4, Vec3::<f64>::zero()).unwrap();
        let total = s.vertex_measures().sum();
        assert!((total - s.total_measure()).abs() < 1e-12);
        assert!(((total - 4.0 * std::f64::consts::PI) / (4.0 * std::f64::consts::PI)).abs() < 1e-2);
    }

    #[test]
    fn circle_normals_are_radial() {
        let c = Vec3::planar(0.3, -2.0);
        let s = polygon(64, 1.5, c);
        let nu = s.outward_normals().unwrap();
        for (x, n) in s.vertices().iter().zip(nu.iter()) {
            let r = (*x - c) / (*x - c).norm();
            assert!((*n - r).norm() < 1e-12);
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
        let flipped = s.reversed().outward_normals().unwrap();
        for (a, b) in nu.iter().zip(flipped.iter()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn translated_sphere_normals() {
        let c = Vec3::<f64>::new(1.0, -0.5, 2.0);
        let s = shapes::icosphere(1.0, 4, c).unwrap();
        let nu = s.outward_normals().unwrap();
        for (x, n) in s.vertices().iter().zip(nu.iter()) {
            let r = (*x - c) / (*x - c).norm();
            assert!((*n - r).norm() < 1e-2);
        }
    }

    #[test]
    fn circle_curvature_magnitude_and_direction() {
        let r = 2f64.sqrt();
        let s = polygon(256, r, Vec3::<f64>::zero());
        let h = s.mean_curvature_vector();
        for (x, hv) in s.vertices().iter().zip(h.iter()) {
            assert!((hv.norm() - 1.0 / r).abs() < 1e-3);
            assert!(hv.dot(*x) < 0.0);
        }
    }

    #[test]
    fn sphere_curvature_magnitude() {
        let s = shapes::icosphere(2.0, 4, Vec3::<f64>::zero()).unwrap();
        let h = s.mean_curvature_vector();
        for (x, hv) in s.vertices().iter().zip(h.iter()) {
            assert!((hv.norm() - 1.0).abs() < 2e-2, "|H| = {}", hv.norm());
            assert!(hv.dot(*x) < 0.0);
        }
    }

    #[test]
    fn flat_patch_has_zero_curvature() {
        // 5×5 grid of vertices in the plane z = 0.
        let n = 5;
        let mut v = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let jitter = if (i + j) % 2 == 0 { 0.013 } else { -0.007 };
                v.push(Vec3::new(i as f64 + jitter, j as f64 - jitter, 0.0));
            }
        }
        let mut t = Vec::new();
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let a = j * n + i;
                t.push([a, a + 1, a + n + 1]);
                t.push([a, a + n + 1, a + n]);
            }
        }
        let patch = DiscreteHypersurface::open_patch(3, v, Elements::Triangles(t));
        let h = patch.mean_curvature_vector();
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                assert!(h[j * n + i].norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn projection_examples() {
        let r = 1.7;
        let s = polygon(128, r, Vec3::<f64>::zero());
        let rot = VectorField::new(
            FieldKind::Other,
            s.vertices().iter().map(|x| Vec3::planar(-x.y, x.x)).collect(),
        );
        assert!(s.normal_projection(&rot).unwrap().sup_norm() < 1e-12);
        let nu = s.outward_normals().unwrap();
        let p = s.normal_projection(&nu).unwrap();
        for (a, b) in p.iter().zip(nu.iter()) {
            assert!((*a - *b).norm() < 1e-15);
        }
        let pos = VectorField::new(FieldKind::Other, s.vertices().to_vec());
        let pp = s.normal_projection(&pos).unwrap();
        for (a, b) in pp.iter().zip(s.vertices()) {
            assert!((*a - *b).norm() < 1e-12);
        }
        let short = VectorField::new(FieldKind::Other, vec![Vec3::<f64>::zero(); 3]);
        assert!(matches!(s.normal_projection(&short), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn rigid_motion_equivariance() {
        let s = shapes::perturbed_circle(1.3, 3, 0.1, 200, Vec3::<f64>::zero()).unwrap();
        let rot = Mat3::rotation(Vec3::<f64>::new(0.0, 0.0, 1.0), 0.9);
        let t = Vec3::planar(2.0, -1.0);
        let m = s.transformed(&rot, t, 1.0).unwrap();
        let (nu, num) = (s.outward_normals().unwrap(), m.outward_normals().unwrap());
        let (h, hm) = (s.mean_curvature_vector(), m.mean_curvature_vector());
        let (w, wm) = (s.vertex_measures(), m.vertex_measures());
        for i in 0..s.vertex_count() {
            assert!((rot.apply(nu[i]) - num[i]).norm() < 1e-10);
            assert!((rot.apply(h[i]) - hm[i]).norm() < 1e-10);
            assert!((w[i] - wm[i]).abs() < 1e-10);
        }

        let s3 = shapes::torus(0.4, 1.0, 24, 48, Vec3::<f64>::zero()).unwrap();
        let rot3 = Mat3::rotation(Vec3::<f64>::new(0.3, -1.0, 0.5), 2.1);
        let t3 = Vec3::<f64>::new(0.5, 0.25, -3.0);
        let m3 = s3.transformed(&rot3, t3, 1.0).unwrap();
        let (h, hm) = (s3.mean_curvature_vector(), m3.mean_curvature_vector());
        let (nu, num) = (s3.outward_normals().unwrap(), m3.outward_normals().unwrap());
        let (w, wm) = (s3.vertex_measures(), m3.vertex_measures());
        for i in 0..s3.vertex_count() {
            assert!((rot3.apply(h[i]) - hm[i]).norm() < 1e-10);
            assert!((rot3.apply(nu[i]) - num[i]).norm() < 1e-10);
            assert!((w[i] - wm[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn curvature_error_decreases_under_refinement() {
        let errs: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| {
                let s = polygon(n, 1.0, Vec3::<f64>::zero());
                let h = s.mean_curvature_vector();
                h.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");

        let errs: Vec<f64> = [2, 3, 4]
            .iter()
            .map(|&l| {
                let s = shapes::icosphere(2.0, l, Vec3::<f64>::zero()).unwrap();
                let h = s.mean_curvature_vector();
                h.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn generic_over_f32() {
        let s: DiscreteHypersurface<f32> = shapes::circle(1.0f32, 64, Vec3::zero()).unwrap();
        let h = s.mean_curvature_vector();
        assert!((h[0].norm() - 1.0).abs() < 1e-2);
    }
}
