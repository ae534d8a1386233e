//! Point/element distances and a uniform-grid element index.

use std::collections::HashMap;

use super::surface::{DiscreteHypersurface, Elements};
use crate::scalar::Real;
use crate::vector::Vec3;

pub fn point_segment_distance<T: Real>(p: Vec3<T>, a: Vec3<T>, b: Vec3<T>) -> T {
    let ab = b - a;
    let l2 = ab.norm_squared();
    let t = if l2 > T::zero() {
        ((p - a).dot(ab) / l2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    (a + ab * t).distance(p)
}

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle<T: Real>(p: Vec3<T>, a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> Vec3<T> {
    let zero = T::zero();
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= zero && d2 <= zero {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= zero && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= zero && d1 >= zero && d3 <= zero {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= zero && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= zero && d2 >= zero && d6 <= zero {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= zero && (d4 - d3) >= zero && (d5 - d6) >= zero {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = T::one() / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

pub fn point_triangle_distance<T: Real>(p: Vec3<T>, a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> T {
    closest_point_on_triangle(p, a, b, c).distance(p)
}

/// Uniform spatial hash of element bounding boxes.
pub struct ElementIndex<'a, T: Real> {
    surface: &'a DiscreteHypersurface<T>,
    origin: Vec3<T>,
    cell: T,
    dims: [i64; 3],
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl<'a, T: Real> ElementIndex<'a, T> {
    pub fn new(surface: &'a DiscreteHypersurface<T>) -> Self {
        let (lo, hi) = surface.bounding_box();
        let stats = surface.edge_length_stats();
        let extent = (hi - lo).max_abs();
        let mut cell = (stats.mean * T::lit(2.0)).max(extent / T::lit(256.0));
        if !(cell > T::zero()) {
            cell = T::one();
        }
        let dims = [0, 1, 2].map(|a| (((hi[a] - lo[a]) / cell).floor().to_i64().unwrap_or(0)) + 1);
        let mut idx = Self {
            surface,
            origin: lo,
            cell,
            dims,
            buckets: HashMap::new(),
        };
        for e in 0..surface.element_count() {
            let (elo, ehi) = idx.element_box(e);
            let a = idx.cell_of(elo);
            let b = idx.cell_of(ehi);
            for i in a[0]..=b[0] {
                for j in a[1]..=b[1] {
                    for k in a[2]..=b[2] {
                        idx.buckets.entry([i, j, k]).or_default().push(e);
                    }
                }
            }
        }
        idx
    }

    fn element_box(&self, e: usize) -> (Vec3<T>, Vec3<T>) {
        let v = self.surface.vertices();
        let ids = self.surface.elements().vertices_of(e);
        let mut lo = v[ids[0]];
        let mut hi = lo;
        for &i in &ids[1..] {
            lo = lo.component_min(v[i]);
            hi = hi.component_max(v[i]);
        }
        (lo, hi)
    }

    fn cell_of(&self, p: Vec3<T>) -> [i64; 3] {
        [0, 1, 2].map(|a| ((p[a] - self.origin[a]) / self.cell).floor().to_i64().unwrap_or(0))
    }

    pub fn element_distance(&self, p: Vec3<T>, e: usize) -> T {
        let v = self.surface.vertices();
        match self.surface.elements() {
            Elements::Segments(s) => point_segment_distance(p, v[s[e][0]], v[s[e][1]]),
            Elements::Triangles(t) => point_triangle_distance(p, v[t[e][0]], v[t[e][1]], v[t[e][2]]),
        }
    }

    /// Distance from `p` to the nearest element; infinity for an empty surface.
    pub fn nearest(&self, p: Vec3<T>) -> (T, Option<usize>) {
        if self.surface.element_count() == 0 {
            return (T::infinity(), None);
        }
        let c = self.cell_of(p);
        let mut best = T::infinity();
        let mut arg = None;
        let clamp = |a: usize| c[a].clamp(0, self.dims[a] - 1);
        let start = (0..3).map(|a| (c[a] - clamp(a)).abs()).max().unwrap_or(0);
        let max_ring = (0..3)
            .map(|a| c[a].abs().max((c[a] - (self.dims[a] - 1)).abs()))
            .max()
            .unwrap_or(0);
        for ring in start..=max_ring {
            let lo = |a: usize| (c[a] - ring).max(0);
            let hi = |a: usize| (c[a] + ring).min(self.dims[a] - 1);
            for i in lo(0)..=hi(0) {
                for j in lo(1)..=hi(1) {
                    for k in lo(2)..=hi(2) {
                        let on_shell = (i - c[0]).abs() == ring
                            || (j - c[1]).abs() == ring
                            || (k - c[2]).abs() == ring;
                        if !on_shell {
                            continue;
                        }
                        if let Some(list) = self.buckets.get(&[i, j, k]) {
                            for &e in list {
                                let d = self.element_distance(p, e);
                                if d < best {
                                    best = d;
                                    arg = Some(e);
                                }
                            }
                        }
                    }
                }
            }
            // Unvisited cells lie at least ring·cell away from p.
            if arg.is_some() && best <= T::from_i64(ring).unwrap_or_else(T::zero) * self.cell {
                break;
            }
        }
        (best, arg)
    }
}

/// max over vertices of `a` of the distance to the elements of `b`.
pub fn directed_vertex_distance<T: Real>(a: &DiscreteHypersurface<T>, b: &DiscreteHypersurface<T>) -> T {
    if a.vertex_count() == 0 {
        return T::zero();
    }
    let idx = ElementIndex::new(b);
    a.vertices()
        .iter()
        .map(|p| idx.nearest(*p).0)
        .fold(T::zero(), T::max)
}

/// Symmetric vertex-to-element Hausdorff distance.
pub fn hausdorff<T: Real>(a: &DiscreteHypersurface<T>, b: &DiscreteHypersurface<T>) -> T {
    directed_vertex_distance(a, b).max(directed_vertex_distance(b, a))
}

/// Minimum vertex-to-element distance between two surfaces, both ways.
pub fn min_distance<T: Real>(a: &DiscreteHypersurface<T>, b: &DiscreteHypersurface<T>) -> T {
    let one_way = |x: &DiscreteHypersurface<T>, y: &DiscreteHypersurface<T>| {
        if x.vertex_count() == 0 || y.element_count() == 0 {
            return T::infinity();
        }
        let idx = ElementIndex::new(y);
        x.vertices()
            .iter()
            .map(|p| idx.nearest(*p).0)
            .fold(T::infinity(), T::min)
    };
    one_way(a, b).min(one_way(b, a))
}

/// Whether two non-adjacent polygon segments cross (planar surfaces only).
pub fn polygon_self_intersects<T: Real>(s: &DiscreteHypersurface<T>) -> bool {
    let Elements::Segments(segs) = s.elements() else {
        return false;
    };
    if segs.len() < 4 {
        return false;
    }
    let v = s.vertices();
    let idx = ElementIndex::new(s);
    for (i, e) in segs.iter().enumerate() {
        let (a, b) = (v[e[0]], v[e[1]]);
        let lo = idx.cell_of(a.component_min(b));
        let hi = idx.cell_of(a.component_max(b));
        for ci in lo[0]..=hi[0] {
            for cj in lo[1]..=hi[1] {
                let Some(list) = idx.buckets.get(&[ci, cj, 0]) else { continue };
                for &j in list {
                    if j <= i {
                        continue;
                    }
                    let f = segs[j];
                    if f[0] == e[0] || f[0] == e[1] || f[1] == e[0] || f[1] == e[1] {
                        continue;
                    }
                    if segments_cross(a, b, v[f[0]], v[f[1]]) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn segments_cross<T: Real>(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>, d: Vec3<T>) -> bool {
    let orient = |p: Vec3<T>, q: Vec3<T>, r: Vec3<T>| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    (o1 > T::zero()) != (o2 > T::zero()) && (o3 > T::zero()) != (o4 > T::zero()) && o1 != T::zero() && o2 != T::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn triangle_distance_regions() {
        let a = Vec3::<f64>::new(0.0, 0.0, 0.0);
        let b = Vec3::<f64>::new(1.0, 0.0, 0.0);
        let c = Vec3::<f64>::new(0.0, 1.0, 0.0);
        assert!((point_triangle_distance(Vec3::new(0.2, 0.2, 0.5), a, b, c) - 0.5).abs() < 1e-15);
        assert!((point_triangle_distance(Vec3::new(-1.0, -1.0, 0.0), a, b, c) - 2f64.sqrt()).abs() < 1e-15);
        assert!((point_triangle_distance(Vec3::new(1.0, 1.0, 0.0), a, b, c) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((point_triangle_distance(Vec3::new(0.5, -2.0, 0.0), a, b, c) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn concentric_circle_distance() {
        let a = shapes::circle(1.0, 256, Vec3::<f64>::zero()).unwrap();
        let b = shapes::circle(3.0, 256, Vec3::<f64>::zero()).unwrap();
        let d = min_distance(&a, &b);
        assert!((d - 2.0).abs() < 3.0 * (1.0 - (std::f64::consts::PI / 256.0).cos()) + 1e-12);
        let h = hausdorff(&a, &b);
        assert!((h - 2.0).abs() < 1e-3);
    }

    #[test]
    fn nearest_matches_brute_force() {
        let s = shapes::torus(0.5, 1.5, 16, 32, Vec3::<f64>::zero()).unwrap();
        let idx = ElementIndex::new(&s);
        for p in [Vec3::new(0.0, 0.0, 0.0), Vec3::new(3.0, -2.0, 1.0), Vec3::new(1.4, 0.1, 0.45)] {
            let brute = (0..s.element_count()).map(|e| idx.element_distance(p, e)).fold(f64::INFINITY, f64::min);
            assert!((idx.nearest(p).0 - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn detects_figure_eight() {
        let v = vec![
            Vec3::planar(0.0, 0.0),
            Vec3::planar(1.0, 1.0),
            Vec3::planar(1.0, 0.0),
            Vec3::planar(0.0, 1.0),
        ];
        let s = DiscreteHypersurface::from_parts_unchecked(
            2,
            v,
            Elements::Segments(vec![[0, 1], [1, 2], [2, 3], [3, 0]]),
            crate::geometry::Orientation::Outward,
        );
        assert!(polygon_self_intersects(&s));
        assert!(!polygon_self_intersects(&shapes::circle(1.0, 50, Vec3::<f64>::zero()).unwrap()));
    }
}
