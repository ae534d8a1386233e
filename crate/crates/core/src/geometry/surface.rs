use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::{Mat3, Vec3};

/// Relative floor for element measures: `floor = factor * diameter^m`.
pub const DEFAULT_FLOOR_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Elements {
    /// Directed segments `[tail, head]` of closed polygons in R².
    Segments(Vec<[usize; 2]>),
    /// Triangles of a closed surface in R³.
    Triangles(Vec<[usize; 3]>),
}

impl Elements {
    pub fn len(&self) -> usize {
        match self {
            Elements::Segments(s) => s.len(),
            Elements::Triangles(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vertices_of(&self, e: usize) -> &[usize] {
        match self {
            Elements::Segments(s) => &s[e],
            Elements::Triangles(t) => &t[e],
        }
    }
}

/// Whether the winding of the elements produces outward normals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Outward,
    Inward,
}

impl Orientation {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Orientation::Outward => T::one(),
            Orientation::Inward => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Outward => Orientation::Inward,
            Orientation::Inward => Orientation::Outward,
        }
    }
}

/// Closed, consistently oriented polygon (m = 1) or triangle mesh (m = 2).
///
/// Values are immutable after construction; operations that move vertices
/// return new surfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DiscreteHypersurface<T> {
    ambient_dim: usize,
    vertices: Vec<Vec3<T>>,
    elements: Elements,
    orientation: Orientation,
    #[serde(default = "yes")]
    closed: bool,
}

fn yes() -> bool {
    true
}

impl<T: Real> DiscreteHypersurface<T> {
    /// Builds and validates a closed surface with the default degeneracy floor.
    pub fn new(
        ambient_dim: usize,
        vertices: Vec<Vec3<T>>,
        elements: Elements,
        orientation: Orientation,
    ) -> Result<Self> {
        let s = Self {
            ambient_dim,
            vertices,
            elements,
            orientation,
            closed: true,
        };
        s.validate(T::lit(DEFAULT_FLOOR_FACTOR))?;
        Ok(s)
    }

    /// The surface with no elements (used as the extinct state).
    pub fn empty(ambient_dim: usize) -> Result<Self> {
        let elements = match ambient_dim {
            2 => Elements::Segments(Vec::new()),
            3 => Elements::Triangles(Vec::new()),
            d => return Err(Error::UnsupportedDimension(d)),
        };
        Ok(Self {
            ambient_dim,
            vertices: Vec::new(),
            elements,
            orientation: Orientation::Outward,
            closed: true,
        })
    }

    /// Surfaces with boundary exist only as fixtures.
    pub(crate) fn open_patch(ambient_dim: usize, vertices: Vec<Vec3<T>>, elements: Elements) -> Self {
        Self {
            ambient_dim,
            vertices,
            elements,
            orientation: Orientation::Outward,
            closed: false,
        }
    }

    /// Full invariant check: dimension, connectivity, closedness, orientation
    /// and non-degeneracy.
    pub fn validate(&self, floor_factor: T) -> Result<()> {
        let n = self.vertices.len();
        match (&self.elements, self.ambient_dim) {
            (Elements::Segments(_), 2) | (Elements::Triangles(_), 3) => {}
            (_, 2) | (_, 3) => {
                return Err(Error::InvalidParameter(format!(
                    "element kind does not match ambient dimension {}",
                    self.ambient_dim
                )))
            }
            (_, d) => return Err(Error::UnsupportedDimension(d)),
        }
        if self.ambient_dim == 2 && self.vertices.iter().any(|v| v.z != T::zero()) {
            return Err(Error::InvalidParameter("planar vertex with nonzero z".into()));
        }
        for e in 0..self.elements.len() {
            for &v in self.elements.vertices_of(e) {
                if v >= n {
                    return Err(Error::BadConnectivity {
                        element: e,
                        vertex: v,
                        count: n,
                    });
                }
            }
        }
        if self.vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite vertex coordinate".into()));
        }
        if self.closed {
            self.check_closed()?;
        }
        let floor = self.degeneracy_floor(floor_factor);
        for (i, m) in self.element_measures().into_iter().enumerate() {
            if !(m > floor) {
                return Err(Error::DegenerateElement {
                    index: i,
                    measure: m.as_f64(),
                    floor: floor.as_f64(),
                });
            }
        }
        Ok(())
    }

    fn check_closed(&self) -> Result<()> {
        let n = self.vertices.len();
        match &self.elements {
            Elements::Segments(segs) => {
                let mut tails = vec![0u32; n];
                let mut heads = vec![0u32; n];
                for s in segs {
                    if s[0] == s[1] {
                        return Err(Error::NotClosed("segment with repeated vertex".into()));
                    }
                    tails[s[0]] += 1;
                    heads[s[1]] += 1;
                }
                for v in 0..n {
                    match (tails[v], heads[v]) {
                        (1, 1) => {}
                        (0, 0) => return Err(Error::NotClosed(format!("vertex {v} is isolated"))),
                        (a, b) if a + b == 2 => {
                            return Err(Error::Inconsistent(format!(
                                "vertex {v} is shared by segments with mismatched directions"
                            )))
                        }
                        (a, b) => {
                            return Err(Error::NotClosed(format!(
                                "vertex {v} is an endpoint of {} segments",
                                a + b
                            )))
                        }
                    }
                }
            }
            Elements::Triangles(tris) => {
                let mut directed: HashMap<(usize, usize), u32> = HashMap::with_capacity(tris.len() * 3);
                let mut used = vec![false; n];
                for t in tris {
                    if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                        return Err(Error::NotClosed("triangle with repeated vertex".into()));
                    }
                    for k in 0..3 {
                        used[t[k]] = true;
                        *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
                    }
                }
                if let Some(v) = used.iter().position(|u| !u) {
                    return Err(Error::NotClosed(format!("vertex {v} is isolated")));
                }
                for (&(a, b), &c) in &directed {
                    if c > 1 {
                        return Err(Error::Inconsistent(format!(
                            "edge ({a}, {b}) is traversed {c} times in the same direction"
                        )));
                    }
                    match directed.get(&(b, a)) {
                        Some(1) => {}
                        _ => {
                            let undirected = c + directed.get(&(b, a)).copied().unwrap_or(0);
                            return Err(Error::NotClosed(format!(
                                "edge ({a}, {b}) is shared by {undirected} triangle(s) with consistent orientation"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn degeneracy_floor(&self, factor: T) -> T {
        factor * self.diameter().powi(self.intrinsic_dim() as i32)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// The hypersurface dimension m.
    pub fn intrinsic_dim(&self) -> usize {
        self.ambient_dim - 1
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn elements(&self) -> &Elements {
        &self.elements
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Same connectivity with new vertex positions. Only degeneracy is
    /// rechecked since topology is unchanged.
    pub fn with_vertices(&self, vertices: Vec<Vec3<T>>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::ShapeMismatch {
                expected: self.vertices.len(),
                got: vertices.len(),
            });
        }
        let s = Self {
            vertices,
            ..self.clone()
        };
        let floor = s.degeneracy_floor(T::lit(DEFAULT_FLOOR_FACTOR));
        for (i, m) in s.element_measures().into_iter().enumerate() {
            if !(m > floor) {
                return Err(Error::DegenerateElement {
                    index: i,
                    measure: m.as_f64(),
                    floor: floor.as_f64(),
                });
            }
        }
        Ok(s)
    }

    /// Replaces positions without any check. Callers must revalidate.
    pub(crate) fn with_vertices_unchecked(&self, vertices: Vec<Vec3<T>>) -> Self {
        Self {
            vertices,
            ..self.clone()
        }
    }

    pub(crate) fn from_parts_unchecked(
        ambient_dim: usize,
        vertices: Vec<Vec3<T>>,
        elements: Elements,
        orientation: Orientation,
    ) -> Self {
        Self {
            ambient_dim,
            vertices,
            elements,
            orientation,
            closed: true,
        }
    }

    /// Flips the orientation flag; geometry is untouched.
    pub fn reversed(&self) -> Self {
        Self {
            orientation: self.orientation.flipped(),
            ..self.clone()
        }
    }

    /// Image under `x ↦ scale · (R x) + translation`.
    pub fn transformed(&self, rotation: &Mat3<T>, translation: Vec3<T>, scale: T) -> Result<Self> {
        if !(scale > T::zero()) {
            return Err(Error::InvalidParameter("scale must be positive".into()));
        }
        if self.ambient_dim == 2 {
            let r = rotation.rows;
            if r[2].x != T::zero() || r[2].y != T::zero() || r[0].z != T::zero() || r[1].z != T::zero() || translation.z != T::zero() {
                return Err(Error::InvalidParameter("planar surfaces admit only in-plane motions".into()));
            }
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| rotation.apply(*v) * scale + translation)
            .collect();
        Ok(Self {
            vertices,
            ..self.clone()
        })
    }

    pub fn translated(&self, t: Vec3<T>) -> Result<Self> {
        self.transformed(&Mat3::identity(), t, T::one())
    }

    pub fn bounding_box(&self) -> (Vec3<T>, Vec3<T>) {
        let mut lo = Vec3::splat(T::infinity());
        let mut hi = Vec3::splat(T::neg_infinity());
        for v in &self.vertices {
            lo = lo.component_min(*v);
            hi = hi.component_max(*v);
        }
        if self.vertices.is_empty() {
            return (Vec3::zero(), Vec3::zero());
        }
        (lo, hi)
    }

    /// Bounding-box diagonal.
    pub fn diameter(&self) -> T {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn centroid(&self) -> Vec3<T> {
        let w = self.vertex_measures();
        let total = w.sum();
        if total <= T::zero() {
            return Vec3::zero();
        }
        self.vertices
            .iter()
            .zip(w.values.iter())
            .map(|(x, wi)| *x * *wi)
            .sum::<Vec3<T>>()
            / total
    }

    /// Element measures: segment lengths or triangle areas.
    pub fn element_measures(&self) -> Vec<T> {
        let v = &self.vertices;
        match &self.elements {
            Elements::Segments(s) => s.iter().map(|e| v[e[0]].distance(v[e[1]])).collect(),
            Elements::Triangles(t) => t
                .iter()
                .map(|e| (v[e[1]] - v[e[0]]).cross(v[e[2]] - v[e[0]]).norm() * T::lit(0.5))
                .collect(),
        }
    }

    pub fn total_measure(&self) -> T {
        self.element_measures().into_iter().sum()
    }

    /// Signed area (m = 1) or volume (m = 2) enclosed, positive when the
    /// winding times the orientation flag points out of the bounded region.
    pub fn signed_enclosed_measure(&self) -> T {
        let v = &self.vertices;
        let s: T = match &self.elements {
            Elements::Segments(segs) => {
                segs.iter()
                    .map(|e| {
                        let a = v[e[0]];
                        let b = v[e[1]];
                        a.x * b.y - a.y * b.x
                    })
                    .sum::<T>()
                    * T::lit(0.5)
            }
            Elements::Triangles(tris) => {
                tris.iter()
                    .map(|e| v[e[0]].dot(v[e[1]].cross(v[e[2]])))
                    .sum::<T>()
                    / T::lit(6.0)
            }
        };
        s * self.orientation.sign()
    }

    pub fn enclosed_measure(&self) -> T {
        self.signed_enclosed_measure().abs()
    }

    /// Unique undirected edges (for polygons these are the segments).
    pub fn edges(&self) -> Vec<[usize; 2]> {
        match &self.elements {
            Elements::Segments(s) => s.clone(),
            Elements::Triangles(tris) => {
                let mut e: Vec<[usize; 2]> = tris
                    .iter()
                    .flat_map(|t| (0..3).map(move |k| {
                        let (a, b) = (t[k], t[(k + 1) % 3]);
                        [a.min(b), a.max(b)]
                    }))
                    .collect();
                e.sort_unstable();
                e.dedup();
                e
            }
        }
    }

    pub fn edge_length_stats(&self) -> EdgeStats<T> {
        let lengths: Vec<T> = self
            .edges()
            .iter()
            .map(|e| self.vertices[e[0]].distance(self.vertices[e[1]]))
            .collect();
        if lengths.is_empty() {
            return EdgeStats {
                min: T::zero(),
                max: T::zero(),
                mean: T::zero(),
            };
        }
        let n = T::from_usize_lossy(lengths.len());
        EdgeStats {
            min: lengths.iter().copied().fold(T::infinity(), T::min),
            max: lengths.iter().copied().fold(T::zero(), T::max),
            mean: lengths.iter().copied().sum::<T>() / n,
        }
    }

    /// Vertex adjacency lists (sorted, deduplicated).
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.vertices.len()];
        for [a, b] in self.edges() {
            nb[a].push(b);
            nb[b].push(a);
        }
        for l in &mut nb {
            l.sort_unstable();
            l.dedup();
        }
        nb
    }

    /// Number of connected components (through shared vertices).
    pub fn component_count(&self) -> usize {
        self.component_labels().1
    }

    /// Per-vertex component label and the number of components.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for [a, b] in self.edges() {
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut roots: HashMap<usize, usize> = HashMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            let next = roots.len();
            label[i] = *roots.entry(r).or_insert(next);
        }
        (label, roots.len())
    }

    /// Splits into connected components, each a closed surface.
    pub fn components(&self) -> Vec<Self> {
        let (label, count) = self.component_labels();
        let mut out = Vec::with_capacity(count);
        for c in 0..count {
            let mut remap = vec![usize::MAX; self.vertices.len()];
            let mut verts = Vec::new();
            for (i, &l) in label.iter().enumerate() {
                if l == c {
                    remap[i] = verts.len();
                    verts.push(self.vertices[i]);
                }
            }
            let elements = match &self.elements {
                Elements::Segments(s) => Elements::Segments(
                    s.iter()
                        .filter(|e| label[e[0]] == c)
                        .map(|e| [remap[e[0]], remap[e[1]]])
                        .collect(),
                ),
                Elements::Triangles(t) => Elements::Triangles(
                    t.iter()
                        .filter(|e| label[e[0]] == c)
                        .map(|e| [remap[e[0]], remap[e[1]], remap[e[2]]])
                        .collect(),
                ),
            };
            out.push(Self {
                ambient_dim: self.ambient_dim,
                vertices: verts,
                elements,
                orientation: self.orientation,
                closed: self.closed,
            });
        }
        out
    }

    /// Disjoint union of surfaces with the same ambient dimension and
    /// orientation flag.
    pub fn union(parts: &[Self]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("union of zero surfaces".into()))?;
        let mut verts = Vec::new();
        let mut segs = Vec::new();
        let mut tris = Vec::new();
        for p in parts {
            if p.ambient_dim != first.ambient_dim || p.orientation != first.orientation {
                return Err(Error::InvalidParameter("union of incompatible surfaces".into()));
            }
            let off = verts.len();
            verts.extend_from_slice(&p.vertices);
            match &p.elements {
                Elements::Segments(s) => segs.extend(s.iter().map(|e| [e[0] + off, e[1] + off])),
                Elements::Triangles(t) => {
                    tris.extend(t.iter().map(|e| [e[0] + off, e[1] + off, e[2] + off]))
                }
            }
        }
        let elements = if first.ambient_dim == 2 {
            Elements::Segments(segs)
        } else {
            Elements::Triangles(tris)
        };
        Self::new(first.ambient_dim, verts, elements, first.orientation)
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> DiscreteHypersurface<U> {
        DiscreteHypersurface {
            ambient_dim: self.ambient_dim,
            vertices: self.vertices.iter().map(|v| v.cast()).collect(),
            elements: self.elements.clone(),
            orientation: self.orientation,
            closed: self.closed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EdgeStats<T> {
    pub min: T,
    pub max: T,
    pub mean: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> DiscreteHypersurface<f64> {
        let v = vec![
            Vec3::planar(1.0, 0.0),
            Vec3::planar(0.0, 1.0),
            Vec3::planar(-1.0, 0.0),
            Vec3::planar(0.0, -1.0),
        ];
        DiscreteHypersurface::new(2, v, Elements::Segments(vec![[0, 1], [1, 2], [2, 3], [3, 0]]), Orientation::Outward)
            .unwrap()
    }

    #[test]
    fn rejects_open_polygon() {
        let v = vec![Vec3::planar(0.0, 0.0), Vec3::planar(1.0, 0.0), Vec3::planar(0.0, 1.0)];
        let e = DiscreteHypersurface::new(2, v, Elements::Segments(vec![[0, 1], [1, 2]]), Orientation::Outward);
        assert!(matches!(e, Err(Error::NotClosed(_))));
    }

    #[test]
    fn rejects_inconsistent_winding() {
        let v = vec![Vec3::planar(0.0, 0.0), Vec3::planar(1.0, 0.0), Vec3::planar(0.0, 1.0)];
        let e = DiscreteHypersurface::new(
            2,
            v,
            Elements::Segments(vec![[0, 1], [2, 1], [2, 0]]),
            Orientation::Outward,
        );
        assert!(matches!(e, Err(Error::Inconsistent(_))));
    }

    #[test]
    fn degenerate_element_is_named() {
        let v = vec![
            Vec3::planar(0.0, 0.0),
            Vec3::planar(1.0, 0.0),
            Vec3::planar(1.0, 0.0),
            Vec3::planar(0.0, 1.0),
        ];
        let e = DiscreteHypersurface::new(
            2,
            v,
            Elements::Segments(vec![[0, 1], [1, 2], [2, 3], [3, 0]]),
            Orientation::Outward,
        );
        match e {
            Err(Error::DegenerateElement { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected degenerate element, got {other:?}"),
        }
    }

    #[test]
    fn rejects_open_triangle_fan() {
        let v = vec![
            Vec3::<f64>::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let e = DiscreteHypersurface::new(
            3,
            v,
            Elements::Triangles(vec![[0, 2, 1], [0, 1, 3], [0, 3, 2]]),
            Orientation::Outward,
        );
        assert!(matches!(e, Err(Error::NotClosed(_))));
    }

    #[test]
    fn tetrahedron_volume_and_components() {
        let v = vec![
            Vec3::<f64>::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let tet = DiscreteHypersurface::new(
            3,
            v,
            Elements::Triangles(vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]),
            Orientation::Outward,
        )
        .unwrap();
        assert!((tet.signed_enclosed_measure() - 1.0 / 6.0).abs() < 1e-15);
        let two = DiscreteHypersurface::union(&[tet.clone(), tet.translated(Vec3::new(5.0, 0.0, 0.0)).unwrap()]).unwrap();
        assert_eq!(two.component_count(), 2);
        assert_eq!(two.components()[1].vertex_count(), 4);
    }

    #[test]
    fn square_area_sign_follows_orientation() {
        let s = square();
        assert!((s.signed_enclosed_measure() - 2.0).abs() < 1e-15);
        assert!((s.reversed().signed_enclosed_measure() + 2.0).abs() < 1e-15);
        assert_eq!(s.component_count(), 1);
    }

    #[test]
    fn empty_surface_is_valid() {
        let e = DiscreteHypersurface::<f64>::empty(2).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.total_measure(), 0.0);
    }
}
