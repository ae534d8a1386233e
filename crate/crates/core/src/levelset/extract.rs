use std::collections::HashMap;

use super::grid::{GridGeometry, LevelSetRegion};
use crate::error::Result;
use crate::geometry::{DiscreteHypersurface, Elements, Orientation};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Kuhn decomposition of the unit cube into six tetrahedra sharing the main diagonal.
const KUHN: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

struct Builder<'a, T: Real> {
    g: &'a GridGeometry<T>,
    phi: Vec<T>,
    vertices: Vec<Vec3<T>>,
    cache: HashMap<(usize, usize), usize>,
}

impl<'a, T: Real> Builder<'a, T> {
    fn crossing(&mut self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let (fa, fb) = (self.phi[key.0], self.phi[key.1]);
        let theta = fa / (fa - fb);
        let pa = self.g.position(key.0);
        let pb = self.g.position(key.1);
        let id = self.vertices.len();
        self.vertices.push(pa + (pb - pa) * theta);
        self.cache.insert(key, id);
        id
    }

    fn inside(&self, n: usize) -> bool {
        self.phi[n] < T::zero()
    }

    /// From the inside corners towards the outside ones.
    fn outward(&self, nodes: &[usize]) -> Vec3<T> {
        let (mut pin, mut pout) = (Vec3::zero(), Vec3::zero());
        let (mut nin, mut nout) = (T::zero(), T::zero());
        for &n in nodes {
            let p = self.g.position(n);
            if self.inside(n) {
                pin += p;
                nin += T::one();
            } else {
                pout += p;
                nout += T::one();
            }
        }
        pout / nout - pin / nin
    }
}

/// Oriented boundary of {φ ≤ 0}: marching triangles in the plane, marching
/// tetrahedra in space. Returns the empty surface for an extinct region.
pub fn extract_boundary<T: Real>(region: &LevelSetRegion<T>) -> Result<DiscreteHypersurface<T>> {
    let g = &region.geometry;
    let eps = g.h * T::lit(1e-3);
    // Keeping |φ| away from zero avoids coincident crossing points.
    let phi: Vec<T> = region
        .phi
        .iter()
        .map(|&p| if p <= T::zero() { p.min(-eps) } else { p.max(eps) })
        .collect();
    let mut b = Builder {
        g,
        phi,
        vertices: Vec::new(),
        cache: HashMap::new(),
    };
    if g.dim == 2 {
        let mut segs = Vec::new();
        for j in 0..g.dims[1] - 1 {
            for i in 0..g.dims[0] - 1 {
                let c00 = g.index(i, j, 0);
                let c10 = g.index(i + 1, j, 0);
                let c01 = g.index(i, j + 1, 0);
                let c11 = g.index(i + 1, j + 1, 0);
                for tri in [[c00, c10, c11], [c00, c11, c01]] {
                    let ins: Vec<bool> = tri.iter().map(|&n| b.inside(n)).collect();
                    let count = ins.iter().filter(|&&x| x).count();
                    if count == 0 || count == 3 {
                        continue;
                    }
                    let mut pts = Vec::with_capacity(2);
                    for e in [(0, 1), (1, 2), (2, 0)] {
                        if ins[e.0] != ins[e.1] {
                            pts.push(b.crossing(tri[e.0], tri[e.1]));
                        }
                    }
                    let (p, q) = (pts[0], pts[1]);
                    let tangent = b.vertices[q] - b.vertices[p];
                    if tangent.perp().dot(b.outward(&tri)) < T::zero() {
                        segs.push([p, q]);
                    } else {
                        segs.push([q, p]);
                    }
                }
            }
        }
        let vertices = std::mem::take(&mut b.vertices);
        if segs.is_empty() {
            return DiscreteHypersurface::empty(2);
        }
        return DiscreteHypersurface::new(2, vertices, Elements::Segments(segs), Orientation::Outward);
    }

    let mut tris = Vec::new();
    for k in 0..g.dims[2] - 1 {
        for j in 0..g.dims[1] - 1 {
            for i in 0..g.dims[0] - 1 {
                let corner = |d: [usize; 3]| g.index(i + d[0], j + d[1], k + d[2]);
                let base = g.index(i, j, k);
                let ins_count = (0..8)
                    .filter(|m| b.inside(corner([m & 1, (m >> 1) & 1, (m >> 2) & 1])))
                    .count();
                if ins_count == 0 || ins_count == 8 {
                    continue;
                }
                for perm in KUHN {
                    let mut off = [0usize; 3];
                    let mut tet = [base; 4];
                    for (s, &axis) in perm.iter().enumerate() {
                        off[axis] = 1;
                        tet[s + 1] = corner(off);
                    }
                    emit_tet(&mut b, &tet, &mut tris);
                }
            }
        }
    }
    let vertices = std::mem::take(&mut b.vertices);
    if tris.is_empty() {
        return DiscreteHypersurface::empty(3);
    }
    DiscreteHypersurface::new(3, vertices, Elements::Triangles(tris), Orientation::Outward)
}

fn emit_tet<T: Real>(b: &mut Builder<'_, T>, tet: &[usize; 4], out: &mut Vec<[usize; 3]>) {
    let (inn, outn): (Vec<usize>, Vec<usize>) = tet.iter().partition(|&&n| b.inside(n));
    let dir = b.outward(tet);
    let mut push = |b: &mut Builder<'_, T>, t: [usize; 3]| {
        let (p, q, r) = (b.vertices[t[0]], b.vertices[t[1]], b.vertices[t[2]]);
        let n = (q - p).cross(r - p);
        if n.dot(dir) >= T::zero() {
            out.push(t);
        } else {
            out.push([t[0], t[2], t[1]]);
        }
    };
    match inn.len() {
        1 | 3 => {
            let (lone, rest) = if inn.len() == 1 { (inn[0], &outn) } else { (outn[0], &inn) };
            let t = [b.crossing(lone, rest[0]), b.crossing(lone, rest[1]), b.crossing(lone, rest[2])];
            push(b, t);
        }
        2 => {
            let q = [
                b.crossing(inn[0], outn[0]),
                b.crossing(inn[0], outn[1]),
                b.crossing(inn[1], outn[1]),
                b.crossing(inn[1], outn[0]),
            ];
            push(b, [q[0], q[1], q[2]]);
            push(b, [q[0], q[2], q[3]]);
        }
        _ => {}
    }
}
