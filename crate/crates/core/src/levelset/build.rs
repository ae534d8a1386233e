use rayon::prelude::*;

use super::fmm::{gradient_range, march};
use super::grid::{GridConfig, GridGeometry, LevelSetRegion};
use crate::error::{Error, Result};
use crate::flow::AmbientVectorField;
use crate::geometry::spatial::{point_segment_distance, point_triangle_distance};
use crate::geometry::{DiscreteHypersurface, Elements};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Signed distance to `surface` on a grid: exact near the surface, fast
/// marching elsewhere, sign from ray parity.
pub fn from_surface<T: Real>(
    surface: &DiscreteHypersurface<T>,
    config: &GridConfig,
    field: &AmbientVectorField<T>,
) -> Result<LevelSetRegion<T>> {
    if !surface.is_closed() {
        return Err(Error::NotClosed("level-set regions need a closed boundary".into()));
    }
    let dim = surface.ambient_dim();
    let h = T::lit(config.h);
    let min_margin = T::lit(6.0) * h;
    let geometry = if surface.is_empty() {
        let (lo, hi) = config
            .bounds
            .ok_or_else(|| Error::GridMargin("an empty surface needs explicit bounds".into()))?;
        GridGeometry::new(dim, Vec3::from_slice(&lo.map(T::lit)), Vec3::from_slice(&hi.map(T::lit)), h)?
    } else {
        let (blo, bhi) = surface.bounding_box();
        let (lo, hi) = match config.bounds {
            Some((lo, hi)) => (Vec3::from_slice(&lo.map(T::lit)), Vec3::from_slice(&hi.map(T::lit))),
            None => {
                let pad = Vec3::splat(T::lit(config.margin_cells.max(6.0)) * h);
                (blo - pad, bhi + pad)
            }
        };
        let g = GridGeometry::new(dim, lo, hi, h)?;
        let ghi = g.hi();
        let slack = h * T::lit(1e-9);
        for a in 0..dim {
            let m = (blo[a] - g.lo[a]).min(ghi[a] - bhi[a]);
            if m + slack < min_margin {
                return Err(Error::GridMargin(format!(
                    "surface lies {:.4e} from the box along axis {a}; at least {:.4e} (6h) is required",
                    m.as_f64(),
                    min_margin.as_f64()
                )));
            }
        }
        g
    };

    let n = geometry.len();
    let far = (geometry.hi() - geometry.lo).norm() + h;
    if surface.is_empty() {
        let phi = vec![far; n];
        return LevelSetRegion::from_values(geometry, phi, *field, config.clone());
    }

    let band = T::lit(config.band_cells.max(2.0)) * h;
    let mut dist = band_distances(surface, &geometry, band);
    let mut known: Vec<bool> = dist.iter().map(|d| d.is_finite()).collect();
    march(&geometry, &mut dist, &mut known);

    let inside = parity_inside(surface, &geometry);
    let bounded = surface.signed_enclosed_measure() > T::zero();
    let phi = dist
        .into_iter()
        .zip(inside)
        .map(|(d, ins)| if ins == bounded { -d } else { d })
        .collect();
    let mut region = LevelSetRegion::from_values(geometry, phi, *field, config.clone())?;
    region.stats.gradient_range = gradient_range(&region, T::lit(2.0) * h);
    Ok(region)
}

fn node_range<T: Real>(g: &GridGeometry<T>, lo: T, hi: T, axis: usize) -> (usize, usize) {
    let n = g.dims[axis];
    let a = ((lo - g.lo[axis]) / g.h).floor().to_i64().unwrap_or(0).clamp(0, n as i64 - 1) as usize;
    let b = ((hi - g.lo[axis]) / g.h).ceil().to_i64().unwrap_or(0).clamp(0, n as i64 - 1) as usize;
    (a, b)
}

/// Exact unsigned distance at nodes within `band` of some element; infinity elsewhere.
fn band_distances<T: Real>(s: &DiscreteHypersurface<T>, g: &GridGeometry<T>, band: T) -> Vec<T> {
    let v = s.vertices();
    let elems = s.elements();
    let ne = elems.len();
    let boxes: Vec<(Vec3<T>, Vec3<T>)> = (0..ne)
        .map(|e| {
            let ids = elems.vertices_of(e);
            let mut lo = v[ids[0]];
            let mut hi = lo;
            for &i in &ids[1..] {
                lo = lo.component_min(v[i]);
                hi = hi.component_max(v[i]);
            }
            (lo - Vec3::splat(band), hi + Vec3::splat(band))
        })
        .collect();
    let slab_axis = g.dim - 1;
    let slabs = g.dims[slab_axis];
    let mut per_slab: Vec<Vec<usize>> = vec![Vec::new(); slabs];
    for (e, (lo, hi)) in boxes.iter().enumerate() {
        let (a, b) = node_range(g, lo[slab_axis], hi[slab_axis], slab_axis);
        for list in &mut per_slab[a..=b] {
            list.push(e);
        }
    }
    let slab_len = g.len() / slabs;
    let mut dist = vec![T::infinity(); g.len()];
    dist.par_chunks_mut(slab_len).enumerate().for_each(|(k, chunk)| {
        for &e in &per_slab[k] {
            let (lo, hi) = boxes[e];
            let (i0, i1) = node_range(g, lo.x, hi.x, 0);
            let (j0, j1) = if g.dim == 3 { node_range(g, lo.y, hi.y, 1) } else { (k, k) };
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let local = if g.dim == 3 { i + g.dims[0] * j } else { i };
                    let idx = if g.dim == 3 { g.index(i, j, k) } else { g.index(i, k, 0) };
                    let p = g.position(idx);
                    let d = match elems {
                        Elements::Segments(sg) => point_segment_distance(p, v[sg[e][0]], v[sg[e][1]]),
                        Elements::Triangles(t) => point_triangle_distance(p, v[t[e][0]], v[t[e][1]], v[t[e][2]]),
                    };
                    if d <= band && d < chunk[local] {
                        chunk[local] = d;
                    }
                }
            }
        }
    });
    dist
}

/// Whether each node lies inside the surface, by counting crossings of the
/// ray in the −x direction along each grid row.
fn parity_inside<T: Real>(s: &DiscreteHypersurface<T>, g: &GridGeometry<T>) -> Vec<bool> {
    // Irrational sub-cell offsets keep rows off mesh vertices and edges.
    let dy = g.h * T::lit(0.618_033_988_749_894_8e-6);
    let dz = g.h * T::lit(0.414_213_562_373_095_1e-6);
    let v = s.vertices();
    let rows = g.dims[1] * g.dims[2];
    let mut crossings: Vec<Vec<T>> = vec![Vec::new(); rows];
    let row_coord = |j: usize, axis: usize, off: T| g.lo[axis] + T::from_usize_lossy(j) * g.h + off;
    match s.elements() {
        Elements::Segments(segs) => {
            for e in segs {
                let (a, b) = (v[e[0]], v[e[1]]);
                let (j0, j1) = node_range(g, a.y.min(b.y), a.y.max(b.y), 1);
                for j in j0..=j1 {
                    let y = row_coord(j, 1, dy);
                    if (a.y - y) * (b.y - y) < T::zero() {
                        let x = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
                        crossings[j].push(x);
                    }
                }
            }
        }
        Elements::Triangles(tris) => {
            for e in tris {
                let (a, b, c) = (v[e[0]], v[e[1]], v[e[2]]);
                let (j0, j1) = node_range(g, a.y.min(b.y).min(c.y), a.y.max(b.y).max(c.y), 1);
                let (k0, k1) = node_range(g, a.z.min(b.z).min(c.z), a.z.max(b.z).max(c.z), 2);
                let orient = |p: Vec3<T>, q: Vec3<T>, y: T, z: T| (q.y - p.y) * (z - p.z) - (q.z - p.z) * (y - p.y);
                for k in k0..=k1 {
                    let z = row_coord(k, 2, dz);
                    for j in j0..=j1 {
                        let y = row_coord(j, 1, dy);
                        let wa = orient(b, c, y, z);
                        let wb = orient(c, a, y, z);
                        let wc = orient(a, b, y, z);
                        let pos = wa > T::zero() && wb > T::zero() && wc > T::zero();
                        let neg = wa < T::zero() && wb < T::zero() && wc < T::zero();
                        if pos || neg {
                            let sum = wa + wb + wc;
                            let x = (a.x * wa + b.x * wb + c.x * wc) / sum;
                            crossings[j + g.dims[1] * k].push(x);
                        }
                    }
                }
            }
        }
    }
    let mut inside = vec![false; g.len()];
    inside
        .par_chunks_mut(g.dims[0])
        .zip(crossings.par_iter_mut())
        .for_each(|(row, xs)| {
            xs.sort_by(|p, q| p.as_f64().total_cmp(&q.as_f64()));
            let mut c = 0;
            for (i, slot) in row.iter_mut().enumerate() {
                let x = g.lo.x + T::from_usize_lossy(i) * g.h;
                while c < xs.len() && xs[c] < x {
                    c += 1;
                }
                *slot = c % 2 == 1;
            }
        });
    inside
}
