use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::geometry::{DiscreteHypersurface, Elements};
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemeshConfig {
    pub enabled: bool,
    /// Split edges longer than this multiple of the mean edge length.
    pub split_ratio: f64,
    /// Collapse edges shorter than this multiple of the mean edge length.
    pub collapse_ratio: f64,
    pub relax_iterations: usize,
}

impl Default for RemeshConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            split_ratio: 2.0,
            collapse_ratio: 0.5,
            relax_iterations: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RemeshEvent<T> {
    pub t: T,
    pub splits: usize,
    pub collapses: usize,
}

/// Whether the edge-length spread exceeds the configured thresholds.
pub(crate) fn needs_remesh<T: Real>(s: &DiscreteHypersurface<T>, cfg: &RemeshConfig) -> bool {
    let e = s.edge_length_stats();
    cfg.enabled && (e.max > T::lit(cfg.split_ratio) * e.mean || e.min < T::lit(cfg.collapse_ratio) * e.mean)
}

/// Splits long and collapses short edges, then relaxes tangentially.
/// Returns the new surface with (splits, collapses).
pub fn remesh<T: Real>(s: &DiscreteHypersurface<T>, cfg: &RemeshConfig) -> (DiscreteHypersurface<T>, usize, usize) {
    let (out, splits, collapses) = match s.elements() {
        Elements::Segments(_) => remesh_polygon(s, cfg),
        Elements::Triangles(_) => remesh_triangles(s, cfg),
    };
    if splits + collapses == 0 {
        return (out, 0, 0);
    }
    (relax(&out, cfg.relax_iterations), splits, collapses)
}

fn remesh_polygon<T: Real>(s: &DiscreteHypersurface<T>, cfg: &RemeshConfig) -> (DiscreteHypersurface<T>, usize, usize) {
    let v = s.vertices();
    let links = s.curve_links();
    let mean = s.edge_length_stats().mean;
    let long = T::lit(cfg.split_ratio) * mean;
    let short = T::lit(cfg.collapse_ratio) * mean;
    let mut seen = vec![false; v.len()];
    let mut verts = Vec::new();
    let mut segs = Vec::new();
    let (mut splits, mut collapses) = (0, 0);
    for start in 0..v.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(i);
            match links[i].1 {
                Some(n) => i = n,
                None => break,
            }
        }
        let mut pts: Vec<Vec3<T>> = Vec::new();
        let n = cycle.len();
        let mut k = 0;
        while k < n {
            let a = v[cycle[k]];
            let b = v[cycle[(k + 1) % n]];
            let len = a.distance(b);
            if len < short && n > 8 && k + 1 < n {
                pts.push((a + b) * T::lit(0.5));
                collapses += 1;
                k += 2;
                continue;
            }
            pts.push(a);
            if len > long {
                let pieces = (len / mean).ceil().to_usize().unwrap_or(2).max(2);
                for p in 1..pieces {
                    let f = T::from_usize_lossy(p) / T::from_usize_lossy(pieces);
                    pts.push(a + (b - a) * f);
                }
                splits += pieces - 1;
            }
            k += 1;
        }
        let base = verts.len();
        let m = pts.len();
        verts.extend(pts);
        for j in 0..m {
            segs.push([base + j, base + (j + 1) % m]);
        }
    }
    let out = DiscreteHypersurface::from_parts_unchecked(s.ambient_dim(), verts, Elements::Segments(segs), s.orientation());
    (out, splits, collapses)
}

fn tri_normal<T: Real>(v: &[Vec3<T>], t: [usize; 3]) -> Vec3<T> {
    (v[t[1]] - v[t[0]]).cross(v[t[2]] - v[t[0]])
}

fn remesh_triangles<T: Real>(s: &DiscreteHypersurface<T>, cfg: &RemeshConfig) -> (DiscreteHypersurface<T>, usize, usize) {
    let mut v = s.vertices().to_vec();
    let Elements::Triangles(t0) = s.elements() else { unreachable!() };
    let mut tris = t0.clone();
    let mean = s.edge_length_stats().mean;
    let long = T::lit(cfg.split_ratio) * mean;
    let short = T::lit(cfg.collapse_ratio) * mean;

    // Splits: one long edge per triangle pair per pass.
    let mut splits = 0;
    let mut edge_tris: HashMap<(usize, usize), usize> = HashMap::new();
    for (ti, t) in tris.iter().enumerate() {
        for k in 0..3 {
            edge_tris.insert((t[k], t[(k + 1) % 3]), ti);
        }
    }
    let mut long_edges: Vec<(T, usize, usize)> = edge_tris
        .keys()
        .filter(|(a, b)| a < b)
        .map(|&(a, b)| (v[a].distance(v[b]), a, b))
        .filter(|e| e.0 > long)
        .collect();
    long_edges.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut touched = vec![false; tris.len()];
    for (_, a, b) in long_edges {
        let (Some(&t1), Some(&t2)) = (edge_tris.get(&(a, b)), edge_tris.get(&(b, a))) else { continue };
        if touched[t1] || touched[t2] {
            continue;
        }
        touched[t1] = true;
        touched[t2] = true;
        let m = v.len();
        v.push((v[a] + v[b]) * T::lit(0.5));
        let c = *tris[t1].iter().find(|&&x| x != a && x != b).unwrap();
        let d = *tris[t2].iter().find(|&&x| x != a && x != b).unwrap();
        tris[t1] = [a, m, c];
        tris[t2] = [b, m, d];
        tris.push([m, b, c]);
        tris.push([m, a, d]);
        touched.push(true);
        touched.push(true);
        splits += 1;
    }

    // Collapses of short edges with the link condition and a fold-over guard.
    let mut collapses = 0;
    let mut alive = vec![true; tris.len()];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); v.len()];
    for (ti, t) in tris.iter().enumerate() {
        for &x in t {
            incident[x].push(ti);
        }
    }
    let mut locked = vec![false; v.len()];
    let mut short_edges: Vec<(T, usize, usize)> = Vec::new();
    for t in &tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if a < b {
                let l = v[a].distance(v[b]);
                if l < short {
                    short_edges.push((l, a, b));
                }
            }
        }
    }
    short_edges.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal).then((x.1, x.2).cmp(&(y.1, y.2))));
    let live_vertices = v.len();
    for (_, a, b) in short_edges {
        if locked[a] || locked[b] || live_vertices - collapses <= 12 {
            continue;
        }
        let around = |x: usize| -> HashSet<usize> {
            incident[x]
                .iter()
                .filter(|&&ti| alive[ti])
                .flat_map(|&ti| tris[ti].iter().copied())
                .filter(|&y| y != x)
                .collect()
        };
        let (na, nb) = (around(a), around(b));
        if na.intersection(&nb).count() != 2 {
            continue;
        }
        let mid = (v[a] + v[b]) * T::lit(0.5);
        let mut ok = true;
        for &ti in incident[a].iter().chain(incident[b].iter()) {
            if !alive[ti] {
                continue;
            }
            let t = tris[ti];
            if t.contains(&a) && t.contains(&b) {
                continue;
            }
            let before = tri_normal(&v, t);
            let moved: Vec<Vec3<T>> = t.iter().map(|&x| if x == a || x == b { mid } else { v[x] }).collect();
            let after = (moved[1] - moved[0]).cross(moved[2] - moved[0]);
            if !(after.dot(before) > T::zero()) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        v[a] = mid;
        let inc_b = std::mem::take(&mut incident[b]);
        for ti in inc_b {
            if !alive[ti] {
                continue;
            }
            if tris[ti].contains(&a) {
                alive[ti] = false;
                continue;
            }
            for x in tris[ti].iter_mut() {
                if *x == b {
                    *x = a;
                }
            }
            incident[a].push(ti);
        }
        for y in na.iter().chain(nb.iter()) {
            locked[*y] = true;
        }
        locked[a] = true;
        locked[b] = true;
        collapses += 1;
    }

    let tris: Vec<[usize; 3]> = tris.into_iter().zip(alive).filter(|p| p.1).map(|p| p.0).collect();
    let mut used = vec![usize::MAX; v.len()];
    let mut verts = Vec::new();
    for t in &tris {
        for &x in t {
            if used[x] == usize::MAX {
                used[x] = verts.len();
                verts.push(v[x]);
            }
        }
    }
    let tris = tris.into_iter().map(|t| [used[t[0]], used[t[1]], used[t[2]]]).collect();
    let out = DiscreteHypersurface::from_parts_unchecked(s.ambient_dim(), verts, Elements::Triangles(tris), s.orientation());
    (out, splits, collapses)
}

/// Moves each vertex halfway toward its neighbour average, tangentially only.
fn relax<T: Real>(s: &DiscreteHypersurface<T>, iterations: usize) -> DiscreteHypersurface<T> {
    let mut cur = s.clone();
    let nbrs = s.vertex_neighbors();
    for _ in 0..iterations {
        let Ok(nu) = cur.outward_normals() else { break };
        let v = cur.vertices();
        let next: Vec<Vec3<T>> = v
            .iter()
            .enumerate()
            .map(|(i, x)| {
                if nbrs[i].is_empty() {
                    return *x;
                }
                let avg = nbrs[i].iter().map(|&j| v[j]).sum::<Vec3<T>>() / T::from_usize_lossy(nbrs[i].len());
                let d = avg - *x;
                let d = d - nu[i] * nu[i].dot(d);
                *x + d * T::lit(0.5)
            })
            .collect();
        cur = cur.with_vertices_unchecked(next);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn uniform_meshes_are_left_alone() {
        let c = shapes::circle(1.0, 64, Vec3::<f64>::zero()).unwrap();
        assert!(!needs_remesh(&c, &RemeshConfig::default()));
        let s = shapes::icosphere(1.0, 3, Vec3::<f64>::zero()).unwrap();
        assert!(!needs_remesh(&s, &RemeshConfig::default()));
    }

    #[test]
    fn polygon_long_edge_is_split() {
        let mut v: Vec<Vec3<f64>> = (0..40)
            .map(|i| {
                let th = std::f64::consts::PI * 1.5 * i as f64 / 39.0;
                Vec3::planar(th.cos(), th.sin())
            })
            .collect();
        v.push(Vec3::planar(0.0, 0.0));
        let n = v.len();
        let segs = (0..n).map(|i| [i, (i + 1) % n]).collect();
        let s = DiscreteHypersurface::new(2, v, Elements::Segments(segs), crate::geometry::Orientation::Outward).unwrap();
        let (out, splits, _) = remesh(&s, &RemeshConfig::default());
        assert!(splits > 0);
        out.validate(1e-12).unwrap();
        assert!(out.signed_enclosed_measure() > 0.0);
    }

    #[test]
    fn stretched_sphere_stays_valid() {
        let s = shapes::icosphere(1.0, 3, Vec3::<f64>::zero()).unwrap();
        let v = s.vertices().iter().map(|p| Vec3::new(p.x * 6.0, p.y, p.z)).collect();
        let s = s.with_vertices(v).unwrap();
        assert!(needs_remesh(&s, &RemeshConfig::default()));
        let (out, splits, collapses) = remesh(&s, &RemeshConfig::default());
        assert!(splits + collapses > 0);
        out.validate(1e-12).unwrap();
        assert_eq!(out.component_count(), 1);
        assert!((out.enclosed_measure() - s.enclosed_measure()).abs() / s.enclosed_measure() < 0.05);
    }
}
