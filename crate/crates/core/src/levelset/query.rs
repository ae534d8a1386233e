use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridGeometry, LevelSetRegion};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

/// dist(0, K), using the depth |φ| of interior nodes; infinity when K is empty.
pub fn distance_to_origin<T: Real>(region: &LevelSetRegion<T>) -> T {
    let g = &region.geometry;
    region
        .phi
        .par_iter()
        .enumerate()
        .filter(|(_, &p)| p <= T::zero())
        .map(|(i, &p)| (g.position(i).norm() + p).max(T::zero()))
        .reduce(T::infinity, |a, b| a.min(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ContainmentReport<T> {
    /// Whether φ(t₂) ≥ φ(t₁) + floor on every node of K(t₂).
    pub holds: bool,
    /// max(φ(t₁) + floor − φ(t₂), 0) over K(t₂).
    pub max_violation: T,
    pub floor: T,
    pub nodes_checked: usize,
}

/// Checks strict containment K(t₂) ⊂ Int K(t₁) on a shared grid. The default
/// floor is a hundredth of a cell.
pub fn containment_check<T: Real>(
    earlier: &LevelSetRegion<T>,
    later: &LevelSetRegion<T>,
    floor: Option<T>,
) -> Result<ContainmentReport<T>> {
    if !earlier.geometry.same_as(&later.geometry) {
        return Err(Error::GridMismatch);
    }
    if later.t < earlier.t {
        return Err(Error::InvalidParameter("the second region must not precede the first".into()));
    }
    let floor = floor.unwrap_or(earlier.geometry.h * T::lit(1e-2));
    let (worst, count) = later
        .phi
        .par_iter()
        .zip(earlier.phi.par_iter())
        .filter(|(p2, _)| **p2 <= T::zero())
        .map(|(&p2, &p1)| (p1 + floor - p2, 1usize))
        .reduce(|| (T::neg_infinity(), 0), |a, b| (a.0.max(b.0), a.1 + b.1));
    Ok(ContainmentReport {
        holds: count == 0 || worst <= T::zero(),
        max_violation: worst.max(T::zero()),
        floor,
        nodes_checked: count,
    })
}

/// Smoothed-Heaviside volume (area) of K.
pub fn enclosed_volume<T: Real>(region: &LevelSetRegion<T>) -> T {
    let g = &region.geometry;
    let eps = T::lit(1.5) * g.h;
    let cell = g.h.powi(g.dim as i32);
    let pi = T::PI();
    region
        .phi
        .par_iter()
        .map(|&p| {
            if p <= -eps {
                T::one()
            } else if p >= eps {
                T::zero()
            } else {
                let x = -p / eps;
                T::lit(0.5) * (T::one() + x + (pi * x).sin() / pi)
            }
        })
        .sum::<T>()
        * cell
}

/// Face-connected components of {φ ≤ 0}.
pub fn component_count<T: Real>(region: &LevelSetRegion<T>) -> usize {
    labels(&region.geometry, &region.phi).1
}

pub(crate) fn labels<T: Real>(g: &GridGeometry<T>, phi: &[T]) -> (Vec<u32>, usize) {
    let mut lab = vec![u32::MAX; phi.len()];
    let mut count = 0usize;
    let mut stack = Vec::new();
    for s in 0..phi.len() {
        if phi[s] > T::zero() || lab[s] != u32::MAX {
            continue;
        }
        lab[s] = count as u32;
        stack.push(s);
        while let Some(i) = stack.pop() {
            g.neighbors(i, |n, _| {
                if phi[n] <= T::zero() && lab[n] == u32::MAX {
                    lab[n] = count as u32;
                    stack.push(n);
                }
            });
        }
        count += 1;
    }
    (lab, count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FrontCurvature<T> {
    /// Largest |div(∇φ/|∇φ|)| over nodes adjacent to the zero set.
    pub max_abs: T,
    pub at: Vec3<T>,
    pub front_nodes: usize,
}

/// Curvature div(∇φ/|∇φ|) at an interior node; `None` where |∇φ| < 1e-6.
pub(crate) fn node_curvature<T: Real>(g: &GridGeometry<T>, phi: &[T], i: usize) -> Option<T> {
    let h = g.h;
    let mut grad = [T::zero(); 3];
    let mut hess = [[T::zero(); 3]; 3];
    for a in 0..g.dim {
        let sa = g.stride(a);
        grad[a] = (phi[i + sa] - phi[i - sa]) / (T::lit(2.0) * h);
        hess[a][a] = (phi[i + sa] - T::lit(2.0) * phi[i] + phi[i - sa]) / (h * h);
        for b in 0..a {
            let sb = g.stride(b);
            let v = (phi[i + sa + sb] - phi[i + sa - sb] - phi[i - sa + sb] + phi[i - sa - sb]) / (T::lit(4.0) * h * h);
            hess[a][b] = v;
            hess[b][a] = v;
        }
    }
    let g2: T = grad[..g.dim].iter().map(|&x| x * x).sum();
    if g2.sqrt() < T::lit(1e-6) {
        return None;
    }
    let mut num = T::zero();
    for a in 0..g.dim {
        for b in 0..g.dim {
            let delta = if a == b { g2 } else { T::zero() };
            num += (delta - grad[a] * grad[b]) * hess[a][b];
        }
    }
    Some(num / (g2 * g2.sqrt()))
}

fn is_front<T: Real>(g: &GridGeometry<T>, phi: &[T], i: usize) -> bool {
    let inside = phi[i] <= T::zero();
    let mut f = false;
    g.neighbors(i, |n, _| f |= (phi[n] <= T::zero()) != inside);
    f
}

fn front_nodes<T: Real>(region: &LevelSetRegion<T>) -> Vec<(usize, T)> {
    let g = &region.geometry;
    let phi = &region.phi;
    (0..phi.len())
        .into_par_iter()
        .filter(|&i| phi[i].abs() < g.h && g.cells_from_boundary(i) >= 2 && is_front(g, phi, i))
        .filter_map(|i| node_curvature(g, phi, i).map(|k| (i, k)))
        .collect()
}

pub fn front_curvature<T: Real>(region: &LevelSetRegion<T>) -> FrontCurvature<T> {
    let nodes = front_nodes(region);
    let mut best = (T::zero(), Vec3::zero());
    for &(i, k) in &nodes {
        if k.abs() > best.0 {
            best = (k.abs(), region.geometry.position(i));
        }
    }
    FrontCurvature {
        max_abs: best.0,
        at: best.1,
        front_nodes: nodes.len(),
    }
}

/// Centroid of the front nodes whose curvature is within 20% of the maximum.
pub fn pinch_location<T: Real>(region: &LevelSetRegion<T>) -> Option<(Vec3<T>, T)> {
    let nodes = front_nodes(region);
    let kmax = nodes.iter().map(|n| n.1).fold(T::zero(), |a, b| a.max(b));
    if !(kmax > T::zero()) {
        return None;
    }
    let cut = T::lit(0.8) * kmax;
    let sel: Vec<Vec3<T>> = nodes
        .iter()
        .filter(|n| n.1 >= cut)
        .map(|n| region.geometry.position(n.0))
        .collect();
    let c = sel.iter().copied().sum::<Vec3<T>>() / T::from_usize_lossy(sel.len());
    Some((c, kmax))
}
