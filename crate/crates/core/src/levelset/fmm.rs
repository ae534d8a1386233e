use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::grid::{GridGeometry, LevelSetRegion};
use crate::scalar::Real;

#[derive(Clone, Copy)]
struct Item<T>(T, usize);

impl<T: Real> PartialEq for Item<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<T: Real> Eq for Item<T> {}
impl<T: Real> PartialOrd for Item<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T: Real> Ord for Item<T> {
    // Reversed so the heap pops the smallest value.
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.as_f64().total_cmp(&self.0.as_f64()).then(o.1.cmp(&self.1))
    }
}

/// First-order upwind eikonal update from accepted neighbours.
fn solve<T: Real>(g: &GridGeometry<T>, d: &[T], known: &[bool], idx: usize) -> T {
    let mut a = [T::infinity(); 3];
    g.neighbors(idx, |n, axis| {
        if known[n] && d[n] < a[axis] {
            a[axis] = d[n];
        }
    });
    a[..g.dim].sort_by(|x, y| x.as_f64().total_cmp(&y.as_f64()));
    let h = g.h;
    let mut u = a[0] + h;
    for k in 2..=g.dim {
        if a[k - 1] >= u {
            break;
        }
        let kk = T::from_usize_lossy(k);
        let s: T = a[..k].iter().copied().sum();
        let s2: T = a[..k].iter().map(|&x| x * x).sum();
        let disc = s * s - kk * (s2 - h * h);
        if disc < T::zero() {
            break;
        }
        u = (s + disc.sqrt()) / kk;
    }
    u
}

/// Extends unsigned distances from the `known` nodes to the whole grid.
pub(crate) fn march<T: Real>(g: &GridGeometry<T>, d: &mut [T], known: &mut [bool]) {
    let mut heap = BinaryHeap::new();
    let mut close = vec![false; d.len()];
    for i in 0..d.len() {
        if known[i] {
            g.neighbors(i, |n, _| {
                if !known[n] && !close[n] {
                    close[n] = true;
                    d[n] = solve(g, d, known, n);
                    heap.push(Item(d[n], n));
                }
            });
        }
    }
    while let Some(Item(v, i)) = heap.pop() {
        if known[i] || v > d[i] {
            continue;
        }
        known[i] = true;
        g.neighbors(i, |n, _| {
            if !known[n] {
                let u = solve(g, d, known, n);
                if !close[n] || u < d[n] {
                    close[n] = true;
                    d[n] = u;
                    heap.push(Item(u, n));
                }
            }
        });
    }
}

/// Resets φ to signed distance while keeping the zero set.
pub fn reinitialize<T: Real>(region: &mut LevelSetRegion<T>) {
    let g = region.geometry;
    let phi = &region.phi;
    let h = g.h;
    let n = phi.len();
    let mut d = vec![T::infinity(); n];
    let mut known = vec![false; n];
    for i in 0..n {
        let pi = phi[i];
        let inside = pi <= T::zero();
        let mut axis_d = [T::infinity(); 3];
        g.neighbors(i, |j, axis| {
            let pj = phi[j];
            if (pj <= T::zero()) != inside {
                let den = pi - pj;
                let theta = if den == T::zero() { T::zero() } else { (pi / den).abs().min(T::one()) };
                axis_d[axis] = axis_d[axis].min(theta * h);
            }
        });
        if axis_d.iter().any(|x| x.is_finite()) {
            let mut inv = T::zero();
            let mut zero = false;
            for &x in &axis_d[..g.dim] {
                if x.is_finite() {
                    if x == T::zero() {
                        zero = true;
                    } else {
                        inv += T::one() / (x * x);
                    }
                }
            }
            let axis_estimate = if zero { T::zero() } else { T::one() / inv.sqrt() };
            d[i] = central_estimate(&g, phi, i).map_or(axis_estimate, |c| c.min(h));
            known[i] = true;
        }
    }
    if !known.iter().any(|&k| k) {
        // Empty or full grid: no front to measure from.
        let far = (g.hi() - g.lo).norm() + h;
        for p in region.phi.iter_mut() {
            *p = if *p <= T::zero() { -far } else { far };
        }
    } else {
        march(&g, &mut d, &mut known);
        for (p, dist) in region.phi.iter_mut().zip(d) {
            *p = if *p <= T::zero() { -dist } else { dist };
        }
    }
    region.stats.reinitializations += 1;
    region.steps_since_reinit = 0;
    let (lo, hi) = gradient_range(region, T::lit(2.0) * h);
    region.stats.gradient_range = (lo, hi);
    if lo.is_finite() && (lo < 0.5 || hi > 2.0) {
        region.stats.gradient_ok = false;
    }
}

/// |φ| / |∇φ| with centred differences, second order for smooth φ.
fn central_estimate<T: Real>(g: &GridGeometry<T>, phi: &[T], i: usize) -> Option<T> {
    if g.cells_from_boundary(i) < 1 {
        return None;
    }
    let mut s = T::zero();
    for a in 0..g.dim {
        let st = g.stride(a);
        let da = (phi[i + st] - phi[i - st]) / (T::lit(2.0) * g.h);
        s += da * da;
    }
    let n = s.sqrt();
    (n > T::lit(0.25)).then(|| phi[i].abs() / n)
}

/// Range of the central-difference |∇φ| over interior nodes with |φ| ≤ `width`.
pub(crate) fn gradient_range<T: Real>(region: &LevelSetRegion<T>, width: T) -> (f64, f64) {
    let g = &region.geometry;
    let phi = &region.phi;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let two_h = T::lit(2.0) * g.h;
    for i in 0..phi.len() {
        if phi[i].abs() > width || g.cells_from_boundary(i) < 1 {
            continue;
        }
        let mut s = T::zero();
        for a in 0..g.dim {
            let st = g.stride(a);
            let da = (phi[i + st] - phi[i - st]) / two_h;
            s += da * da;
        }
        let v = s.sqrt().as_f64();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}
