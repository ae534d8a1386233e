use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extract::extract_boundary;
use super::fmm::reinitialize;
use super::grid::{LevelSetRegion, RegionStatus};
use super::query::{component_count, enclosed_volume, front_curvature, pinch_location};
use crate::error::{Error, Result};
use crate::geometry::DiscreteHypersurface;
use crate::scalar::Real;
use crate::vector::Vec3;

/// Largest stable step: the curvature limit h²/(2(m+1)) and, for non-zero
/// fields, the advective limit h / sup|X| over the box.
pub fn stable_dt<T: Real>(region: &LevelSetRegion<T>) -> T {
    let g = &region.geometry;
    let h = g.h;
    let diffusive = h * h / (T::lit(2.0) * T::from_usize_lossy(g.dim));
    if region.field.is_zero() {
        return diffusive;
    }
    let (lo, hi) = (g.lo, g.hi());
    let mut vmax = T::zero();
    for m in 0..(1usize << g.dim) {
        let mut c = lo;
        for a in 0..g.dim {
            if m >> a & 1 == 1 {
                c[a] = hi[a];
            }
        }
        vmax = vmax.max(region.field.eval(c).norm());
    }
    if vmax > T::zero() {
        diffusive.min(h / vmax)
    } else {
        diffusive
    }
}

/// One explicit step of φ_t = |∇φ| div(∇φ/|∇φ|) − X·∇φ on the band |φ| ≤ 6h.
pub fn step<T: Real>(region: &LevelSetRegion<T>, dt: T) -> Result<LevelSetRegion<T>> {
    if region.status != RegionStatus::Active {
        return Ok(region.clone());
    }
    let cap = stable_dt(region);
    if !(dt > T::zero()) || dt > cap * T::lit(1.0 + 1e-9) {
        return Err(Error::StabilityCap {
            dt: dt.as_f64(),
            cap: cap.as_f64(),
        });
    }
    let g = region.geometry;
    let h = g.h;
    let band = region.band();
    let phi = &region.phi;
    let field = region.field;
    let updates: Vec<(usize, T, bool)> = (0..phi.len())
        .into_par_iter()
        .filter(|&i| phi[i].abs() <= band && g.cells_from_boundary(i) >= 1)
        .map(|i| {
            let mut grad = [T::zero(); 3];
            let mut hess = [[T::zero(); 3]; 3];
            let mut adv = T::zero();
            let x = g.position(i);
            let xv = field.eval(x);
            for a in 0..g.dim {
                let sa = g.stride(a);
                let (pm, p0, pp) = (phi[i - sa], phi[i], phi[i + sa]);
                grad[a] = (pp - pm) / (T::lit(2.0) * h);
                hess[a][a] = (pp - T::lit(2.0) * p0 + pm) / (h * h);
                for b in 0..a {
                    let sb = g.stride(b);
                    let v = (phi[i + sa + sb] - phi[i + sa - sb] - phi[i - sa + sb] + phi[i - sa - sb])
                        / (T::lit(4.0) * h * h);
                    hess[a][b] = v;
                    hess[b][a] = v;
                }
                if xv[a] > T::zero() {
                    adv += xv[a] * (p0 - pm) / h;
                } else if xv[a] < T::zero() {
                    adv += xv[a] * (pp - p0) / h;
                }
            }
            let g2: T = grad[..g.dim].iter().map(|&v| v * v).sum();
            let singular = g2.sqrt() < T::lit(1e-6);
            let mut curv = T::zero();
            if !singular {
                for a in 0..g.dim {
                    for b in 0..g.dim {
                        let delta = if a == b { g2 } else { T::zero() };
                        curv += (delta - grad[a] * grad[b]) * hess[a][b];
                    }
                }
                curv /= g2;
            }
            let speed = if singular { T::zero() } else { curv - adv };
            (i, phi[i] + dt * speed, singular)
        })
        .collect();
    let mut next = region.clone();
    let mut singular = 0;
    for (i, v, s) in updates {
        next.phi[i] = v;
        singular += s as usize;
    }
    // A lone interior node is below grid resolution; it cannot move once its
    // centred gradient vanishes, so it is dropped.
    let lone: Vec<usize> = (0..next.phi.len())
        .into_par_iter()
        .filter(|&i| {
            let p = &next.phi;
            if p[i] > T::zero() {
                return false;
            }
            let mut alone = true;
            g.neighbors(i, |n, _| alone &= p[n] > T::zero());
            alone
        })
        .collect();
    for i in lone {
        next.phi[i] = next.phi[i].abs().max(h * T::lit(1e-3));
    }
    next.t = region.t + dt;
    next.stats.steps += 1;
    next.stats.singular_cells += singular;
    next.steps_since_reinit += 1;
    if region.config.reinit_every > 0 && next.steps_since_reinit >= region.config.reinit_every {
        reinitialize(&mut next);
    }
    let margin = region.config.boundary_cells.ceil() as usize;
    let (any_inside, near_wall) = next
        .phi
        .par_iter()
        .enumerate()
        .filter(|(_, &p)| p <= T::zero())
        .map(|(i, _)| (true, g.cells_from_boundary(i) < margin))
        .reduce(|| (false, false), |a, b| (a.0 || b.0, a.1 || b.1));
    if !any_inside {
        next.status = RegionStatus::Extinct;
    } else if near_wall {
        next.status = RegionStatus::DomainExhausted;
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Horizon {
    Until { t: f64 },
    /// Runs until extinction, or until the elapsed time exceeds the first
    /// topology change by `after_fraction` of it, capped by `max_t`.
    Auto { max_t: f64, after_fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LevelSetRunConfig {
    /// Fraction of the stable step used.
    pub cfl: f64,
    pub sample_interval: f64,
    /// Keep φ at each sample (large on fine grids).
    pub keep_phi: bool,
    /// Extract boundary surfaces at samples.
    pub extract: bool,
}

impl Default for LevelSetRunConfig {
    fn default() -> Self {
        Self {
            cfl: 0.9,
            sample_interval: 0.05,
            keep_phi: false,
            extract: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LevelSetSample<T> {
    pub t: T,
    pub boundary: Option<DiscreteHypersurface<T>>,
    pub phi: Option<Vec<T>>,
    pub volume: T,
    pub components: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StepRecord<T> {
    pub t: T,
    pub volume: T,
    pub components: usize,
    pub max_curvature: T,
    pub max_curvature_at: Vec3<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TopologyEvent<T> {
    /// Last time with the old component count.
    pub t_before: T,
    pub t_after: T,
    pub components_before: usize,
    pub components_after: usize,
    /// Centroid of the highest-curvature front just before the change.
    pub location: Vec3<T>,
    pub curvature: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LevelSetTrajectory<T> {
    pub final_region: LevelSetRegion<T>,
    pub samples: Vec<LevelSetSample<T>>,
    pub records: Vec<StepRecord<T>>,
    pub topology_events: Vec<TopologyEvent<T>>,
    pub status: RegionStatus,
    pub extinction_time: Option<T>,
    pub dt: T,
}

impl<T: Real> LevelSetTrajectory<T> {
    /// (t, boundary) pairs of the samples that were extracted.
    pub fn boundaries(&self) -> impl Iterator<Item = (T, &DiscreteHypersurface<T>)> {
        self.samples.iter().filter_map(|s| s.boundary.as_ref().map(|b| (s.t, b)))
    }
}

fn sample<T: Real>(r: &LevelSetRegion<T>, cfg: &LevelSetRunConfig) -> Result<LevelSetSample<T>> {
    Ok(LevelSetSample {
        t: r.t,
        boundary: if cfg.extract { Some(extract_boundary(r)?) } else { None },
        phi: cfg.keep_phi.then(|| r.phi.clone()),
        volume: enclosed_volume(r),
        components: component_count(r),
    })
}

fn record<T: Real>(r: &LevelSetRegion<T>) -> StepRecord<T> {
    let fc = front_curvature(r);
    StepRecord {
        t: r.t,
        volume: enclosed_volume(r),
        components: component_count(r),
        max_curvature: fc.max_abs,
        max_curvature_at: fc.at,
    }
}

/// Extinction time from a linear fit of volume^(2/(m+1)) over the last records.
fn extrapolate_extinction<T: Real>(records: &[StepRecord<T>], dim: usize, fallback: T) -> T {
    let live: Vec<&StepRecord<T>> = records.iter().filter(|r| r.volume > T::zero()).collect();
    let tail = &live[live.len().saturating_sub(12)..];
    if tail.len() < 3 {
        return fallback;
    }
    let p = 2.0 / dim as f64;
    let pts: Vec<(f64, f64)> = tail.iter().map(|r| (r.t.as_f64(), r.volume.as_f64().powf(p))).collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|q| q.0).sum::<f64>() / n;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|q| (q.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|q| (q.0 - mt) * (q.1 - my)).sum();
    if sxx <= 0.0 || sxy >= 0.0 {
        return fallback;
    }
    let root = mt - my / (sxy / sxx);
    let last = tail.last().map(|r| r.t.as_f64()).unwrap_or(root);
    T::lit(root.clamp(last, fallback.as_f64()))
}

/// Evolves `region` with the largest stable step scaled by `cfg.cfl`, sampling
/// every `cfg.sample_interval` and recording component counts every step.
pub fn run<T: Real>(region: &LevelSetRegion<T>, horizon: Horizon, cfg: &LevelSetRunConfig) -> Result<LevelSetTrajectory<T>> {
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(Error::InvalidParameter("cfl must lie in (0, 1]".into()));
    }
    if !(cfg.sample_interval > 0.0) {
        return Err(Error::InvalidParameter("sample interval must be positive".into()));
    }
    let (t_end, auto) = match horizon {
        Horizon::Until { t } => (t, None),
        Horizon::Auto { max_t, after_fraction } => (max_t, Some(after_fraction)),
    };
    if !(T::lit(t_end) > region.t) {
        return Err(Error::InvalidParameter("horizon must exceed the region time".into()));
    }
    let dt_full = stable_dt(region) * T::lit(cfg.cfl);
    let mut cur = region.clone();
    let mut samples = vec![sample(&cur, cfg)?];
    let mut records = vec![record(&cur)];
    let mut events = Vec::new();
    let mut next_sample = cur.t.as_f64() + cfg.sample_interval;
    let mut extinction_time = None;
    let t_start = cur.t.as_f64();
    loop {
        let t = cur.t.as_f64();
        if t >= t_end - 1e-12 || cur.status != RegionStatus::Active {
            break;
        }
        if let (Some(frac), Some(ev)) = (auto, events.first()) {
            let ev: &TopologyEvent<T> = ev;
            let te = ev.t_after.as_f64();
            if t >= te + frac * (te - t_start) {
                break;
            }
        }
        let dt = dt_full.min(T::lit(t_end - t));
        let prev_components = records.last().map(|r| r.components).unwrap_or(0);
        let next = step(&cur, dt)?;
        let rec = record(&next);
        if next.status == RegionStatus::Extinct {
            extinction_time = Some(extrapolate_extinction(&records, cur.geometry.dim, next.t));
        } else if rec.components != prev_components && rec.components > 0 {
            let (location, curvature) = pinch_location(&cur).unwrap_or((rec.max_curvature_at, rec.max_curvature));
            events.push(TopologyEvent {
                t_before: cur.t,
                t_after: next.t,
                components_before: prev_components,
                components_after: rec.components,
                location,
                curvature,
            });
        }
        records.push(rec);
        cur = next;
        let t = cur.t.as_f64();
        if t >= next_sample - 1e-12 || t >= t_end - 1e-12 || cur.status != RegionStatus::Active {
            samples.push(sample(&cur, cfg)?);
            while next_sample <= t + 1e-12 {
                next_sample += cfg.sample_interval;
            }
        }
    }
    let status = cur.status;
    Ok(LevelSetTrajectory {
        final_region: cur,
        samples,
        records,
        topology_events: events,
        status,
        extinction_time,
        dt: dt_full,
    })
}
