use serde::{Deserialize, Serialize};

use super::field::AmbientVectorField;
use super::remesh::{needs_remesh, remesh, RemeshConfig, RemeshEvent};
use super::step::{explicit_dt_cap, step, Scheme, StepConfig};
use crate::error::{Error, Result};
use crate::geometry::{spatial, DiscreteHypersurface, Elements};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSchedule {
    /// Every `interval` time units from the start time.
    Every(f64),
    /// Explicit sample times; those outside (start, horizon] are ignored.
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub step: StepConfig,
    pub start_time: f64,
    pub dt_max: f64,
    /// dt ≤ curvature_dt_factor / max|H|².
    pub curvature_dt_factor: f64,
    pub samples: SampleSchedule,
    pub remesh: RemeshConfig,
    /// Extinct once the enclosed measure drops below this fraction of its initial value.
    pub extinction_fraction: f64,
    /// Blown up once max|H| · mean edge exceeds this factor.
    pub blowup_factor: f64,
    pub max_steps: usize,
    pub check_self_intersection: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            step: StepConfig::default(),
            start_time: 0.0,
            dt_max: 1e-3,
            curvature_dt_factor: 1e-2,
            samples: SampleSchedule::Every(0.05),
            remesh: RemeshConfig::default(),
            extinction_fraction: 1e-4,
            blowup_factor: 4.0,
            max_steps: 2_000_000,
            check_self_intersection: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    /// Step budget exhausted before the horizon.
    Running,
    Extinct,
    BlownUp,
    Completed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Sample<T> {
    pub t: T,
    pub surface: DiscreteHypersurface<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StepDiagnostics<T> {
    pub t: T,
    pub dt: T,
    pub max_velocity: T,
    pub max_curvature: T,
    pub min_edge: T,
    pub enclosed_measure: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FlowTrajectory<T> {
    pub vectorfield: AmbientVectorField<T>,
    pub samples: Vec<Sample<T>>,
    pub diagnostics: Vec<StepDiagnostics<T>>,
    pub remesh_events: Vec<RemeshEvent<T>>,
    pub status: FlowStatus,
    /// Extrapolated time at which the enclosed measure vanishes.
    pub extinction_time: Option<T>,
    pub message: Option<String>,
}

impl<T: Real> FlowTrajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("trajectories always hold the initial sample")
    }

    /// Sample whose time is within `tol` of `t`.
    pub fn sample_at(&self, t: T, tol: T) -> Option<&Sample<T>> {
        self.samples.iter().find(|s| (s.t - t).abs() <= tol)
    }
}

fn sample_times(schedule: &SampleSchedule, start: f64, horizon: f64) -> Vec<f64> {
    let mut out: Vec<f64> = match schedule {
        SampleSchedule::Every(dt) if *dt > 0.0 => {
            let n = ((horizon - start) / dt).floor() as usize;
            (1..=n).map(|k| start + k as f64 * dt).filter(|t| *t < horizon - 1e-12 * dt).collect()
        }
        SampleSchedule::Every(_) => Vec::new(),
        SampleSchedule::Times(ts) => ts.iter().copied().filter(|t| *t > start && *t < horizon).collect(),
    };
    out.push(horizon);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Exponent that makes the enclosed measure of a shrinking sphere linear in t.
fn linearizing_power(m: usize) -> f64 {
    2.0 / (m as f64 + 1.0)
}

fn extrapolate_extinction<T: Real>(diag: &[StepDiagnostics<T>], m: usize) -> Option<T> {
    let tail = &diag[diag.len().saturating_sub(12)..];
    if tail.len() < 3 {
        return tail.last().map(|d| d.t);
    }
    let p = linearizing_power(m);
    let pts: Vec<(f64, f64)> = tail.iter().map(|d| (d.t.as_f64(), d.enclosed_measure.as_f64().max(0.0).powf(p))).collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|q| q.0).sum::<f64>() / n;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|q| (q.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|q| (q.0 - mt) * (q.1 - my)).sum();
    let last = tail.last()?.t.as_f64();
    if sxx <= 0.0 || sxy >= 0.0 {
        return Some(T::lit(last));
    }
    let slope = sxy / sxx;
    let root = mt - my / slope;
    Some(T::lit(root.max(last)))
}

/// Integrates from `cfg.start_time` to `horizon`.
pub fn run<T: Real>(
    surface: &DiscreteHypersurface<T>,
    field: &AmbientVectorField<T>,
    horizon: T,
    cfg: &FlowConfig,
) -> Result<FlowTrajectory<T>> {
    surface.validate(T::lit(crate::geometry::DEFAULT_FLOOR_FACTOR))?;
    let start = cfg.start_time;
    let horizon_f = horizon.as_f64();
    if !(horizon_f > start) {
        return Err(Error::InvalidParameter(format!("horizon {horizon_f} must exceed the start time {start}")));
    }
    if !(cfg.dt_max > 0.0) || !(cfg.curvature_dt_factor > 0.0) {
        return Err(Error::InvalidParameter("time-step bounds must be positive".into()));
    }
    let m = surface.intrinsic_dim();
    let targets = sample_times(&cfg.samples, start, horizon_f);
    let mut traj = FlowTrajectory {
        vectorfield: *field,
        samples: vec![Sample {
            t: T::lit(start),
            surface: surface.clone(),
        }],
        diagnostics: Vec::new(),
        remesh_events: Vec::new(),
        status: FlowStatus::Running,
        extinction_time: None,
        message: None,
    };
    let initial_measure = surface.enclosed_measure();
    let mut cur = surface.clone();
    let mut t = start;
    let mut next = 0;
    let mut steps = 0usize;
    while next < targets.len() {
        if steps >= cfg.max_steps {
            traj.message = Some(format!("step budget of {} exhausted at t = {t}", cfg.max_steps));
            return Ok(traj);
        }
        let h = cur.mean_curvature_vector();
        let hmax = h.sup_norm();
        let edges = cur.edge_length_stats();
        if !hmax.is_finite() || hmax * edges.mean > T::lit(cfg.blowup_factor) {
            traj.status = FlowStatus::BlownUp;
            traj.message = Some(format!("curvature {hmax:.3e} beyond the mesh cap at t = {t}"));
            return Ok(traj);
        }
        let target = targets[next];
        let mut dt = cfg.dt_max.min(cfg.curvature_dt_factor / hmax.as_f64().powi(2).max(1e-300));
        if cfg.step.scheme == Scheme::Explicit {
            dt = dt.min(explicit_dt_cap(&cur, &cfg.step).as_f64());
        }
        let hit = t + dt >= target - 1e-12 * dt.max(1e-300);
        if hit {
            dt = target - t;
        }
        let new = match step(&cur, field, T::lit(dt), &cfg.step) {
            Ok(s) => s,
            Err(e) => {
                traj.status = FlowStatus::BlownUp;
                traj.message = Some(format!("step failed at t = {t}: {e}"));
                return Ok(traj);
            }
        };
        let max_velocity = cur
            .vertices()
            .iter()
            .zip(new.vertices())
            .map(|(a, b)| a.distance(*b))
            .fold(T::zero(), T::max)
            / T::lit(dt);
        cur = new;
        t = if hit { target } else { t + dt };
        steps += 1;
        let measure = cur.enclosed_measure();
        traj.diagnostics.push(StepDiagnostics {
            t: T::lit(t),
            dt: T::lit(dt),
            max_velocity,
            max_curvature: hmax,
            min_edge: edges.min,
            enclosed_measure: measure,
        });
        if !cur.vertices().iter().all(|v| v.is_finite()) {
            traj.status = FlowStatus::BlownUp;
            traj.message = Some(format!("non-finite positions at t = {t}"));
            return Ok(traj);
        }
        if initial_measure > T::zero() && measure < T::lit(cfg.extinction_fraction) * initial_measure {
            traj.status = FlowStatus::Extinct;
            traj.extinction_time = extrapolate_extinction(&traj.diagnostics, m);
            return Ok(traj);
        }
        if needs_remesh(&cur, &cfg.remesh) {
            let (r, splits, collapses) = remesh(&cur, &cfg.remesh);
            if splits + collapses > 0 {
                cur = r;
                traj.remesh_events.push(RemeshEvent {
                    t: T::lit(t),
                    splits,
                    collapses,
                });
            }
        }
        if hit {
            if cfg.check_self_intersection && matches!(cur.elements(), Elements::Segments(_)) && spatial::polygon_self_intersects(&cur) {
                traj.status = FlowStatus::BlownUp;
                traj.message = Some(format!("self-intersection at t = {t}"));
                return Ok(traj);
            }
            if let Err(e) = cur.validate(T::lit(crate::geometry::DEFAULT_FLOOR_FACTOR)) {
                traj.status = FlowStatus::BlownUp;
                traj.message = Some(format!("invalid mesh at t = {t}: {e}"));
                return Ok(traj);
            }
            traj.samples.push(Sample {
                t: T::lit(t),
                surface: cur.clone(),
            });
            next += 1;
        }
    }
    traj.status = FlowStatus::Completed;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::spatial::hausdorff;
    use crate::shapes;
    use crate::vector::Vec3;

    fn mean_radius(s: &DiscreteHypersurface<f64>) -> f64 {
        let c = s.centroid();
        s.vertices().iter().map(|v| v.distance(c)).sum::<f64>() / s.vertex_count() as f64
    }

    #[test]
    fn shrinking_circle_law() {
        let c = shapes::circle(2.0, 256, Vec3::<f64>::zero()).unwrap();
        let cfg = FlowConfig { samples: SampleSchedule::Every(0.1), ..FlowConfig::default() };
        let tr = run(&c, &AmbientVectorField::zero(), 1.8, &cfg).unwrap();
        assert_eq!(tr.status, FlowStatus::Completed);
        for s in &tr.samples {
            let exact = (4.0 - 2.0 * s.t).sqrt();
            assert!((mean_radius(&s.surface) - exact).abs() / exact < 1e-2, "t = {}", s.t);
        }
        assert!(tr.remesh_events.is_empty());
    }

    #[test]
    fn renormalized_unit_circle_goes_extinct_near_ln2() {
        let c = shapes::circle(1.0, 256, Vec3::<f64>::zero()).unwrap();
        let tr = run(&c, &AmbientVectorField::renormalizing(), 2.0, &FlowConfig::default()).unwrap();
        assert_eq!(tr.status, FlowStatus::Extinct);
        let te = tr.extinction_time.unwrap();
        assert!((te - 2f64.ln()).abs() / 2f64.ln() < 0.05, "{te}");
        assert!(tr.samples.iter().all(|s| s.t < te));
    }

    #[test]
    fn shrinker_stays_put() {
        let c = shapes::circle(2f64.sqrt(), 256, Vec3::<f64>::zero()).unwrap();
        let tr = run(&c, &AmbientVectorField::renormalizing(), 2.0, &FlowConfig::default()).unwrap();
        assert_eq!(tr.status, FlowStatus::Completed);
        assert!(hausdorff(&tr.last().surface, &c) < 1e-2);
        assert!(tr.remesh_events.is_empty());
    }

    #[test]
    fn sample_times_are_exact_and_increasing() {
        let c = shapes::circle(2.0, 64, Vec3::<f64>::zero()).unwrap();
        let cfg = FlowConfig { samples: SampleSchedule::Times(vec![0.013, 0.5, 0.77]), ..FlowConfig::default() };
        let tr = run(&c, &AmbientVectorField::zero(), 1.0, &cfg).unwrap();
        assert_eq!(tr.times(), vec![0.0, 0.013, 0.5, 0.77, 1.0]);
    }

    #[test]
    fn shrinking_sphere() {
        let s = shapes::icosphere(1.0, 3, Vec3::<f64>::zero()).unwrap();
        let tr = run(&s, &AmbientVectorField::zero(), 0.2, &FlowConfig::default()).unwrap();
        let exact = (1.0f64 - 4.0 * 0.2).sqrt();
        assert!((mean_radius(&tr.last().surface) - exact).abs() / exact < 2e-2);
    }
}
