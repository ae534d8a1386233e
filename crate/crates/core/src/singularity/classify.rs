use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};

use super::track::Track;
use crate::error::Result;
use crate::functionals::{gauss_density_samples, stone_entropy, DensityConfig, DensityEstimate};
use crate::geometry::DiscreteHypersurface;
use crate::scalar::Real;
use crate::vector::{symmetric_eigen, Mat3, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    /// Number of latest usable pre-singular samples in the fit.
    pub depth: usize,
    pub residual_threshold: f64,
    /// Largest accepted |Θ − E[S^j]| / E[S^j].
    pub density_tolerance: f64,
    /// Radius of the rescaled patch around the singular point.
    pub patch_radius: f64,
    pub min_patch_vertices: usize,
    /// Samples whose rescaling width √(2(t₀ − tᵢ)) is below this many mean edges are skipped.
    pub min_kernel_edges: f64,
    /// Re-estimate t₀ from a linear fit of dist(x, M(t))² against t.
    pub refine_time: bool,
    pub density: DensityConfig,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            depth: 3,
            residual_threshold: 0.1,
            density_tolerance: 0.08,
            patch_radius: 3.0,
            min_patch_vertices: 20,
            min_kernel_edges: 3.0,
            refine_time: true,
            density: DensityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum TangentFlowLabel {
    Spherical,
    Cylindrical { j: usize },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TangentFlowClassification<T> {
    pub ambient_dim: usize,
    pub x: Vec3<T>,
    /// Singular time used for the rescaling.
    pub t: T,
    pub detected_t: T,
    pub j: usize,
    /// Orthonormal frame: the j + 1 sphere directions, then the line directions.
    pub axis_fit: Vec<Vec3<T>>,
    pub fit_residual: T,
    /// Best residual for each j = 0..=m.
    pub residuals: Vec<T>,
    pub label: TangentFlowLabel,
    pub density_match: Option<T>,
    pub theta: Option<T>,
    pub density: Option<DensityEstimate<T>>,
    pub samples_used: Vec<T>,
    pub patch_vertices: usize,
    /// Whether the mean curvature is positive on at least 90% of the latest rescaled patch.
    pub convex_type: bool,
    pub diagnostic: Option<String>,
}

/// E[S^j]; the plane (j = 0) has entropy 1.
pub fn sphere_entropy(j: usize) -> f64 {
    if j == 0 {
        1.0
    } else {
        stone_entropy(j as i64).unwrap_or(f64::NAN)
    }
}

struct Patch {
    points: Vec<Vec3<f64>>,
    weights: Vec<f64>,
}

#[derive(Clone, Copy)]
struct FitCost<'a> {
    patch: &'a Patch,
    frame: [Vec3<f64>; 3],
    dim: usize,
    j: usize,
}

impl FitCost<'_> {
    fn n_rot(&self) -> usize {
        if self.j == self.dim - 1 {
            0
        } else if self.dim == 2 {
            1
        } else {
            3
        }
    }

    /// Rotated frame and centre for a parameter vector, both expressed in the PCA frame.
    fn decode(&self, p: &[f64]) -> ([Vec3<f64>; 3], Vec3<f64>) {
        let nr = self.n_rot();
        let local = if nr == 0 {
            Mat3::identity()
        } else if nr == 1 {
            Mat3::rotation(Vec3::axis(2), p[0])
        } else {
            let w = Vec3::new(p[0], p[1], p[2]);
            let a = w.norm();
            if a > 0.0 {
                Mat3::rotation(w / a, a)
            } else {
                Mat3::identity()
            }
        };
        let to_world = |v: Vec3<f64>| self.frame[0] * v.x + self.frame[1] * v.y + self.frame[2] * v.z;
        let cols = local.transpose();
        let frame = [to_world(cols.rows[0]), to_world(cols.rows[1]), to_world(cols.rows[2])];
        let mut c = Vec3::zero();
        for k in 0..self.dim {
            c[k] = p[nr + k];
        }
        (frame, to_world(c))
    }

    fn residual2(&self, p: &[f64]) -> f64 {
        let (frame, c) = self.decode(p);
        let r = (2.0 * self.j as f64).sqrt();
        let sphere_axes = &frame[..self.j + 1];
        let mut s = 0.0;
        let mut wsum = 0.0;
        for (y, w) in self.patch.points.iter().zip(&self.patch.weights) {
            let d = *y - c;
            let radial: f64 = sphere_axes.iter().map(|e| d.dot(*e).powi(2)).sum::<f64>().sqrt();
            s += w * (radial - r).powi(2);
            wsum += w;
        }
        s / wsum
    }
}

impl CostFunction for FitCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.residual2(p))
    }
}

/// PCA frame with the smallest-variance directions first, so the sphere factor
/// takes the leading axes. In the plane the unused z axis goes last.
fn pca_frame(patch: &Patch, dim: usize) -> [Vec3<f64>; 3] {
    let mut c = Mat3::from_rows([Vec3::zero(); 3]);
    let wsum: f64 = patch.weights.iter().sum();
    for (y, w) in patch.points.iter().zip(&patch.weights) {
        for a in 0..3 {
            for b in 0..3 {
                c.rows[a][b] += w * y[a] * y[b] / wsum;
            }
        }
    }
    if dim == 2 {
        c.rows[2][2] = -1.0;
        let (_, v) = symmetric_eigen(&c);
        let e0 = Vec3::new(v[1].x, v[1].y, 0.0);
        let e0 = e0 / e0.norm();
        [e0, Vec3::new(-e0.y, e0.x, 0.0), Vec3::axis(2)]
    } else {
        let (_, v) = symmetric_eigen(&c);
        // Right-handed so that rotations act consistently.
        let e2 = v[0].cross(v[1]);
        [v[0], v[1], e2]
    }
}

fn fit(patch: &Patch, dim: usize, j: usize) -> (f64, [Vec3<f64>; 3]) {
    let frame = pca_frame(patch, dim);
    let cost = FitCost { patch, frame, dim, j };
    let n = cost.n_rot() + dim;
    let mut simplex = vec![vec![0.0; n]];
    for k in 0..n {
        let mut p = vec![0.0; n];
        p[k] = 0.1;
        simplex.push(p);
    }
    let best = NelderMead::new(simplex)
        .with_sd_tolerance(1e-14)
        .ok()
        .and_then(|solver| Executor::new(cost, solver).configure(|st| st.max_iters(4000)).run().ok())
        .and_then(|res| res.state.best_param.clone());
    let p = best.unwrap_or_else(|| vec![0.0; n]);
    let (frame, _) = cost.decode(&p);
    (cost.residual2(&p).max(0.0).sqrt(), frame)
}

fn refine_time<T: Real>(track: &Track<'_, T>, x: Vec3<T>, t: T, cfg: &ClassifyConfig) -> T {
    let eligible: Vec<(f64, f64)> = track
        .samples
        .iter()
        .filter(|(ti, s)| *ti < t && !s.is_empty() && usable(s, t - *ti, cfg))
        .map(|(ti, s)| (ti.as_f64(), nearest_distance(s, x).as_f64().powi(2)))
        .collect();
    let tail = &eligible[eligible.len().saturating_sub(6)..];
    if tail.len() < 3 {
        return t;
    }
    let n = tail.len() as f64;
    let mt = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx <= 0.0 || sxy >= 0.0 {
        return t;
    }
    let root = mt - my / (sxy / sxx);
    let last = tail[tail.len() - 1].0;
    let t = t.as_f64();
    if root > last && root <= t + (t - last) {
        T::lit(root)
    } else {
        T::lit(t)
    }
}

fn nearest_distance<T: Real>(s: &DiscreteHypersurface<T>, x: Vec3<T>) -> T {
    crate::geometry::spatial::ElementIndex::new(s).nearest(x).0
}

fn usable<T: Real>(s: &DiscreteHypersurface<T>, tau: T, cfg: &ClassifyConfig) -> bool {
    (tau + tau).sqrt() >= T::lit(cfg.min_kernel_edges) * s.edge_length_stats().mean
}

fn rescaled_patch<T: Real>(s: &DiscreteHypersurface<T>, x: Vec3<T>, tau: T, radius: f64) -> Patch {
    let lam = 1.0 / tau.as_f64().sqrt();
    let mass = s.vertex_measures();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (v, w) in s.vertices().iter().zip(mass.iter()) {
        let y = (*v - x).cast::<f64>() * lam;
        if y.norm() <= radius {
            points.push(y);
            weights.push(w.as_f64());
        }
    }
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        for w in &mut weights {
            *w /= total;
        }
    }
    Patch { points, weights }
}

/// Fits the parabolically rescaled samples before (x, t) to S^j(√(2j)) × R^{m−j}.
pub fn classify_tangent_flow<T: Real>(
    track: &Track<'_, T>,
    x: Vec3<T>,
    t: T,
    cfg: &ClassifyConfig,
) -> Result<TangentFlowClassification<T>> {
    let dim = track.ambient_dim;
    let m = dim - 1;
    let t0 = if cfg.refine_time { refine_time(track, x, t, cfg) } else { t };
    let mut chosen: Vec<(T, Patch, &DiscreteHypersurface<T>)> = Vec::new();
    for (ti, s) in track.samples.iter().rev() {
        if chosen.len() >= cfg.depth {
            break;
        }
        if *ti >= t0 || s.is_empty() || !usable(s, t0 - *ti, cfg) {
            continue;
        }
        let patch = rescaled_patch(s, x, t0 - *ti, cfg.patch_radius);
        if patch.points.len() >= cfg.min_patch_vertices {
            chosen.push((*ti, patch, s.as_ref()));
        }
    }
    let mut out = TangentFlowClassification {
        ambient_dim: dim,
        x,
        t: t0,
        detected_t: t,
        j: 0,
        axis_fit: Vec::new(),
        fit_residual: T::infinity(),
        residuals: Vec::new(),
        label: TangentFlowLabel::Unknown,
        density_match: None,
        theta: None,
        density: None,
        samples_used: chosen.iter().map(|c| c.0).collect(),
        patch_vertices: chosen.iter().map(|c| c.1.points.len()).sum(),
        convex_type: false,
        diagnostic: None,
    };
    if chosen.is_empty() {
        out.diagnostic = Some(format!(
            "no sample before t = {:.6e} resolves a rescaled patch with {} vertices",
            t0.as_f64(),
            cfg.min_patch_vertices
        ));
        return Ok(out);
    }
    let n_samples = chosen.len() as f64;
    let pooled = Patch {
        points: chosen.iter().flat_map(|c| c.1.points.iter().copied()).collect(),
        weights: chosen.iter().flat_map(|c| c.1.weights.iter().map(move |w| w / n_samples)).collect(),
    };
    let mut best: Option<(usize, f64, [Vec3<f64>; 3])> = None;
    for j in 0..=m {
        let (r, frame) = fit(&pooled, dim, j);
        out.residuals.push(T::lit(r));
        // Ties go to the larger j.
        if best.is_none_or(|b| r <= b.1 + 1e-12) {
            best = Some((j, r, frame));
        }
    }
    let (j, r, frame) = best.expect("at least one model");
    out.j = j;
    out.fit_residual = T::lit(r);
    out.axis_fit = frame[..dim].iter().map(|e| e.cast()).collect();

    let latest = chosen[0].2;
    let tau = t0 - chosen[0].0;
    out.convex_type = convex_fraction(latest, x, tau, cfg.patch_radius) >= 0.9;

    match gauss_density_samples(track.samples.iter().map(|(t, s)| (*t, s.as_ref())), x, t0, &cfg.density) {
        Ok(d) => {
            let e = T::lit(sphere_entropy(j));
            out.theta = Some(d.extrapolated_theta);
            out.density_match = Some((d.extrapolated_theta - e).abs() / e);
            out.density = Some(d);
        }
        Err(e) => out.diagnostic = Some(format!("density unavailable: {e}")),
    }
    let density_ok = out.density_match.is_some_and(|d| d.as_f64() <= cfg.density_tolerance);
    out.label = if r > cfg.residual_threshold || !density_ok {
        TangentFlowLabel::Unknown
    } else if j == 0 {
        out.diagnostic.get_or_insert_with(|| "planar fit: the point looks regular".into());
        TangentFlowLabel::Unknown
    } else if j == m {
        TangentFlowLabel::Spherical
    } else {
        TangentFlowLabel::Cylindrical { j }
    };
    if out.label == TangentFlowLabel::Unknown && out.diagnostic.is_none() {
        out.diagnostic = Some(format!(
            "residual {r:.3e} (threshold {}), density mismatch {:?} (tolerance {})",
            cfg.residual_threshold,
            out.density_match.map(|d| d.as_f64()),
            cfg.density_tolerance
        ));
    }
    Ok(out)
}

fn convex_fraction<T: Real>(s: &DiscreteHypersurface<T>, x: Vec3<T>, tau: T, radius: f64) -> f64 {
    let Ok(nu) = s.outward_normals() else { return 0.0 };
    let h = s.mean_curvature_vector();
    let lam = T::one() / tau.sqrt();
    let (mut pos, mut total) = (0usize, 0usize);
    for ((v, n), hv) in s.vertices().iter().zip(nu.iter()).zip(h.iter()) {
        if ((*v - x) * lam).norm().as_f64() <= radius {
            total += 1;
            if hv.dot(*n) < T::zero() {
                pos += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        pos as f64 / total as f64
    }
}
