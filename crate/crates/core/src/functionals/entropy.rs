use argmin::core::{CostFunction, Executor, Gradient};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::neldermead::NelderMead;
use argmin::solver::quasinewton::BFGS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gaussian::{gaussian_area, KernelQuadrature};
use crate::geometry::DiscreteHypersurface;
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptConfig {
    /// Total number of local ascents (deterministic seeds first, random fill after).
    pub restarts: usize,
    /// Admissible scales as multiples of `2√(2m) / diameter`.
    pub scale_bounds: (f64, f64),
    /// Gradient norm below which a local ascent counts as converged.
    pub tolerance: f64,
    pub max_iters: u64,
    pub seed: u64,
    /// Elements wider than `kernel_resolution / λ` near the center are
    /// subdivided when evaluating the objective.
    pub kernel_resolution: f64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            scale_bounds: (1e-2, 1e2),
            tolerance: 1e-7,
            max_iters: 200,
            seed: 0,
            kernel_resolution: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EntropyResult<T> {
    pub value: T,
    pub argmax_center: Vec3<T>,
    pub argmax_scale: T,
    pub restarts_used: usize,
    pub converged: bool,
    /// The maximizing scale sits on one of the configured bounds.
    pub scale_at_bound: bool,
    pub gradient_norm: T,
}

#[derive(Clone, Copy)]
struct Objective<'a, T> {
    quadrature: &'a KernelQuadrature<'a, T>,
    dim: usize,
    log_bounds: (f64, f64),
}

impl<T: Real> Objective<'_, T> {
    fn unpack(&self, p: &[f64]) -> (Vec3<T>, f64) {
        let mut c = Vec3::zero();
        for k in 0..self.dim {
            c[k] = T::lit(p[k]);
        }
        (c, p[self.dim])
    }

    fn clamped(&self, s: f64) -> f64 {
        s.clamp(self.log_bounds.0, self.log_bounds.1)
    }

    /// Value and ascent gradient; the scale component is dropped outside the bounds.
    fn eval(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let (c, s) = self.unpack(p);
        let sc = self.clamped(s);
        let (f, gc, gs) = self.quadrature.eval(c, T::lit(sc.exp()));
        let mut g: Vec<f64> = (0..self.dim).map(|k| gc[k].as_f64()).collect();
        let gs = gs.as_f64();
        let outward = (s >= self.log_bounds.1 && gs > 0.0) || (s <= self.log_bounds.0 && gs < 0.0);
        g.push(if outward { 0.0 } else { gs });
        (f.as_f64(), g)
    }
}

impl<T: Real> CostFunction for Objective<'_, T> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        Ok(-self.eval(p).0)
    }
}

impl<T: Real> Gradient for Objective<'_, T> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Vec<f64>) -> Result<Vec<f64>, argmin::core::Error> {
        Ok(self.eval(p).1.into_iter().map(|g| -g).collect())
    }
}

struct Ascent {
    value: f64,
    param: Vec<f64>,
    grad_norm: f64,
}

fn bfgs<T: Real>(obj: &Objective<'_, T>, start: &[f64], cfg: &OptConfig) -> Option<Vec<f64>> {
    let n = start.len();
    let eye: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let solver = BFGS::new(MoreThuenteLineSearch::new())
        .with_tolerance_grad(cfg.tolerance)
        .ok()?
        .with_tolerance_cost(1e-15)
        .ok()?;
    let res = Executor::new(*obj, solver)
        .configure(|st| st.param(start.to_vec()).inv_hessian(eye).max_iters(cfg.max_iters))
        .run()
        .ok()?;
    res.state.best_param
}

fn nelder_mead<T: Real>(obj: &Objective<'_, T>, start: &[f64], cfg: &OptConfig) -> Option<Vec<f64>> {
    let n = start.len();
    let (c, s) = obj.unpack(start);
    let _ = c;
    let step_c = 0.25 * (-s).exp();
    let mut simplex = vec![start.to_vec()];
    for k in 0..n {
        let mut p = start.to_vec();
        p[k] += if k < n - 1 { step_c } else { 0.2 };
        simplex.push(p);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-13).ok()?;
    let res = Executor::new(*obj, solver)
        .configure(|st| st.max_iters(cfg.max_iters * 10))
        .run()
        .ok()?;
    res.state.best_param
}

fn ascend<T: Real>(obj: &Objective<'_, T>, start: &[f64], cfg: &OptConfig) -> Ascent {
    let finish = |p: Vec<f64>| {
        let (value, g) = obj.eval(&p);
        let grad_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ascent { value, param: p, grad_norm }
    };
    let mut best = finish(start.to_vec());
    if let Some(p) = bfgs(obj, start, cfg) {
        let a = finish(p);
        if a.value.is_finite() && a.value >= best.value {
            best = a;
        }
    }
    if !(best.grad_norm <= cfg.tolerance * 10.0) {
        if let Some(p) = nelder_mead(obj, &best.param, cfg) {
            let a = finish(p);
            if a.value.is_finite() && a.value >= best.value {
                best = a;
            }
        }
    }
    best
}

/// Reference scale that takes a sphere of the surface's diameter to the
/// shrinker radius.
fn reference_scale<T: Real>(s: &DiscreteHypersurface<T>) -> f64 {
    let m = s.intrinsic_dim() as f64;
    let d = s.diameter().as_f64();
    if d > 0.0 {
        2.0 * (2.0 * m).sqrt() / d
    } else {
        1.0
    }
}

fn seeds<T: Real>(s: &DiscreteHypersurface<T>, cfg: &OptConfig, lambda_ref: f64, log_bounds: (f64, f64)) -> Vec<(Vec3<f64>, f64)> {
    let dim = s.ambient_dim();
    let clamp = |l: f64| l.ln().clamp(log_bounds.0, log_bounds.1);
    let mut out = Vec::new();

    let verts: Vec<Vec3<f64>> = s.vertices().iter().map(|v| v.cast()).collect();
    let w = s.vertex_measures();
    let (mut num, mut den) = (Vec3::zero(), 0.0);
    for (x, wv) in verts.iter().zip(w.iter()) {
        let k = wv.as_f64() * (-x.norm_squared() / 4.0).exp();
        num += *x * k;
        den += k;
    }
    let centroid: Vec3<f64> = s.centroid().cast();
    let gauss_centroid = if den > 0.0 { num / den } else { centroid };
    out.push((gauss_centroid, clamp(1.0)));
    out.push((Vec3::zero(), clamp(1.0)));
    out.push((centroid, clamp(lambda_ref)));

    // Osculating spheres/cylinders at well-separated high-curvature vertices.
    let h = s.mean_curvature_vector();
    let mut order: Vec<usize> = (0..verts.len()).collect();
    order.sort_by(|&a, &b| h[b].norm_squared().as_f64().total_cmp(&h[a].norm_squared().as_f64()).then(a.cmp(&b)));
    let sep = 0.1 * s.diameter().as_f64();
    let mut picked: Vec<usize> = Vec::new();
    for &i in &order {
        if picked.len() == 2 {
            break;
        }
        if picked.iter().all(|&j| verts[j].distance(verts[i]) > sep) {
            picked.push(i);
        }
    }
    for &i in &picked {
        let hv: Vec3<f64> = h[i].cast();
        let h2 = hv.norm_squared();
        if !(h2 > 0.0) {
            continue;
        }
        for j in 1..=s.intrinsic_dim() {
            let jf = j as f64;
            let c = verts[i] + hv * (jf / h2);
            out.push((c, clamp((2.0 * jf).sqrt() * h2.sqrt() / jf)));
        }
    }

    let (lo, hi) = s.bounding_box();
    let (lo, hi): (Vec3<f64>, Vec3<f64>) = (lo.cast(), hi.cast());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while out.len() < cfg.restarts {
        let mut c = Vec3::zero();
        for k in 0..dim {
            c[k] = if hi[k] > lo[k] { rng.random_range(lo[k]..hi[k]) } else { lo[k] };
        }
        out.push((c, rng.random_range(log_bounds.0..log_bounds.1)));
    }
    out
}

/// sup over (x₀, λ) of F[λ(x − x₀)] by multistart local ascent.
pub fn entropy<T: Real>(s: &DiscreteHypersurface<T>, cfg: &OptConfig) -> EntropyResult<T> {
    let dim = s.ambient_dim();
    let identity = gaussian_area(s).value;
    if s.element_count() == 0 {
        return EntropyResult {
            value: T::zero(),
            argmax_center: Vec3::zero(),
            argmax_scale: T::one(),
            restarts_used: 0,
            converged: true,
            scale_at_bound: false,
            gradient_norm: T::zero(),
        };
    }
    let lambda_ref = reference_scale(s);
    let log_bounds = ((cfg.scale_bounds.0 * lambda_ref).ln(), (cfg.scale_bounds.1 * lambda_ref).ln());
    let quadrature = KernelQuadrature::new(s, T::lit(cfg.kernel_resolution));
    let obj = Objective { quadrature: &quadrature, dim, log_bounds };
    let starts: Vec<Vec<f64>> = seeds(s, cfg, lambda_ref, log_bounds)
        .into_iter()
        .map(|(c, ls)| {
            let mut p: Vec<f64> = (0..dim).map(|k| c[k]).collect();
            p.push(ls);
            p
        })
        .collect();
    let results: Vec<Ascent> = starts.par_iter().map(|p| ascend(&obj, p, cfg)).collect();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value > results[best].value {
            best = i;
        }
    }
    let b = &results[best];
    let (c, s_log) = obj.unpack(&b.param);
    let s_log = obj.clamped(s_log);
    let tol = 1e-9 * (log_bounds.1 - log_bounds.0);
    let (value, center, scale) = if b.value >= identity.as_f64() {
        (T::lit(b.value), c, T::lit(s_log.exp()))
    } else {
        (identity, Vec3::zero(), T::one())
    };
    EntropyResult {
        value,
        argmax_center: center,
        argmax_scale: scale,
        restarts_used: results.len(),
        converged: b.grad_norm <= cfg.tolerance * 10.0,
        scale_at_bound: s_log <= log_bounds.0 + tol || s_log >= log_bounds.1 - tol,
        gradient_norm: T::lit(b.grad_norm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn e1() -> f64 {
        (2.0 * std::f64::consts::PI / std::f64::consts::E).sqrt()
    }

    #[test]
    fn shrinker_circle_is_its_own_maximizer() {
        let c = shapes::circle(2f64.sqrt(), 512, Vec3::<f64>::zero()).unwrap();
        let r = entropy(&c, &OptConfig::default());
        assert!((r.value - e1()).abs() < 1e-2);
        assert!(r.argmax_center.norm() < 1e-3);
        assert!((r.argmax_scale - 1.0).abs() < 1e-3);
        assert!(r.converged);
    }

    #[test]
    fn offset_circle_is_found() {
        let c = shapes::circle(3.0, 512, Vec3::new(1.0, -2.0, 0.0)).unwrap();
        let r = entropy(&c, &OptConfig::default());
        assert!((r.value - e1()).abs() < 1e-2);
        assert!((r.argmax_scale - 2f64.sqrt() / 3.0).abs() < 1e-3);
        assert!((r.argmax_center - Vec3::new(1.0, -2.0, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn unit_sphere_reaches_four_over_e() {
        let s = shapes::icosphere(1.0, 4, Vec3::<f64>::zero()).unwrap();
        let r = entropy(&s, &OptConfig::default());
        assert!((r.value - 4.0 / std::f64::consts::E).abs() < 2e-2);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let s = shapes::torus(0.4, 1.2, 12, 36, Vec3::<f64>::zero()).unwrap();
        let cfg = OptConfig { seed: 7, ..OptConfig::default() };
        assert_eq!(entropy(&s, &cfg), entropy(&s, &cfg));
    }
}
