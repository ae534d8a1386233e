use serde::{Deserialize, Serialize};

use super::gaussian::f_translate_scale;
use crate::error::{Error, Result};
use crate::flow::FlowTrajectory;
use crate::geometry::DiscreteHypersurface;
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityConfig {
    /// Allowed increase between consecutive samples before the trend counts as non-monotone.
    pub monotone_tolerance: f64,
    /// Samples whose kernel width √(2(t₀ − t)) is below this many mean edge lengths are skipped.
    pub min_kernel_edges: f64,
    /// Number of trailing samples used for the linear extrapolation to t₀.
    pub extrapolation_window: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            monotone_tolerance: 1e-2,
            min_kernel_edges: 3.0,
            extrapolation_window: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ExcludedSample<T> {
    pub t: T,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DensityEstimate<T> {
    pub spacetime_point: (Vec3<T>, T),
    /// (t, Huisken integral) for the usable samples, t increasing.
    pub samples: Vec<(T, T)>,
    pub excluded: Vec<ExcludedSample<T>>,
    pub extrapolated_theta: T,
    pub trend_is_monotone: bool,
}

/// Gauss density of an ordinary mean curvature flow at (x₀, t₀).
pub fn gauss_density<T: Real>(
    trajectory: &FlowTrajectory<T>,
    x0: Vec3<T>,
    t0: T,
    cfg: &DensityConfig,
) -> Result<DensityEstimate<T>> {
    gauss_density_samples(trajectory.samples.iter().map(|s| (s.t, &s.surface)), x0, t0, cfg)
}

/// Same as [`gauss_density`] for any time-ordered list of surfaces.
pub fn gauss_density_samples<'a, T: Real, I>(samples: I, x0: Vec3<T>, t0: T, cfg: &DensityConfig) -> Result<DensityEstimate<T>>
where
    I: IntoIterator<Item = (T, &'a DiscreteHypersurface<T>)>,
{
    let before: Vec<_> = samples.into_iter().filter(|(t, _)| *t < t0).collect();
    if before.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "{} samples before t0 = {t0}; need at least 2",
            before.len()
        )));
    }
    let mut usable = Vec::new();
    let mut excluded = Vec::new();
    for (t, s) in before {
        let tau = t0 - t;
        if s.element_count() == 0 {
            excluded.push(ExcludedSample { t, reason: "empty surface".into() });
            continue;
        }
        let width = (tau + tau).sqrt();
        let edge = s.edge_length_stats().mean;
        if width < T::lit(cfg.min_kernel_edges) * edge {
            excluded.push(ExcludedSample {
                t,
                reason: format!("kernel width {width:.3e} below {} mean edge lengths ({edge:.3e})", cfg.min_kernel_edges),
            });
            continue;
        }
        let value = f_translate_scale(s, x0, T::one() / tau.sqrt())?.value;
        usable.push((t, value));
    }
    if usable.is_empty() {
        return Err(Error::InsufficientSamples("every sample was excluded as under-resolved".into()));
    }
    usable.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let tol = T::lit(cfg.monotone_tolerance);
    let non_increasing = |w: &[(T, T)]| w.windows(2).all(|p| p[1].1 <= p[0].1 + tol);
    let trend_is_monotone = non_increasing(&usable);
    let latest = usable[usable.len() - 1].1;
    let k = cfg.extrapolation_window.max(2);
    let extrapolated_theta = if usable.len() >= k && non_increasing(&usable[usable.len() - k..]) {
        let tail = &usable[usable.len() - k..];
        let n = T::from_usize_lossy(k);
        let taus: Vec<T> = tail.iter().map(|(t, _)| t0 - *t).collect();
        let mt = taus.iter().copied().sum::<T>() / n;
        let mv = tail.iter().map(|p| p.1).sum::<T>() / n;
        let sxx: T = taus.iter().map(|&x| (x - mt) * (x - mt)).sum();
        let sxy: T = taus.iter().zip(tail).map(|(&x, p)| (x - mt) * (p.1 - mv)).sum();
        if sxx > T::zero() {
            mv - sxy / sxx * mt
        } else {
            latest
        }
    } else {
        latest
    };
    Ok(DensityEstimate {
        spacetime_point: (x0, t0),
        samples: usable,
        excluded,
        extrapolated_theta,
        trend_is_monotone,
    })
}
