use serde::{Deserialize, Serialize};

use super::classify::{sphere_entropy, TangentFlowClassification, TangentFlowLabel};
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundCheckConfig {
    /// Allowed excess of Θ over the initial entropy.
    pub entropy_tolerance: f64,
    /// Allowed relative gap |Θ − E[S^j]| / E[S^j].
    pub density_tolerance: f64,
}

impl Default for BoundCheckConfig {
    fn default() -> Self {
        Self {
            entropy_tolerance: 1e-2,
            density_tolerance: 0.08,
        }
    }
}

/// E[S^m] ≤ E[S^j] ≈ Θ ≤ E(M) at one singular point, with the slack of each link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ChainEntry<T> {
    pub x: Vec3<T>,
    pub t: T,
    pub label: TangentFlowLabel,
    pub j: usize,
    pub sphere_bound: f64,
    pub model_entropy: f64,
    pub theta: Option<T>,
    pub initial_entropy: T,
    /// E[S^j] − E[S^m].
    pub model_slack: f64,
    /// |Θ − E[S^j]| / E[S^j].
    pub density_gap: Option<T>,
    /// E(M) − Θ.
    pub entropy_slack: Option<T>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundReport<T> {
    pub entries: Vec<ChainEntry<T>>,
    pub holds: bool,
    pub failures: Vec<String>,
}

/// Checks Θ ≤ E(M) at every classified point and Θ ≈ E[S^j] where a model was accepted.
pub fn density_entropy_bound_check<T: Real>(
    classifications: &[TangentFlowClassification<T>],
    initial_entropy: T,
    cfg: &BoundCheckConfig,
) -> BoundReport<T> {
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for c in classifications {
        let m = c.ambient_dim - 1;
        let sphere_bound = sphere_entropy(m);
        let model = sphere_entropy(c.j);
        let entropy_slack = c.theta.map(|th| initial_entropy - th);
        let gap = c.theta.map(|th| (th - T::lit(model)).abs() / T::lit(model));
        let mut holds = true;
        let name = format!("point ({:.4}, {:.4}, {:.4}) at t = {:.6}", c.x.x.as_f64(), c.x.y.as_f64(), c.x.z.as_f64(), c.t.as_f64());
        match entropy_slack {
            Some(s) if s.as_f64() < -cfg.entropy_tolerance => {
                holds = false;
                failures.push(format!("{name}: Θ exceeds the initial entropy by {:.4e}", -s.as_f64()));
            }
            None => {
                holds = false;
                failures.push(format!("{name}: no density estimate"));
            }
            _ => {}
        }
        if c.label != TangentFlowLabel::Unknown {
            if let Some(g) = gap {
                if g.as_f64() > cfg.density_tolerance {
                    holds = false;
                    failures.push(format!("{name}: Θ differs from E[S^{}] by {:.2}%", c.j, 100.0 * g.as_f64()));
                }
            }
        }
        entries.push(ChainEntry {
            x: c.x,
            t: c.t,
            label: c.label,
            j: c.j,
            sphere_bound,
            model_entropy: model,
            theta: c.theta,
            initial_entropy,
            model_slack: model - sphere_bound,
            density_gap: gap,
            entropy_slack,
            holds,
        });
    }
    BoundReport {
        holds: failures.is_empty(),
        entries,
        failures,
    }
}
