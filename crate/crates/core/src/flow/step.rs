use serde::{Deserialize, Serialize};

use super::field::AmbientVectorField;
use crate::error::{Error, Result};
use crate::geometry::{DiscreteHypersurface, VectorField};
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Forward Euler with the normal component of H.
    Explicit,
    /// Linear Laplacian implicit, X^⊥ explicit.
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepConfig {
    pub scheme: Scheme,
    /// Explicit steps require dt ≤ explicit_cap · (min edge)².
    pub explicit_cap: f64,
    pub cg_tolerance: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::SemiImplicit,
            explicit_cap: 0.2,
            cg_tolerance: 1e-13,
        }
    }
}

/// Explicit stability cap for this surface.
pub fn explicit_dt_cap<T: Real>(s: &DiscreteHypersurface<T>, cfg: &StepConfig) -> T {
    let h = s.edge_length_stats().min;
    T::lit(cfg.explicit_cap) * h * h
}

/// X^⊥ at every vertex.
pub(crate) fn normal_field<T: Real>(nu: &VectorField<T>, s: &DiscreteHypersurface<T>, field: &AmbientVectorField<T>) -> Vec<Vec3<T>> {
    s.vertices()
        .iter()
        .zip(nu.iter())
        .map(|(x, n)| *n * n.dot(field.eval(*x)))
        .collect()
}

/// Normal velocity H + X^⊥ (H projected onto the normal line).
pub(crate) fn normal_velocity<T: Real>(s: &DiscreteHypersurface<T>, field: &AmbientVectorField<T>) -> Result<Vec<Vec3<T>>> {
    let nu = s.outward_normals()?;
    let h = s.mean_curvature_vector();
    let xp = normal_field(&nu, s, field);
    Ok(h.iter()
        .zip(nu.iter())
        .zip(xp)
        .map(|((hv, n), xv)| *n * n.dot(*hv) + xv)
        .collect())
}

/// One time step of X-mean-curvature flow.
pub fn step<T: Real>(
    s: &DiscreteHypersurface<T>,
    field: &AmbientVectorField<T>,
    dt: T,
    cfg: &StepConfig,
) -> Result<DiscreteHypersurface<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step must be positive (got {dt})")));
    }
    match cfg.scheme {
        Scheme::Explicit => {
            let cap = explicit_dt_cap(s, cfg);
            if dt > cap {
                return Err(Error::StabilityCap {
                    dt: dt.as_f64(),
                    cap: cap.as_f64(),
                });
            }
            let v = normal_velocity(s, field)?;
            let verts = s.vertices().iter().zip(v).map(|(x, vel)| *x + vel * dt).collect();
            Ok(s.with_vertices_unchecked(verts))
        }
        Scheme::SemiImplicit => semi_implicit(s, field, dt, cfg),
    }
}

/// Solves (M − dt L) x' = M (x + dt X^⊥) coordinate-wise by Jacobi-preconditioned CG.
fn semi_implicit<T: Real>(
    s: &DiscreteHypersurface<T>,
    field: &AmbientVectorField<T>,
    dt: T,
    cfg: &StepConfig,
) -> Result<DiscreteHypersurface<T>> {
    let nu = s.outward_normals()?;
    let xp = normal_field(&nu, s, field);
    let mass = s.curvature_mass();
    let w = s.laplacian_weights();
    let n = s.vertex_count();
    let diag: Vec<T> = (0..n)
        .map(|i| mass[i] + dt * w[i].iter().map(|p| p.1).sum::<T>())
        .collect();
    let apply = |x: &[T], out: &mut [T]| {
        for i in 0..n {
            let mut acc = diag[i] * x[i];
            for &(j, wij) in &w[i] {
                acc -= dt * wij * x[j];
            }
            out[i] = acc;
        }
    };
    let v = s.vertices();
    let mut verts = v.to_vec();
    for k in 0..s.ambient_dim() {
        let b: Vec<T> = (0..n).map(|i| mass[i] * (v[i][k] + dt * xp[i][k])).collect();
        let x0: Vec<T> = (0..n).map(|i| v[i][k]).collect();
        let x = conjugate_gradient(&apply, &diag, &b, x0, T::lit(cfg.cg_tolerance), 4 * n + 100);
        for i in 0..n {
            verts[i][k] = x[i];
        }
    }
    Ok(s.with_vertices_unchecked(verts))
}

fn conjugate_gradient<T: Real>(
    apply: &impl Fn(&[T], &mut [T]),
    diag: &[T],
    b: &[T],
    mut x: Vec<T>,
    tol: T,
    max_iter: usize,
) -> Vec<T> {
    let n = b.len();
    let dot = |a: &[T], c: &[T]| a.iter().zip(c).map(|(p, q)| *p * *q).sum::<T>();
    let mut r = vec![T::zero(); n];
    apply(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = dot(b, b).sqrt().max(T::min_positive_value());
    let mut z: Vec<T> = r.iter().zip(diag).map(|(ri, d)| *ri / *d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= tol * bnorm {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Elements;
    use crate::shapes;

    #[test]
    fn shrinker_circle_is_stationary() {
        let c = shapes::circle(2f64.sqrt(), 256, Vec3::<f64>::zero()).unwrap();
        let f = AmbientVectorField::renormalizing();
        for scheme in [Scheme::Explicit, Scheme::SemiImplicit] {
            let cfg = StepConfig { scheme, ..StepConfig::default() };
            let dt = 1e-4;
            let next = step(&c, &f, dt, &cfg).unwrap();
            for (a, b) in c.vertices().iter().zip(next.vertices()) {
                assert!((*a - *b).norm() <= 1e-3 * dt);
            }
        }
    }

    #[test]
    fn circle_radius_decreases_at_unit_over_r() {
        let c = shapes::circle(2.0, 256, Vec3::<f64>::zero()).unwrap();
        for scheme in [Scheme::Explicit, Scheme::SemiImplicit] {
            let cfg = StepConfig { scheme, ..StepConfig::default() };
            let dt = if scheme == Scheme::Explicit { explicit_dt_cap(&c, &cfg) } else { 1e-3 };
            let next = step(&c, &AmbientVectorField::zero(), dt, &cfg).unwrap();
            let r = next.vertices()[0].norm();
            assert!(((2.0 - r) - dt * 0.5).abs() < 0.05 * dt * 0.5);
        }
    }

    #[test]
    fn explicit_cap_is_enforced() {
        let c = shapes::circle(1.0, 128, Vec3::<f64>::zero()).unwrap();
        let cfg = StepConfig { scheme: Scheme::Explicit, ..StepConfig::default() };
        let cap = explicit_dt_cap(&c, &cfg);
        assert!(matches!(step(&c, &AmbientVectorField::zero(), cap * 1.01, &cfg), Err(Error::StabilityCap { .. })));
        assert!(step(&c, &AmbientVectorField::zero(), -1.0, &cfg).is_err());
    }

    #[test]
    fn flat_patch_does_not_move() {
        let mut verts = Vec::new();
        let n = 6;
        for j in 0..n {
            for i in 0..n {
                verts.push(Vec3::new(i as f64 * 0.2, j as f64 * 0.2, 0.0));
            }
        }
        let mut tris = Vec::new();
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let a = j * n + i;
                tris.push([a, a + 1, a + n + 1]);
                tris.push([a, a + n + 1, a + n]);
            }
        }
        let p = DiscreteHypersurface::open_patch(3, verts, Elements::Triangles(tris));
        let cfg = StepConfig { scheme: Scheme::Explicit, ..StepConfig::default() };
        let next = step(&p, &AmbientVectorField::zero(), 1e-3, &cfg).unwrap();
        for (a, b) in p.vertices().iter().zip(next.vertices()) {
            assert!((*a - *b).norm() < 1e-12);
        }
    }
}
