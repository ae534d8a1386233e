//! Test geometries with known analytic properties and the preset catalog.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DiscreteHypersurface, Elements, Orientation};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Regular `n`-gon inscribed in the circle of radius `r`, counter-clockwise.
pub fn circle<T: Real>(r: T, n: usize, center: Vec3<T>) -> Result<DiscreteHypersurface<T>> {
    if !(r > T::zero()) || n < 3 {
        return Err(Error::InvalidParameter(format!("circle needs r > 0 and n ≥ 3 (got n = {n})")));
    }
    if center.z != T::zero() {
        return Err(Error::InvalidParameter("circle center must lie in the plane".into()));
    }
    let tau = T::TAU();
    let nn = T::from_usize_lossy(n);
    let verts = (0..n)
        .map(|i| {
            let th = tau * T::from_usize_lossy(i) / nn;
            center + Vec3::planar(th.cos(), th.sin()) * r
        })
        .collect();
    let segs = (0..n).map(|i| [i, (i + 1) % n]).collect();
    DiscreteHypersurface::new(2, verts, Elements::Segments(segs), Orientation::Outward)
}

/// Polygon with radius `r (1 + amplitude cos(mode θ))`.
pub fn perturbed_circle<T: Real>(
    r: T,
    mode: u32,
    amplitude: T,
    n: usize,
    center: Vec3<T>,
) -> Result<DiscreteHypersurface<T>> {
    let base = circle(r, n, center)?;
    perturb_normal_mode(&base, mode, amplitude * r, center)
}

/// Icosahedron subdivided `level` times and projected onto the sphere.
pub fn icosphere<T: Real>(r: T, level: u32, center: Vec3<T>) -> Result<DiscreteHypersurface<T>> {
    if !(r > T::zero()) {
        return Err(Error::InvalidParameter("sphere radius must be positive".into()));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut verts: Vec<Vec3<f64>> = raw
        .iter()
        .map(|p| {
            let v = Vec3::new(p[0], p[1], p[2]);
            v / v.norm()
        })
        .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3<f64>>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let m = (verts[a] + verts[b]) * 0.5;
                verts.push(m / m.norm());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let ab = mid(f[0], f[1], &mut verts);
            let bc = mid(f[1], f[2], &mut verts);
            let ca = mid(f[2], f[0], &mut verts);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    let verts = verts
        .into_iter()
        .map(|v| center + v.cast::<T>() * r)
        .collect();
    outward(3, verts, faces)
}

/// Builds a triangle mesh and flips the winding if it encloses negative volume.
fn outward<T: Real>(dim: usize, verts: Vec<Vec3<T>>, mut faces: Vec<[usize; 3]>) -> Result<DiscreteHypersurface<T>> {
    let probe = DiscreteHypersurface::from_parts_unchecked(dim, verts.clone(), Elements::Triangles(faces.clone()), Orientation::Outward);
    if probe.signed_enclosed_measure() < T::zero() {
        for f in &mut faces {
            f.swap(1, 2);
        }
    }
    DiscreteHypersurface::new(dim, verts, Elements::Triangles(faces), Orientation::Outward)
}

/// Surface of revolution about the x-axis from a profile polyline
/// `(x, r)` running from one pole (r = 0) to the other.
fn revolve<T: Real>(profile: &[(f64, f64)], n_theta: usize, center: Vec3<T>) -> Result<DiscreteHypersurface<T>> {
    let rings = &profile[1..profile.len() - 1];
    let mut verts = Vec::with_capacity(rings.len() * n_theta + 2);
    let tau = std::f64::consts::TAU;
    for &(x, r) in rings {
        for k in 0..n_theta {
            let th = tau * k as f64 / n_theta as f64;
            verts.push(Vec3::new(x, r * th.cos(), r * th.sin()));
        }
    }
    let south = verts.len();
    verts.push(Vec3::new(profile[0].0, 0.0, 0.0));
    let north = verts.len();
    verts.push(Vec3::new(profile[profile.len() - 1].0, 0.0, 0.0));
    let mut faces = Vec::new();
    let id = |ring: usize, k: usize| ring * n_theta + (k % n_theta);
    for k in 0..n_theta {
        faces.push([south, id(0, k + 1), id(0, k)]);
    }
    for ring in 0..rings.len() - 1 {
        for k in 0..n_theta {
            faces.push([id(ring, k), id(ring, k + 1), id(ring + 1, k + 1)]);
            faces.push([id(ring, k), id(ring + 1, k + 1), id(ring + 1, k)]);
        }
    }
    let last = rings.len() - 1;
    for k in 0..n_theta {
        faces.push([north, id(last, k), id(last, k + 1)]);
    }
    let verts = verts.into_iter().map(|v| center + v.cast::<T>()).collect();
    outward(3, verts, faces)
}

/// Resamples a fine profile polyline by arclength with local spacing `ds(r)`.
fn resample_profile(fine: &[(f64, f64)], ds: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut cum = vec![0.0];
    for w in fine.windows(2) {
        let d = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
        cum.push(cum.last().unwrap() + d);
    }
    let total = *cum.last().unwrap();
    let at = |s: f64| -> (f64, f64) {
        let i = match cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => return fine[i],
            Err(i) => i.clamp(1, cum.len() - 1),
        };
        let t = (s - cum[i - 1]) / (cum[i] - cum[i - 1]);
        (
            fine[i - 1].0 + t * (fine[i].0 - fine[i - 1].0),
            fine[i - 1].1 + t * (fine[i].1 - fine[i - 1].1),
        )
    };
    // First pass: raw stations; second pass: stretch to land on the far pole.
    let mut stations = vec![0.0];
    let mut s = 0.0;
    while s < total {
        let (_, r) = at(s);
        s += ds(r);
        stations.push(s);
    }
    let scale = total / s;
    stations.iter().map(|&s| at(s * scale)).collect()
}

/// Capped cylinder of radius `r` along the z-axis, |z| ≤ `half_length`.
pub fn cylinder<T: Real>(r: T, half_length: T, n_theta: usize, center: Vec3<T>) -> Result<DiscreteHypersurface<T>> {
    if !(r > T::zero()) || !(half_length > T::zero()) || n_theta < 3 {
        return Err(Error::InvalidParameter("cylinder needs positive radius, length and n_theta ≥ 3".into()));
    }
    let (r, l) = (r.as_f64(), half_length.as_f64());
    // Profile in (axis, radius): cap disc, side, cap disc.
    let mut fine = Vec::new();
    let cap_steps = 200;
    for i in 0..=cap_steps {
        fine.push((-l, r * i as f64 / cap_steps as f64));
    }
    let side_steps = 2000;
    for i in 1..=side_steps {
        fine.push((-l + 2.0 * l * i as f64 / side_steps as f64, r));
    }
    for i in (0..cap_steps).rev() {
        fine.push((l, r * i as f64 / cap_steps as f64));
    }
    let h = std::f64::consts::TAU * r / n_theta as f64;
    let profile = resample_profile(&fine, |_| h);
    let s: DiscreteHypersurface<f64> = revolve(&profile, n_theta, Vec3::zero())?;
    // Revolved about x; rotate the axis onto z.
    let verts = s
        .vertices()
        .iter()
        .map(|v| center + Vec3::new(v.y, v.z, v.x).cast::<T>())
        .collect::<Vec<_>>();
    let Elements::Triangles(t) = s.elements().clone() else { unreachable!() };
    outward(3, verts, t)
}

/// Open square patch of side `side` in the plane z = 0, centred at the origin,
/// split into `n × n` cells of two triangles each. It has boundary, so it is
/// only meaningful for the Gaussian-area functionals.
pub fn flat_square<T: Real>(side: T, n: usize) -> Result<DiscreteHypersurface<T>> {
    if !(side > T::zero()) || n < 1 {
        return Err(Error::InvalidParameter("flat square needs a positive side and at least one cell".into()));
    }
    let step = side / T::from_usize_lossy(n);
    let half = side / T::lit(2.0);
    let mut verts = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            verts.push(Vec3::new(
                T::from_usize_lossy(i) * step - half,
                T::from_usize_lossy(j) * step - half,
                T::zero(),
            ));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Ok(DiscreteHypersurface::open_patch(3, verts, Elements::Triangles(tris)))
}

/// Torus with tube radius `minor` around a circle of radius `major` in the xy-plane.
pub fn torus<T: Real>(minor: T, major: T, n_minor: usize, n_major: usize, center: Vec3<T>) -> Result<DiscreteHypersurface<T>> {
    if !(minor > T::zero()) || !(major > minor) || n_minor < 3 || n_major < 3 {
        return Err(Error::InvalidParameter("torus needs 0 < minor < major".into()));
    }
    let (a, b) = (minor.as_f64(), major.as_f64());
    let tau = std::f64::consts::TAU;
    let mut verts = Vec::with_capacity(n_minor * n_major);
    for i in 0..n_major {
        let u = tau * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let v = tau * j as f64 / n_minor as f64;
            let rr = b + a * v.cos();
            verts.push(center + Vec3::new(rr * u.cos(), rr * u.sin(), a * v.sin()).cast::<T>());
        }
    }
    let id = |i: usize, j: usize| (i % n_major) * n_minor + (j % n_minor);
    let mut faces = Vec::with_capacity(2 * n_minor * n_major);
    for i in 0..n_major {
        for j in 0..n_minor {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    outward(3, verts, faces)
}

/// Profile of the dumbbell: two balls joined by a neck `neck · cosh(x/ℓ)`
/// that meets each sphere tangentially (C¹) at `|x| = junction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DumbbellProfile {
    pub ball_radius: f64,
    pub neck_radius: f64,
    pub separation: f64,
    /// Neck length scale ℓ.
    pub neck_scale: f64,
    /// Axial coordinate where the neck joins the spheres.
    pub junction: f64,
}

impl DumbbellProfile {
    pub fn new(ball_radius: f64, neck_radius: f64, separation: f64) -> Result<Self> {
        let (rb, r0, a) = (ball_radius, neck_radius, separation / 2.0);
        if !(rb > 0.0 && r0 > 0.0 && r0 < rb && a > rb) {
            return Err(Error::InvalidParameter("dumbbell needs 0 < neck < ball < separation/2".into()));
        }
        let sphere = |x: f64| (rb * rb - (x - a) * (x - a)).max(0.0).sqrt();
        // min over the inner half of the right ball of neck(x) − sphere(x)
        let gap = |l: f64| -> (f64, f64) {
            let n = 4000;
            let mut best = (f64::INFINITY, a);
            for i in 0..=n {
                let x = (a - rb) + rb * i as f64 / n as f64;
                let g = r0 * (x / l).cosh() - sphere(x);
                if g < best.0 {
                    best = (g, x);
                }
            }
            best
        };
        let (mut lo, mut hi) = (r0 * 1e-3, 1e3 * a);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if gap(mid).0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let l = 0.5 * (lo + hi);
        let (_, xj) = gap(l);
        Ok(Self {
            ball_radius: rb,
            neck_radius: r0,
            separation,
            neck_scale: l,
            junction: xj,
        })
    }

    pub fn radius_at(&self, x: f64) -> f64 {
        let a = self.separation / 2.0;
        let ax = x.abs();
        if ax <= self.junction {
            self.neck_radius * (ax / self.neck_scale).cosh()
        } else {
            (self.ball_radius.powi(2) - (ax - a).powi(2)).max(0.0).sqrt()
        }
    }

    pub fn half_extent(&self) -> f64 {
        self.separation / 2.0 + self.ball_radius
    }

    /// Whether `p` lies in the closed solid dumbbell (axis along x, centered at 0).
    pub fn contains(&self, p: Vec3<f64>) -> bool {
        p.x.abs() <= self.half_extent() && (p.y * p.y + p.z * p.z).sqrt() <= self.radius_at(p.x)
    }
}

pub fn dumbbell<T: Real>(
    ball_radius: T,
    neck_radius: T,
    separation: T,
    n_theta: usize,
    center: Vec3<T>,
) -> Result<DiscreteHypersurface<T>> {
    let p = DumbbellProfile::new(ball_radius.as_f64(), neck_radius.as_f64(), separation.as_f64())?;
    if n_theta < 8 {
        return Err(Error::InvalidParameter("dumbbell resolution must be at least 8".into()));
    }
    let a = p.separation / 2.0;
    let rb = p.ball_radius;
    let mut fine = Vec::new();
    // Left ball from its pole to the junction, by polar angle.
    let psi_j = ((p.junction - a) / rb).clamp(-1.0, 1.0).acos();
    let steps = 4000;
    for i in 0..=steps {
        let psi = psi_j * i as f64 / steps as f64;
        fine.push((-(a + rb * psi.cos()), rb * psi.sin()));
    }
    for i in 1..steps {
        let x = -p.junction + 2.0 * p.junction * i as f64 / steps as f64;
        fine.push((x, p.radius_at(x)));
    }
    for i in 0..=steps {
        let psi = psi_j * (steps - i) as f64 / steps as f64;
        fine.push((a + rb * psi.cos(), rb * psi.sin()));
    }
    let floor = 0.25 * rb;
    let tau = std::f64::consts::TAU;
    let profile = resample_profile(&fine, |r| tau * r.max(floor).min(rb) / n_theta as f64);
    revolve(&profile, n_theta, center)
}

/// Displaces each vertex by `amplitude · cos(mode θ) ν`, θ the azimuth about
/// `center` in the xy-plane.
pub fn perturb_normal_mode<T: Real>(
    base: &DiscreteHypersurface<T>,
    mode: u32,
    amplitude: T,
    center: Vec3<T>,
) -> Result<DiscreteHypersurface<T>> {
    let nu = base.outward_normals()?;
    let k = T::from_u32(mode).unwrap_or_else(T::zero);
    let verts = base
        .vertices()
        .iter()
        .zip(nu.iter())
        .map(|(x, n)| {
            let d = *x - center;
            let th = d.y.atan2(d.x);
            *x + *n * (amplitude * (k * th).cos())
        })
        .collect();
    let s = base.with_vertices(verts)?;
    s.validate(T::lit(crate::geometry::DEFAULT_FLOOR_FACTOR))?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    Circle {
        radius: f64,
        #[serde(default = "default_circle_vertices")]
        vertices: usize,
    },
    /// Round `sphere_dim`-sphere: a polygon for 1, an icosphere for 2.
    Sphere {
        radius: f64,
        #[serde(default = "default_sphere_dim")]
        sphere_dim: usize,
        #[serde(default = "default_refinement")]
        refinement: u32,
    },
    Cylinder {
        radius: f64,
        half_length: f64,
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
    Torus {
        minor_radius: f64,
        major_radius: f64,
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
    Dumbbell {
        ball_radius: f64,
        neck_radius: f64,
        separation: f64,
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
    Perturbed {
        base: Box<ShapeSpec>,
        mode: u32,
        amplitude: f64,
    },
}

fn default_circle_vertices() -> usize {
    512
}
fn default_sphere_dim() -> usize {
    2
}
fn default_refinement() -> u32 {
    4
}
fn default_resolution() -> usize {
    48
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub kind: ShapeKind,
    #[serde(default)]
    pub center: [f64; 3],
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind) -> Self {
        Self { kind, center: [0.0; 3] }
    }

    pub fn at(mut self, center: [f64; 3]) -> Self {
        self.center = center;
        self
    }

    pub fn circle(radius: f64, vertices: usize) -> Self {
        Self::new(ShapeKind::Circle { radius, vertices })
    }

    pub fn sphere(radius: f64, refinement: u32) -> Self {
        Self::new(ShapeKind::Sphere { radius, sphere_dim: 2, refinement })
    }

    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            ShapeKind::Circle { .. } => 2,
            ShapeKind::Sphere { sphere_dim, .. } => sphere_dim + 1,
            ShapeKind::Perturbed { base, .. } => base.ambient_dim(),
            _ => 3,
        }
    }

    /// Smallest curvature radius of the base shape.
    pub fn reach(&self) -> f64 {
        match &self.kind {
            ShapeKind::Circle { radius, .. }
            | ShapeKind::Sphere { radius, .. }
            | ShapeKind::Cylinder { radius, .. } => *radius,
            ShapeKind::Torus { minor_radius, .. } => *minor_radius,
            ShapeKind::Dumbbell { neck_radius, .. } => *neck_radius,
            ShapeKind::Perturbed { base, amplitude, .. } => base.reach() - amplitude.abs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive (got {v})")))
            }
        };
        match &self.kind {
            ShapeKind::Circle { radius, .. } => pos("radius", *radius)?,
            ShapeKind::Sphere { radius, sphere_dim, .. } => {
                pos("radius", *radius)?;
                if !(1..=2).contains(sphere_dim) {
                    return Err(Error::UnsupportedDimension(sphere_dim + 1));
                }
            }
            ShapeKind::Cylinder { radius, half_length, .. } => {
                pos("radius", *radius)?;
                pos("half_length", *half_length)?;
            }
            ShapeKind::Torus { minor_radius, major_radius, .. } => {
                pos("minor_radius", *minor_radius)?;
                pos("major_radius", *major_radius)?;
            }
            ShapeKind::Dumbbell { ball_radius, neck_radius, separation, .. } => {
                pos("ball_radius", *ball_radius)?;
                pos("neck_radius", *neck_radius)?;
                pos("separation", *separation)?;
            }
            ShapeKind::Perturbed { base, amplitude, .. } => {
                base.validate()?;
                if amplitude.abs() >= base.reach() {
                    return Err(Error::InvalidParameter(format!(
                        "perturbation amplitude {amplitude} is not below the reach {}",
                        base.reach()
                    )));
                }
            }
        }
        if self.ambient_dim() == 2 && self.center[2] != 0.0 {
            return Err(Error::InvalidParameter("planar shape with out-of-plane center".into()));
        }
        Ok(())
    }
}

/// Meshes a shape spec.
pub fn generate<T: Real>(spec: &ShapeSpec) -> Result<DiscreteHypersurface<T>> {
    spec.validate()?;
    let c = Vec3::new(T::lit(spec.center[0]), T::lit(spec.center[1]), T::lit(spec.center[2]));
    let l = T::lit;
    match &spec.kind {
        ShapeKind::Circle { radius, vertices } => circle(l(*radius), *vertices, c),
        ShapeKind::Sphere { radius, sphere_dim: 1, refinement } => circle(l(*radius), 32 << refinement, c),
        ShapeKind::Sphere { radius, refinement, .. } => icosphere(l(*radius), *refinement, c),
        ShapeKind::Cylinder { radius, half_length, resolution } => cylinder(l(*radius), l(*half_length), *resolution, c),
        ShapeKind::Torus { minor_radius, major_radius, resolution } => {
            let n_major = ((*resolution as f64) * major_radius / minor_radius).ceil() as usize;
            torus(l(*minor_radius), l(*major_radius), *resolution, n_major.max(3), c)
        }
        ShapeKind::Dumbbell { ball_radius, neck_radius, separation, resolution } => {
            dumbbell(l(*ball_radius), l(*neck_radius), l(*separation), *resolution, c)
        }
        ShapeKind::Perturbed { base, mode, amplitude } => {
            let b = generate::<T>(base)?;
            let bc = Vec3::new(T::lit(base.center[0]), T::lit(base.center[1]), T::lit(base.center[2]));
            perturb_normal_mode(&b, *mode, l(*amplitude), bc)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub shapes: Vec<ShapeSpec>,
}

fn preset(name: &str, description: &str, shapes: Vec<ShapeSpec>) -> Preset {
    Preset {
        name: name.into(),
        description: description.into(),
        shapes,
    }
}

/// Dumbbell used by the neck-pinch experiments.
pub fn dumbbell_spec() -> ShapeSpec {
    ShapeSpec::new(ShapeKind::Dumbbell {
        ball_radius: 0.5,
        neck_radius: 0.1,
        separation: 2.0,
        resolution: 48,
    })
}

/// Fixed, ordered preset list.
pub fn catalog() -> Vec<Preset> {
    let s2 = 2f64.sqrt();
    vec![
        preset("shrinker-circle", "S¹(√2), the round self-shrinking circle", vec![ShapeSpec::circle(s2, 512)]),
        preset("shrinker-sphere", "S²(2), the round self-shrinking sphere", vec![ShapeSpec::sphere(2.0, 4)]),
        preset(
            "stone-check-spheres",
            "S^k(√(2k)) for k = 1, 2",
            vec![
                ShapeSpec::new(ShapeKind::Sphere { radius: s2, sphere_dim: 1, refinement: 4 }),
                ShapeSpec::new(ShapeKind::Sphere { radius: 2.0, sphere_dim: 2, refinement: 4 }),
            ],
        ),
        preset("circle-r1", "unit circle, shrinks under the renormalized flow", vec![ShapeSpec::circle(1.0, 256)]),
        preset("circle-r2", "circle of radius 2", vec![ShapeSpec::circle(2.0, 256)]),
        preset("circle-r3-offset", "circle of radius 3 centered at (1, -2)", vec![ShapeSpec::circle(3.0, 512).at([1.0, -2.0, 0.0])]),
        preset("unit-sphere", "unit sphere in R³", vec![ShapeSpec::sphere(1.0, 4)]),
        preset(
            "perturbed-shrinker-circle",
            "S¹(√2) with a mode-3 radial ripple",
            vec![ShapeSpec::new(ShapeKind::Perturbed {
                base: Box::new(ShapeSpec::circle(s2, 256)),
                mode: 3,
                amplitude: 0.05,
            })],
        ),
        preset(
            "perturbed-sphere",
            "S²(2) with a mode-2 azimuthal ripple",
            vec![ShapeSpec::new(ShapeKind::Perturbed {
                base: Box::new(ShapeSpec::sphere(2.0, 3)),
                mode: 2,
                amplitude: 0.05,
            })],
        ),
        preset(
            "cylinder-l8",
            "capped cylinder S¹(√2) × [-8, 8]",
            vec![ShapeSpec::new(ShapeKind::Cylinder { radius: s2, half_length: 8.0, resolution: 64 })],
        ),
        preset(
            "torus",
            "geometric torus (not a shrinker)",
            vec![ShapeSpec::new(ShapeKind::Torus { minor_radius: 0.6, major_radius: 1.8, resolution: 32 })],
        ),
        preset("dumbbell", "two balls of radius 0.5 joined by a neck of radius 0.1", vec![dumbbell_spec()]),
    ]
}

pub fn find_preset(name: &str) -> Result<Preset> {
    let all = catalog();
    all.iter().find(|p| p.name == name).cloned().ok_or_else(|| Error::UnknownPreset {
        name: name.into(),
        available: all.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_presets_are_valid() {
        for p in catalog() {
            for s in &p.shapes {
                let m = generate::<f64>(s).unwrap_or_else(|e| panic!("{}: {e}", p.name));
                m.validate(1e-12).unwrap();
                assert_eq!(m.ambient_dim(), s.ambient_dim());
            }
        }
        let c = &find_preset("shrinker-circle").unwrap().shapes[0];
        assert_eq!(*c, ShapeSpec::circle(2f64.sqrt(), 512));
        let st = find_preset("stone-check-spheres").unwrap();
        assert_eq!(st.shapes.len(), 2);
        assert!(matches!(find_preset("nope"), Err(Error::UnknownPreset { .. })));
    }

    #[test]
    fn catalog_is_deterministic() {
        assert_eq!(catalog(), catalog());
    }

    #[test]
    fn dumbbell_profile_is_c1_and_mean_convex() {
        let p = DumbbellProfile::new(0.5, 0.1, 2.0).unwrap();
        assert!(p.neck_scale > p.neck_radius);
        let eps = 1e-6;
        let slope = |x: f64| (p.radius_at(x + eps) - p.radius_at(x - eps)) / (2.0 * eps);
        let j = p.junction;
        assert!((p.radius_at(j - 1e-9) - p.radius_at(j + 1e-9)).abs() < 1e-6);
        assert!((slope(j - 1e-4) - slope(j + 1e-4)).abs() < 1e-2);
        let m = dumbbell(0.5, 0.1, 2.0, 32, Vec3::<f64>::zero()).unwrap();
        assert_eq!(m.component_count(), 1);
        let (lo, hi) = m.bounding_box();
        assert!((lo.x + 1.5).abs() < 1e-9 && (hi.x - 1.5).abs() < 1e-9);
        assert!((hi.y - 0.5).abs() < 1e-2);
        for v in m.vertices() {
            let r = (v.y * v.y + v.z * v.z).sqrt();
            assert!(r <= p.radius_at(v.x) + 1e-5);
            assert!(r >= p.radius_at(v.x) * (std::f64::consts::PI / 32.0).cos() - 1e-9);
        }
        let n = 200_000;
        let dx = 3.0 / n as f64;
        let vol: f64 = (0..n)
            .map(|i| std::f64::consts::PI * p.radius_at(-1.5 + (i as f64 + 0.5) * dx).powi(2) * dx)
            .sum();
        assert!((m.enclosed_measure() - vol).abs() / vol < 2e-2, "{} vs {vol}", m.enclosed_measure());
    }

    #[test]
    fn generated_round_shapes_have_expected_curvature() {
        let c = generate::<f64>(&ShapeSpec::circle(1.5, 400)).unwrap();
        for h in c.mean_curvature_vector().iter() {
            assert!((h.norm() - 1.0 / 1.5).abs() < 1e-4);
        }
        let s = generate::<f64>(&ShapeSpec::sphere(1.0, 4)).unwrap();
        for h in s.mean_curvature_vector().iter() {
            assert!((h.norm() - 2.0).abs() < 4e-2);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate::<f64>(&ShapeSpec::new(ShapeKind::Sphere { radius: 1.0, sphere_dim: 3, refinement: 1 })).is_err());
        assert!(generate::<f64>(&ShapeSpec::circle(1.0, 64).at([0.0, 0.0, 1.0])).is_err());
        assert!(generate::<f64>(&ShapeSpec::circle(-1.0, 64)).is_err());
        let too_big = ShapeSpec::new(ShapeKind::Perturbed { base: Box::new(ShapeSpec::circle(1.0, 64)), mode: 2, amplitude: 1.5 });
        assert!(generate::<f64>(&too_big).is_err());
    }
}
