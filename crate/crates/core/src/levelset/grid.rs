use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::AmbientVectorField;
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Node spacing.
    pub h: f64,
    /// Explicit box (lo, hi); by default the surface's bounding box padded by `margin_cells`.
    pub bounds: Option<([f64; 3], [f64; 3])>,
    pub margin_cells: f64,
    /// Reinitialize to signed distance every this many steps.
    pub reinit_every: usize,
    /// Half-width of the updated band, in cells.
    pub band_cells: f64,
    /// Runs halt once the region comes within this many cells of the box.
    pub boundary_cells: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            h: 1.0 / 32.0,
            bounds: None,
            margin_cells: 8.0,
            reinit_every: 20,
            band_cells: 6.0,
            boundary_cells: 3.0,
        }
    }
}

/// Node lattice `lo + (i, j, k) h`; `dims[2] == 1` in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GridGeometry<T> {
    pub dim: usize,
    pub lo: Vec3<T>,
    pub h: T,
    pub dims: [usize; 3],
}

impl<T: Real> GridGeometry<T> {
    pub fn new(dim: usize, lo: Vec3<T>, hi: Vec3<T>, h: T) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(h > T::zero()) {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        let mut dims = [1usize; 3];
        for k in 0..dim {
            if !(hi[k] > lo[k]) {
                return Err(Error::InvalidParameter("empty grid box".into()));
            }
            dims[k] = ((hi[k] - lo[k]) / h).ceil().to_usize().unwrap_or(0) + 1;
        }
        let mut lo = lo;
        if dim == 2 {
            lo.z = T::zero();
        }
        Ok(Self { dim, lo, h, dims })
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let r = idx / self.dims[0];
        [i, r % self.dims[1], r / self.dims[1]]
    }

    #[inline]
    pub fn position(&self, idx: usize) -> Vec3<T> {
        let c = self.coords(idx);
        self.lo + Vec3::new(T::from_usize_lossy(c[0]), T::from_usize_lossy(c[1]), T::from_usize_lossy(c[2])) * self.h
    }

    pub fn hi(&self) -> Vec3<T> {
        let mut hi = self.lo;
        for k in 0..self.dim {
            hi[k] += T::from_usize_lossy(self.dims[k] - 1) * self.h;
        }
        hi
    }

    /// Axis-aligned neighbours (2·dim of them, fewer on the box boundary).
    #[inline]
    pub fn neighbors(&self, idx: usize, mut f: impl FnMut(usize, usize)) {
        let c = self.coords(idx);
        let mut stride = 1;
        for a in 0..self.dim {
            if c[a] > 0 {
                f(idx - stride, a);
            }
            if c[a] + 1 < self.dims[a] {
                f(idx + stride, a);
            }
            stride *= self.dims[a];
        }
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.dims[0],
            _ => self.dims[0] * self.dims[1],
        }
    }

    /// Distance in cells from the nearest box face.
    #[inline]
    pub fn cells_from_boundary(&self, idx: usize) -> usize {
        let c = self.coords(idx);
        (0..self.dim).map(|a| c[a].min(self.dims[a] - 1 - c[a])).min().unwrap_or(0)
    }

    pub fn same_as(&self, o: &Self) -> bool {
        self.dim == o.dim && self.dims == o.dims && self.h == o.h && self.lo == o.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionStatus {
    Active,
    /// The region came within the boundary margin; the run halted.
    DomainExhausted,
    Extinct,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionStats {
    pub steps: usize,
    pub reinitializations: usize,
    /// Cells skipped because |∇φ| fell below 1e-6, summed over steps.
    pub singular_cells: usize,
    /// Range of |∇φ| on the band after the latest reinitialization.
    pub gradient_range: (f64, f64),
    /// Whether every reinitialization kept |∇φ| within [0.5, 2] on the band.
    pub gradient_ok: bool,
}

/// Closed region K = {φ ≤ 0} with φ approximately signed distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LevelSetRegion<T> {
    pub geometry: GridGeometry<T>,
    pub phi: Vec<T>,
    pub t: T,
    pub field: AmbientVectorField<T>,
    pub config: GridConfig,
    pub status: RegionStatus,
    pub stats: RegionStats,
    pub(crate) steps_since_reinit: usize,
}

impl<T: Real> LevelSetRegion<T> {
    /// Region from explicit values sampled at the grid nodes.
    pub fn from_values(geometry: GridGeometry<T>, phi: Vec<T>, field: AmbientVectorField<T>, config: GridConfig) -> Result<Self> {
        if phi.len() != geometry.len() {
            return Err(Error::ShapeMismatch {
                expected: geometry.len(),
                got: phi.len(),
            });
        }
        Ok(Self {
            geometry,
            phi,
            t: T::zero(),
            field,
            config,
            status: RegionStatus::Active,
            stats: RegionStats {
                gradient_ok: true,
                gradient_range: (1.0, 1.0),
                ..RegionStats::default()
            },
            steps_since_reinit: 0,
        })
    }

    /// Region {f ≤ 0} for an implicit function, reinitialized to signed distance.
    pub fn from_implicit(
        geometry: GridGeometry<T>,
        f: impl Fn(Vec3<T>) -> T + Sync,
        field: AmbientVectorField<T>,
        config: GridConfig,
    ) -> Result<Self> {
        use rayon::prelude::*;
        let phi = (0..geometry.len()).into_par_iter().map(|i| f(geometry.position(i))).collect();
        let mut r = Self::from_values(geometry, phi, field, config)?;
        super::fmm::reinitialize(&mut r);
        Ok(r)
    }

    pub fn h(&self) -> T {
        self.geometry.h
    }

    pub fn band(&self) -> T {
        T::lit(self.config.band_cells) * self.geometry.h
    }

    pub fn is_empty(&self) -> bool {
        self.phi.iter().all(|&p| p > T::zero())
    }
}
