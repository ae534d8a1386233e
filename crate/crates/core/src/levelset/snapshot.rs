use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::{GridConfig, GridGeometry, LevelSetRegion, RegionStats, RegionStatus};
use crate::error::{Error, Result};
use crate::flow::AmbientVectorField;
use crate::scalar::Real;
use crate::vector::Vec3;

/// JSON header of a binary φ snapshot. The data file holds `dims` product
/// little-endian f64 values, x fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub dim: usize,
    pub lo: [f64; 3],
    pub h: f64,
    pub dims: [usize; 3],
    pub t: f64,
    pub status: RegionStatus,
    pub field: AmbientVectorField<f64>,
    pub config: GridConfig,
    pub stats: RegionStats,
    pub data: String,
}

const FORMAT: &str = "mcflab-levelset-f64le-v1";

/// Writes `<stem>.json` and `<stem>.bin` into `dir`; returns the header path.
pub fn write_snapshot<T: Real>(region: &LevelSetRegion<T>, dir: &Path, stem: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let g = &region.geometry;
    let data = format!("{stem}.bin");
    let header = SnapshotHeader {
        format: FORMAT.into(),
        dim: g.dim,
        lo: g.lo.cast::<f64>().to_array(),
        h: g.h.as_f64(),
        dims: g.dims,
        t: region.t.as_f64(),
        status: region.status,
        field: cast_field(&region.field),
        config: region.config.clone(),
        stats: region.stats,
        data: data.clone(),
    };
    let mut bytes = Vec::with_capacity(region.phi.len() * 8);
    for p in &region.phi {
        bytes.extend_from_slice(&p.as_f64().to_le_bytes());
    }
    fs::File::create(dir.join(&data))?.write_all(&bytes)?;
    let path = dir.join(format!("{stem}.json"));
    fs::write(&path, serde_json::to_string_pretty(&header)?)?;
    Ok(path)
}

pub fn read_snapshot<T: Real>(header_path: &Path) -> Result<LevelSetRegion<T>> {
    let header: SnapshotHeader = serde_json::from_str(&fs::read_to_string(header_path)?)?;
    if header.format != FORMAT {
        return Err(Error::Parse {
            line: 0,
            message: format!("unknown snapshot format {:?}", header.format),
        });
    }
    let dir = header_path.parent().unwrap_or_else(|| Path::new("."));
    let mut bytes = Vec::new();
    fs::File::open(dir.join(&header.data))?.read_to_end(&mut bytes)?;
    let n: usize = header.dims.iter().product();
    if bytes.len() != n * 8 {
        return Err(Error::ShapeMismatch {
            expected: n * 8,
            got: bytes.len(),
        });
    }
    let phi = bytes
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    let geometry = GridGeometry {
        dim: header.dim,
        lo: Vec3::from_slice(&header.lo).cast(),
        h: T::lit(header.h),
        dims: header.dims,
    };
    let field = AmbientVectorField {
        kind: match header.field.kind {
            crate::flow::FieldType::Zero => crate::flow::FieldType::Zero,
            crate::flow::FieldType::Renormalizing => crate::flow::FieldType::Renormalizing,
            crate::flow::FieldType::Affine { a, b } => crate::flow::FieldType::Affine { a: a.cast(), b: b.cast() },
        },
        growth_constant: T::lit(header.field.growth_constant),
    };
    let mut r = LevelSetRegion::from_values(geometry, phi, field, header.config)?;
    r.t = T::lit(header.t);
    r.status = header.status;
    r.stats = header.stats;
    Ok(r)
}

fn cast_field<T: Real>(f: &AmbientVectorField<T>) -> AmbientVectorField<f64> {
    use crate::flow::FieldType;
    AmbientVectorField {
        kind: match f.kind {
            FieldType::Zero => FieldType::Zero,
            FieldType::Renormalizing => FieldType::Renormalizing,
            FieldType::Affine { a, b } => FieldType::Affine { a: a.cast(), b: b.cast() },
        },
        growth_constant: f.growth_constant.as_f64(),
    }
}
