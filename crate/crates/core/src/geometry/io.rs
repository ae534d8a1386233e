//! Plain-text mesh format with a JSON manifest.
//!
//! Mesh body (OBJ-style, 1-based indices):
//! ```text
//! v x y [z]
//! l i j        # segment, ambient dimension 2
//! f i j k      # triangle, ambient dimension 3
//! ```
//! Manifest: `{"ambient_dim": 2|3, "orientation": "outward"|"inward", "mesh": "<file>"}`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::surface::{DiscreteHypersurface, Elements, Orientation};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshManifest {
    pub ambient_dim: usize,
    pub orientation: Orientation,
    pub mesh: String,
    #[serde(default)]
    pub vertex_count: usize,
    #[serde(default)]
    pub element_count: usize,
}

pub fn write_mesh_text<T: Real, W: Write>(s: &DiscreteHypersurface<T>, mut w: W) -> Result<()> {
    for v in s.vertices() {
        if s.ambient_dim() == 2 {
            writeln!(w, "v {:.17e} {:.17e}", v.x.as_f64(), v.y.as_f64())?;
        } else {
            writeln!(w, "v {:.17e} {:.17e} {:.17e}", v.x.as_f64(), v.y.as_f64(), v.z.as_f64())?;
        }
    }
    match s.elements() {
        Elements::Segments(segs) => {
            for e in segs {
                writeln!(w, "l {} {}", e[0] + 1, e[1] + 1)?;
            }
        }
        Elements::Triangles(tris) => {
            for t in tris {
                writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
            }
        }
    }
    Ok(())
}

pub fn read_mesh_text<T: Real, R: BufRead>(
    r: R,
    ambient_dim: usize,
    orientation: Orientation,
) -> Result<DiscreteHypersurface<T>> {
    if ambient_dim != 2 && ambient_dim != 3 {
        return Err(Error::UnsupportedDimension(ambient_dim));
    }
    let mut verts = Vec::new();
    let mut segs = Vec::new();
    let mut tris = Vec::new();
    for (ln, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let tag = it.next().unwrap_or("");
        let parse_err = |m: String| Error::Parse { line: ln + 1, message: m };
        match tag {
            "v" => {
                let c: Vec<f64> = it
                    .map(|t| t.parse::<f64>().map_err(|e| parse_err(e.to_string())))
                    .collect::<Result<_>>()?;
                if c.len() < ambient_dim {
                    return Err(parse_err(format!("vertex needs {ambient_dim} coordinates")));
                }
                let z = if ambient_dim == 3 { c[2] } else { 0.0 };
                verts.push(Vec3::new(T::lit(c[0]), T::lit(c[1]), T::lit(z)));
            }
            "l" | "f" => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        // Accept OBJ "i/j/k" corner syntax; only the position index matters.
                        let head = t.split('/').next().unwrap_or("");
                        head.parse::<usize>()
                            .map_err(|e| parse_err(e.to_string()))
                            .and_then(|i| i.checked_sub(1).ok_or_else(|| parse_err("indices are 1-based".into())))
                    })
                    .collect::<Result<_>>()?;
                match (tag, idx.len()) {
                    ("l", 2) => segs.push([idx[0], idx[1]]),
                    ("f", 3) => tris.push([idx[0], idx[1], idx[2]]),
                    _ => return Err(parse_err(format!("bad element arity {}", idx.len()))),
                }
            }
            _ => {}
        }
    }
    let elements = if ambient_dim == 2 {
        if !tris.is_empty() {
            return Err(Error::Parse { line: 0, message: "triangles in a planar mesh".into() });
        }
        Elements::Segments(segs)
    } else {
        if !segs.is_empty() {
            return Err(Error::Parse { line: 0, message: "segments in a spatial mesh".into() });
        }
        Elements::Triangles(tris)
    };
    DiscreteHypersurface::new(ambient_dim, verts, elements, orientation)
}

/// Writes `<stem>.mesh` and `<stem>.json` into `dir`; returns the manifest path.
pub fn save<T: Real>(s: &DiscreteHypersurface<T>, dir: &Path, stem: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mesh_name = format!("{stem}.mesh");
    let mut f = std::io::BufWriter::new(fs::File::create(dir.join(&mesh_name))?);
    write_mesh_text(s, &mut f)?;
    f.flush()?;
    let manifest = MeshManifest {
        ambient_dim: s.ambient_dim(),
        orientation: s.orientation(),
        mesh: mesh_name,
        vertex_count: s.vertex_count(),
        element_count: s.element_count(),
    };
    let path = dir.join(format!("{stem}.json"));
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

/// Loads a surface from its manifest path.
pub fn load<T: Real>(manifest_path: &Path) -> Result<DiscreteHypersurface<T>> {
    let manifest: MeshManifest = serde_json::from_str(&fs::read_to_string(manifest_path)?)?;
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let f = BufReader::new(fs::File::open(dir.join(&manifest.mesh))?);
    read_mesh_text(f, manifest.ambient_dim, manifest.orientation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn save_and_load_sphere() {
        let dir = tempfile::tempdir().unwrap();
        let s = shapes::icosphere(2.0, 2, Vec3::new(0.5, 0.0, -1.0)).unwrap().reversed();
        let m = save(&s, dir.path(), "sphere").unwrap();
        let back: DiscreteHypersurface<f64> = load(&m).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parse_errors_report_lines() {
        let text = "v 0 0\nv 1 0\nv 0 1\nl 1 2\nl 2 x\n";
        let e = read_mesh_text::<f64, _>(text.as_bytes(), 2, Orientation::Outward);
        assert!(matches!(e, Err(Error::Parse { line: 5, .. })));
    }
}
