use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mcflab::flow::{AmbientVectorField, FlowConfig};
use mcflab::functionals::OptConfig;
use mcflab::levelset::{GridConfig, LevelSetRunConfig};
use mcflab::shapes::{self, ShapeSpec};
use mcflab::singularity::{BoundCheckConfig, ClassifyConfig};
use mcflab::Surface;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    Zero,
    #[value(alias = "renormalizing")]
    #[serde(alias = "renormalizing")]
    Renorm,
}

impl FieldChoice {
    pub fn field(self) -> AmbientVectorField<f64> {
        match self {
            FieldChoice::Zero => AmbientVectorField::zero(),
            FieldChoice::Renorm => AmbientVectorField::renormalizing(),
        }
    }
}

/// `auto` or a time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HorizonChoice {
    Time(f64),
    Word(AutoWord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoWord {
    Auto,
}

impl std::str::FromStr for HorizonChoice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(HorizonChoice::Word(AutoWord::Auto));
        }
        s.parse::<f64>()
            .ok()
            .filter(|t| t.is_finite())
            .map(HorizonChoice::Time)
            .ok_or_else(|| format!("expected a finite time or `auto`, got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Levelset,
    Parametric,
}

/// One experiment. Every field has a default; a config file and then the
/// command-line flags override them in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    /// Mesh manifest (JSON) written by this tool; takes precedence over `preset`.
    pub mesh: Option<PathBuf>,
    /// Which shape of a multi-shape preset to flow.
    pub shape_index: usize,
    pub field: FieldChoice,
    pub horizon: Option<HorizonChoice>,
    /// Upper time limit of an `auto` level-set horizon.
    pub auto_max_t: f64,
    /// An `auto` run stops this fraction of the elapsed time after the first topology change.
    pub auto_after_fraction: f64,
    /// An `auto` run samples every this many steps unless `sample_interval` is set.
    pub auto_sample_steps: usize,
    /// Level-set sample interval; overrides `levelset.sample_interval`.
    pub sample_interval: Option<f64>,
    pub method: Method,
    /// Preset flowed alongside for the avoidance-distance series.
    pub against: Option<String>,
    pub plot: bool,
    pub seed: u64,
    pub out: PathBuf,
    pub opt: OptConfig,
    pub flow: FlowConfig,
    pub grid: GridConfig,
    pub levelset: LevelSetRunConfig,
    pub classify: ClassifyConfig,
    pub bound: BoundCheckConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: None,
            mesh: None,
            shape_index: 0,
            field: FieldChoice::Zero,
            horizon: None,
            auto_max_t: 1.0,
            auto_after_fraction: 0.25,
            auto_sample_steps: 5,
            sample_interval: None,
            method: Method::Levelset,
            against: None,
            plot: true,
            seed: 0,
            out: PathBuf::from("out"),
            opt: OptConfig::default(),
            flow: FlowConfig::default(),
            grid: GridConfig::default(),
            levelset: LevelSetRunConfig::default(),
            classify: ClassifyConfig::default(),
            bound: BoundCheckConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Named surfaces to work on: every shape of the preset, or the mesh.
    pub fn surfaces(&self) -> Result<Vec<(String, Option<ShapeSpec>, Surface)>> {
        if let Some(m) = &self.mesh {
            if !m.exists() {
                bail!("mesh manifest {} does not exist", m.display());
            }
            let s = mcflab::geometry::io::load::<f64>(m)?;
            let name = m.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "mesh".into());
            return Ok(vec![(name, None, s)]);
        }
        let Some(name) = &self.preset else {
            bail!(
                "no input: pass --preset or --mesh (presets: {})",
                shapes::catalog().iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", ")
            );
        };
        let p = shapes::find_preset(name)?;
        let many = p.shapes.len() > 1;
        p.shapes
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let label = if many { format!("{}[{i}]", p.name) } else { p.name.clone() };
                Ok((label, Some(spec.clone()), shapes::generate::<f64>(spec)?))
            })
            .collect()
    }

    /// The one surface a flow command evolves.
    pub fn surface(&self) -> Result<(String, Surface)> {
        let mut all = self.surfaces()?;
        if self.shape_index >= all.len() {
            bail!("shape index {} out of range (input has {} shapes)", self.shape_index, all.len());
        }
        let (name, _, s) = all.swap_remove(self.shape_index);
        Ok((name, s))
    }
}
