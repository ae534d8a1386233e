use std::fs;
use std::path::Path;

use anyhow::{bail, Result};
use mcflab::acceptance::{self, CriterionReport, Suite};
use mcflab::flow::{self, avoidance_distance, AvoidanceSeries, FlowStatus, FlowTrajectory};
use mcflab::functionals::{entropy, f_translate_scale, gaussian_area, shrinker_residual, stone_entropy, EntropyResult, GaussianAreaResult};
use mcflab::levelset::{self, Horizon, LevelSetTrajectory, RegionStats, RegionStatus, TopologyEvent};
use mcflab::shapes::{self, ShapeKind, ShapeSpec};
use mcflab::singularity::{
    classify_tangent_flow, density_entropy_bound_check, detect_singularities, sphere_entropy, BoundReport, SingularPoint,
    TangentFlowClassification, Track,
};
use mcflab::{Point, Surface};
use serde::Serialize;

use crate::config::{ExperimentConfig, HorizonChoice, Method};
use crate::output::{heatmap, line_plot, now_ms, write_csv, write_report};

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// The run finished but a checked property failed.
    Failed,
}

fn mean_radius(s: &Surface) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    let c = s.centroid();
    s.vertices().iter().map(|v| v.distance(c)).sum::<f64>() / s.vertex_count() as f64
}

// ---------------------------------------------------------------- shape

#[derive(Serialize)]
struct ShapeRow {
    shape: String,
    manifest: String,
    vertices: usize,
    elements: usize,
    total_measure: f64,
    enclosed_measure: f64,
}

pub fn shape(cfg: &ExperimentConfig) -> Result<Verdict> {
    let started = now_ms();
    fs::create_dir_all(&cfg.out)?;
    let mut rows = Vec::new();
    for (i, (name, _, s)) in cfg.surfaces()?.iter().enumerate() {
        let path = mcflab::geometry::io::save(s, &cfg.out, &format!("shape_{i}"))?;
        rows.push(ShapeRow {
            shape: name.clone(),
            manifest: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            vertices: s.vertex_count(),
            elements: s.element_count(),
            total_measure: s.total_measure(),
            enclosed_measure: s.enclosed_measure(),
        });
    }
    write_csv(&cfg.out.join("shapes.csv"), &rows)?;
    write_report(&cfg.out, "shape", cfg, &rows, started)?;
    Ok(Verdict::Ok)
}

// ---------------------------------------------------------------- entropy

#[derive(Serialize)]
struct EntropyEntry {
    shape: String,
    spec: Option<ShapeSpec>,
    entropy: EntropyResult<f64>,
    gaussian_area: GaussianAreaResult<f64>,
    /// E[S^k] for round k-sphere inputs.
    stone_entropy: Option<f64>,
}

#[derive(Serialize)]
struct EntropyRow {
    shape: String,
    entropy: f64,
    gaussian_area: f64,
    stone_entropy: Option<f64>,
    argmax_x: f64,
    argmax_y: f64,
    argmax_z: f64,
    argmax_scale: f64,
    converged: bool,
    scale_at_bound: bool,
    restarts_used: usize,
}

fn sphere_dim(spec: &ShapeSpec) -> Option<usize> {
    match &spec.kind {
        ShapeKind::Sphere { sphere_dim, .. } => Some(*sphere_dim),
        ShapeKind::Circle { .. } => Some(1),
        _ => None,
    }
}

pub fn entropy_cmd(cfg: &ExperimentConfig) -> Result<Verdict> {
    let started = now_ms();
    fs::create_dir_all(&cfg.out)?;
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for (i, (name, spec, s)) in cfg.surfaces()?.into_iter().enumerate() {
        let e = entropy(&s, &cfg.opt);
        let f = gaussian_area(&s);
        let stone = spec.as_ref().and_then(sphere_dim).map(|k| stone_entropy(k as i64)).transpose()?;
        rows.push(EntropyRow {
            shape: name.clone(),
            entropy: e.value,
            gaussian_area: f.value,
            stone_entropy: stone,
            argmax_x: e.argmax_center.x,
            argmax_y: e.argmax_center.y,
            argmax_z: e.argmax_center.z,
            argmax_scale: e.argmax_scale,
            converged: e.converged,
            scale_at_bound: e.scale_at_bound,
            restarts_used: e.restarts_used,
        });
        if cfg.plot {
            entropy_slice_plot(&cfg.out.join(format!("entropy_slice_{i}.svg")), &name, &s, &e)?;
        }
        println!("{name}: entropy {:.6} (F = {:.6})", e.value, f.value);
        entries.push(EntropyEntry {
            shape: name,
            spec,
            entropy: e,
            gaussian_area: f,
            stone_entropy: stone,
        });
    }
    write_csv(&cfg.out.join("entropy.csv"), &rows)?;
    write_report(&cfg.out, "entropy", cfg, &entries, started)?;
    Ok(Verdict::Ok)
}

/// F over x₀ = c* + r e₁ and log-spaced λ around the maximizer.
fn entropy_slice_plot(path: &Path, name: &str, s: &Surface, e: &EntropyResult<f64>) -> Result<()> {
    let n = 41;
    let half = s.diameter() / 2.0;
    let xs: Vec<f64> = (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = (0..n).map(|j| e.argmax_scale.ln() + (4f64).ln() * (2.0 * j as f64 / (n - 1) as f64 - 1.0)).collect();
    let mut values = vec![vec![0.0; n]; n];
    for (i, &r) in xs.iter().enumerate() {
        for (j, &l) in ys.iter().enumerate() {
            let c = e.argmax_center + Point::new(r, 0.0, 0.0);
            values[i][j] = f_translate_scale(s, c, l.exp())?.value;
        }
    }
    heatmap(path, &format!("F slice, {name}"), "x0 offset along e1", "ln scale", &xs, &ys, &values)
}

// ---------------------------------------------------------------- residual

#[derive(Serialize)]
struct ResidualRow {
    shape: String,
    sup_norm: f64,
    l2_norm: f64,
    vertices: usize,
}

#[derive(Serialize)]
struct VertexResidual {
    x: f64,
    y: f64,
    z: f64,
    residual: f64,
}

pub fn residual(cfg: &ExperimentConfig) -> Result<Verdict> {
    let started = now_ms();
    fs::create_dir_all(&cfg.out)?;
    let mut rows = Vec::new();
    for (i, (name, _, s)) in cfg.surfaces()?.into_iter().enumerate() {
        let r = shrinker_residual(&s)?;
        let per_vertex: Vec<_> = s
            .vertices()
            .iter()
            .zip(r.field.iter())
            .map(|(p, v)| VertexResidual { x: p.x, y: p.y, z: p.z, residual: v.norm() })
            .collect();
        write_csv(&cfg.out.join(format!("residual_{i}.csv")), &per_vertex)?;
        println!("{name}: sup |H + x^perp/2| = {:.3e}", r.sup_norm);
        rows.push(ResidualRow {
            shape: name,
            sup_norm: r.sup_norm,
            l2_norm: r.l2_norm,
            vertices: s.vertex_count(),
        });
    }
    write_csv(&cfg.out.join("residual.csv"), &rows)?;
    write_report(&cfg.out, "residual", cfg, &rows, started)?;
    Ok(Verdict::Ok)
}

// ---------------------------------------------------------------- flow

#[derive(Serialize)]
struct FlowSeriesRow {
    t: f64,
    gaussian_area: f64,
    quadrature_error: f64,
    mean_radius: f64,
    enclosed_measure: f64,
}

#[derive(Serialize)]
struct DistanceRow {
    t: f64,
    distance: f64,
    weighted: Option<f64>,
}

#[derive(Serialize)]
struct FlowSummary {
    shape: String,
    field: &'static str,
    status: FlowStatus,
    extinction_time: Option<f64>,
    message: Option<String>,
    samples: usize,
    steps: usize,
    remesh_events: usize,
    /// max F − min F over the samples.
    gaussian_area_range: f64,
    /// Largest rise of F between consecutive samples.
    gaussian_area_worst_increase: f64,
    avoidance: Option<AvoidanceSummary>,
}

#[derive(Serialize)]
struct AvoidanceSummary {
    against: String,
    initial_distance: f64,
    final_distance: f64,
    worst_decrease: f64,
    worst_weighted_decrease: Option<f64>,
}

fn horizon_time(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.horizon {
        Some(HorizonChoice::Time(t)) => Ok(t),
        Some(HorizonChoice::Word(_)) => bail!("`-T auto` is only available for level-set runs"),
        None => bail!("a horizon is required: pass -T <time>"),
    }
}

fn run_parametric(cfg: &ExperimentConfig, s: &Surface) -> Result<FlowTrajectory<f64>> {
    Ok(flow::run(s, &cfg.field.field(), horizon_time(cfg)?, &cfg.flow)?)
}

pub fn flow_cmd(cfg: &ExperimentConfig) -> Result<Verdict> {
    let started = now_ms();
    fs::create_dir_all(&cfg.out)?;
    let (name, s) = cfg.surface()?;
    let tr = run_parametric(cfg, &s)?;
    flow::write_trajectory(&tr, &cfg.out.join("trajectory"))?;
    let rows: Vec<FlowSeriesRow> = tr
        .samples
        .iter()
        .map(|x| {
            let f = gaussian_area(&x.surface);
            FlowSeriesRow {
                t: x.t,
                gaussian_area: f.value,
                quadrature_error: f.quadrature_error_estimate,
                mean_radius: mean_radius(&x.surface),
                enclosed_measure: x.surface.enclosed_measure(),
            }
        })
        .collect();
    write_csv(&cfg.out.join("flow.csv"), &rows)?;
    let fmax = rows.iter().map(|r| r.gaussian_area).fold(f64::NEG_INFINITY, f64::max);
    let fmin = rows.iter().map(|r| r.gaussian_area).fold(f64::INFINITY, f64::min);
    let rises: Vec<f64> = rows.iter().map(|r| -r.gaussian_area).collect();
    let mut avoidance = None;
    if let Some(other) = &cfg.against {
        let p = shapes::find_preset(other)?;
        let b = shapes::generate::<f64>(&p.shapes[0])?;
        let tb = run_parametric(cfg, &b)?;
        let series = avoidance_distance(&tr, &tb)?;
        let dist_rows: Vec<DistanceRow> = series
            .times
            .iter()
            .enumerate()
            .map(|(i, &t)| DistanceRow {
                t,
                distance: series.distances[i],
                weighted: series.weighted.as_ref().map(|w| w[i]),
            })
            .collect();
        write_csv(&cfg.out.join("distance.csv"), &dist_rows)?;
        if cfg.plot {
            let mut lines = vec![("distance", dist_rows.iter().map(|r| (r.t, r.distance)).collect::<Vec<_>>())];
            if series.weighted.is_some() {
                lines.push(("e^(-t/2) distance", dist_rows.iter().filter_map(|r| r.weighted.map(|w| (r.t, w))).collect()));
            }
            line_plot(&cfg.out.join("distance_vs_t.svg"), &format!("distance to {other}"), "t", "distance", &lines)?;
        }
        avoidance = Some(AvoidanceSummary {
            against: other.clone(),
            initial_distance: series.distances.first().copied().unwrap_or(f64::NAN),
            final_distance: series.distances.last().copied().unwrap_or(f64::NAN),
            worst_decrease: AvoidanceSeries::worst_decrease(&series.distances),
            worst_weighted_decrease: series.weighted.as_deref().map(AvoidanceSeries::worst_decrease),
        });
    }
    if cfg.plot {
        let f: Vec<_> = rows.iter().map(|r| (r.t, r.gaussian_area)).collect();
        line_plot(&cfg.out.join("f_vs_t.svg"), &format!("Gaussian area, {name}"), "t", "F", &[("F", f)])?;
        let r: Vec<_> = rows.iter().map(|r| (r.t, r.mean_radius)).collect();
        line_plot(&cfg.out.join("radius_vs_t.svg"), &format!("mean radius, {name}"), "t", "radius", &[("radius", r)])?;
    }
    let summary = FlowSummary {
        shape: name,
        field: tr.vectorfield.kind_name(),
        status: tr.status,
        extinction_time: tr.extinction_time,
        message: tr.message.clone(),
        samples: tr.samples.len(),
        steps: tr.diagnostics.len(),
        remesh_events: tr.remesh_events.len(),
        gaussian_area_range: fmax - fmin,
        gaussian_area_worst_increase: AvoidanceSeries::worst_decrease(&rises),
        avoidance,
    };
    println!(
        "{}: {:?} after {} steps, F range {:.3e}",
        summary.shape, summary.status, summary.steps, summary.gaussian_area_range
    );
    write_report(&cfg.out, "flow", cfg, &summary, started)?;
    Ok(Verdict::Ok)
}

// ---------------------------------------------------------------- singularities

#[derive(Serialize)]
struct SingularityAnalysis {
    candidates: Vec<SingularPoint<f64>>,
    classifications: Vec<TangentFlowClassification<f64>>,
    /// Candidates that could not be classified, with the reason.
    unclassified: Vec<(Point, f64, String)>,
    initial_entropy: Option<EntropyResult<f64>>,
    chain: Option<BoundReport<f64>>,
    first_singular_time: Option<f64>,
}

fn analyse(cfg: &ExperimentConfig, track: &Track<'_, f64>, initial: &Surface) -> SingularityAnalysis {
    let candidates = detect_singularities(track);
    let mut classifications = Vec::new();
    let mut unclassified = Vec::new();
    for p in &candidates {
        match classify_tangent_flow(track, p.x, p.t, &cfg.classify) {
            Ok(c) => classifications.push(c),
            Err(e) => unclassified.push((p.x, p.t, e.to_string())),
        }
    }
    let (initial_entropy, chain) = if classifications.is_empty() {
        (None, None)
    } else {
        let e = entropy(initial, &cfg.opt);
        let chain = density_entropy_bound_check(&classifications, e.value, &cfg.bound);
        (Some(e), Some(chain))
    };
    SingularityAnalysis {
        first_singular_time: candidates.iter().map(|c| c.t).reduce(f64::min),
        candidates,
        classifications,
        unclassified,
        initial_entropy,
        chain,
    }
}

fn print_analysis(a: &SingularityAnalysis) {
    if a.candidates.is_empty() {
        println!("no singular points detected");
    }
    for c in &a.classifications {
        println!(
            "singular point x = ({:.4}, {:.4}, {:.4}), t* = {:.5}: {:?}, j = {}, residual {:.3}, Theta = {}",
            c.x.x,
            c.x.y,
            c.x.z,
            c.t,
            c.label,
            c.j,
            c.fit_residual,
            c.theta.map(|t| format!("{t:.5}")).unwrap_or_else(|| "n/a".into())
        );
    }
    if let (Some(e), Some(ch)) = (&a.initial_entropy, &a.chain) {
        println!("entropy(initial) = {:.6}; chain {}", e.value, if ch.holds { "holds" } else { "FAILS" });
        for f in &ch.failures {
            println!("  {f}");
        }
    }
}

fn density_plots(dir: &Path, a: &SingularityAnalysis) -> Result<()> {
    for (i, c) in a.classifications.iter().enumerate() {
        let Some(d) = &c.density else { continue };
        let pts: Vec<_> = d.samples.iter().map(|(t, v)| (c.t - t, *v)).collect();
        if pts.is_empty() {
            continue;
        }
        let model = sphere_entropy(c.j);
        let tau: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let flat = vec![(tau.iter().cloned().fold(f64::INFINITY, f64::min), model), (tau.iter().cloned().fold(0.0, f64::max), model)];
        let mut lines = vec![("Huisken integral", pts), ("model entropy", flat)];
        if let Some(e) = &a.initial_entropy {
            lines.push(("entropy(initial)", lines[1].1.iter().map(|p| (p.0, e.value)).collect()));
        }
        line_plot(&dir.join(format!("density_{i}.svg")), &format!("density chain at t* = {:.5}", c.t), "t* - t", "value", &lines)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LevelSetRow {
    t: f64,
    volume: f64,
    components: usize,
    max_curvature: f64,
}

#[derive(Serialize)]
struct LevelSetSummary {
    shape: String,
    field: &'static str,
    grid_dims: [usize; 3],
    h: f64,
    dt: f64,
    status: RegionStatus,
    extinction_time: Option<f64>,
    final_time: f64,
    stats: RegionStats,
    topology_events: Vec<TopologyEvent<f64>>,
    samples: usize,
    singularities: SingularityAnalysis,
}

fn run_levelset(cfg: &ExperimentConfig, s: &Surface) -> Result<LevelSetTrajectory<f64>> {
    let region = levelset::from_surface(s, &cfg.grid, &cfg.field.field())?;
    let mut run_cfg = cfg.levelset.clone();
    let horizon = match cfg.horizon {
        Some(HorizonChoice::Time(t)) => Horizon::Until { t },
        _ => {
            run_cfg.sample_interval = cfg.auto_sample_steps.max(1) as f64 * run_cfg.cfl * levelset::stable_dt(&region);
            Horizon::Auto {
                max_t: cfg.auto_max_t,
                after_fraction: cfg.auto_after_fraction,
            }
        }
    };
    if let Some(i) = cfg.sample_interval {
        run_cfg.sample_interval = i;
    }
    Ok(levelset::run(&region, horizon, &run_cfg)?)
}

pub fn levelset_cmd(cfg: &ExperimentConfig, command: &str) -> Result<Verdict> {
    let started = now_ms();
    fs::create_dir_all(&cfg.out)?;
    let (name, s) = cfg.surface()?;
    let tr = run_levelset(cfg, &s)?;
    let rows: Vec<LevelSetRow> = tr
        .records
        .iter()
        .map(|r| LevelSetRow { t: r.t, volume: r.volume, components: r.components, max_curvature: r.max_curvature })
        .collect();
    write_csv(&cfg.out.join("levelset.csv"), &rows)?;
    let bdir = cfg.out.join("boundaries");
    for (i, (_, b)) in tr.boundaries().enumerate() {
        if !b.is_empty() {
            mcflab::geometry::io::save(b, &bdir, &format!("boundary_{i:04}"))?;
        }
    }
    levelset::write_snapshot(&tr.final_region, &cfg.out, "final_phi")?;
    let track = Track::level_set(&tr)?;
    let analysis = analyse(cfg, &track, &s);
    if cfg.plot {
        let v: Vec<_> = rows.iter().map(|r| (r.t, r.volume)).collect();
        line_plot(&cfg.out.join("volume_vs_t.svg"), &format!("enclosed volume, {name}"), "t", "volume", &[("volume", v)])?;
        let k: Vec<_> = rows.iter().map(|r| (r.t, r.max_curvature)).collect();
        line_plot(&cfg.out.join("curvature_vs_t.svg"), &format!("max front curvature, {name}"), "t", "curvature", &[("max |H|", k)])?;
        density_plots(&cfg.out, &analysis)?;
    }
    let g = &tr.final_region.geometry;
    let summary = LevelSetSummary {
        shape: name,
        field: tr.final_region.field.kind_name(),
        grid_dims: g.dims,
        h: g.h,
        dt: tr.dt,
        status: tr.status,
        extinction_time: tr.extinction_time,
        final_time: tr.final_region.t,
        stats: tr.final_region.stats,
        topology_events: tr.topology_events.clone(),
        samples: tr.samples.len(),
        singularities: analysis,
    };
    println!(
        "{}: grid {:?}, {:?} at t = {:.5}, {} topology events",
        summary.shape,
        summary.grid_dims,
        summary.status,
        summary.final_time,
        summary.topology_events.len()
    );
    print_analysis(&summary.singularities);
    let ok = summary.singularities.chain.as_ref().is_none_or(|c| c.holds);
    write_report(&cfg.out, command, cfg, &summary, started)?;
    Ok(if ok { Verdict::Ok } else { Verdict::Failed })
}

#[derive(Serialize)]
struct ParametricSingularitySummary {
    shape: String,
    field: &'static str,
    status: FlowStatus,
    extinction_time: Option<f64>,
    samples: usize,
    singularities: SingularityAnalysis,
}

pub fn singularity_cmd(cfg: &ExperimentConfig) -> Result<Verdict> {
    if cfg.method == Method::Levelset {
        return levelset_cmd(cfg, "singularity");
    }
    let started = now_ms();
    fs::create_dir_all(&cfg.out)?;
    let (name, s) = cfg.surface()?;
    let tr = run_parametric(cfg, &s)?;
    let track = Track::parametric(&tr)?;
    let analysis = analyse(cfg, &track, &s);
    if cfg.plot {
        density_plots(&cfg.out, &analysis)?;
    }
    print_analysis(&analysis);
    let ok = analysis.chain.as_ref().is_none_or(|c| c.holds);
    let summary = ParametricSingularitySummary {
        shape: name,
        field: tr.vectorfield.kind_name(),
        status: tr.status,
        extinction_time: tr.extinction_time,
        samples: tr.samples.len(),
        singularities: analysis,
    };
    write_report(&cfg.out, "singularity", cfg, &summary, started)?;
    Ok(if ok { Verdict::Ok } else { Verdict::Failed })
}

// ---------------------------------------------------------------- reproduce

#[derive(Serialize)]
struct ReproduceReport<'a> {
    suite: Suite,
    passed: bool,
    criteria: &'a [CriterionReport],
}

#[derive(Serialize)]
struct ReproduceRow<'a> {
    id: u8,
    title: &'a str,
    passed: bool,
    failed_measurements: usize,
    runtime_seconds: f64,
    budget_seconds: f64,
}

pub fn reproduce(cfg: &ExperimentConfig, suite: Suite) -> Result<Verdict> {
    let started = now_ms();
    fs::create_dir_all(&cfg.out)?;
    let criteria = acceptance::run_suite(suite, |r| {
        println!("{}", r.summary_line());
        for m in r.failed_measurements() {
            println!("    {m}");
        }
        if let Some(e) = &r.error {
            println!("    error: {e}");
        }
    });
    let passed = criteria.iter().all(|c| c.passed);
    let rows: Vec<_> = criteria
        .iter()
        .map(|c| ReproduceRow {
            id: c.id,
            title: &c.title,
            passed: c.passed,
            failed_measurements: c.failed_measurements().count(),
            runtime_seconds: c.timing.runtime_seconds,
            budget_seconds: c.timing.budget_seconds,
        })
        .collect();
    write_csv(&cfg.out.join("reproduce.csv"), &rows)?;
    write_report(&cfg.out, "reproduce", cfg, &ReproduceReport { suite, passed, criteria: &criteria }, started)?;
    println!("{} of {} criteria passed", criteria.iter().filter(|c| c.passed).count(), criteria.len());
    Ok(if passed { Verdict::Ok } else { Verdict::Failed })
}

// ---------------------------------------------------------------- presets

pub fn presets() -> Result<Verdict> {
    for p in shapes::catalog() {
        println!("{:<28} {}", p.name, p.description);
    }
    Ok(Verdict::Ok)
}
