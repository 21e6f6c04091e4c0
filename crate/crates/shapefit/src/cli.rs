//! The `shapefit` command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use shapefit_core::metrics::{evaluate_with, HausdorffMode};
use shapefit_core::synth::{grid_around, sample_target_params, TargetSampling};
use shapefit_core::{
    fit_with, make_target, make_templates, marching_cubes, topology_report, voxelize, FitError, GridSpec,
    MetricsError, ShapeModel, ShapeModelError, SwarmConfig, SynthConfig, TriMesh,
};

use crate::error::Error;
use crate::json::{read_json, write_json};
use crate::manifest::RunManifest;
use crate::metaimage::{read_mhd, write_mhd};
use crate::model_io::{read_model, write_model};
use crate::parallel::RayonEvaluator;
use crate::ply::{read_ply, write_ply};
use crate::report::{BatchReport, CaseReport};

#[derive(Debug, Parser)]
#[command(name = "shapefit", version, about = "Statistical shape models fitted to binary segmentations")]
pub struct Cli {
    /// Worker threads for parallel stages; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// More log output; repeat for debug detail.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a PCA shape model from corresponded template meshes.
    BuildModel(BuildModelArgs),
    /// Fit a shape model to a binary mask.
    Fit(FitArgs),
    /// Extract a marching-cubes surface from a mask.
    Mesh(MeshArgs),
    /// Rasterise a closed mesh onto a grid.
    Voxelize(VoxelizeArgs),
    /// Score surfaces against reference masks (DSC, Hausdorff, GL).
    Evaluate(EvaluateArgs),
    /// Generate synthetic templates and ground-truth targets.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct BuildModelArgs {
    /// Template PLY files, or a single directory of them.
    #[arg(required = true)]
    pub templates: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.98)]
    pub variance_fraction: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Model JSON written by build-model.
    #[arg(long)]
    pub model: PathBuf,
    /// Target mask (.mhd).
    #[arg(long)]
    pub target: PathBuf,
    /// Swarm config JSON; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Random seed for the swarm.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub swarm_size: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    /// Mask (.mhd).
    pub mask: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VoxelizeArgs {
    /// Closed PLY mesh.
    pub mesh: PathBuf,
    /// Grid as `NX,NY,NZ/SX,SY,SZ/OX,OY,OZ`.
    #[arg(long, value_parser = parse_grid, conflicts_with = "reference")]
    pub grid: Option<GridSpec>,
    /// Use the grid of this mask.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Without --grid or --reference: voxel size of a grid fitted around the mesh.
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    /// Without --grid or --reference: margin around the mesh, mm.
    #[arg(long, default_value_t = 3.0)]
    pub margin: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Surface PLY.
    #[arg(required_unless_present = "batch", requires = "reference")]
    pub surface: Option<PathBuf>,
    /// Reference mask (.mhd).
    pub reference: Option<PathBuf>,
    /// Directory of `<case>.ply` surfaces with matching `<case>.mhd` masks.
    #[arg(long, conflicts_with_all = ["surface", "reference"])]
    pub batch: Option<PathBuf>,
    /// Grid to voxelize on; must equal the reference grid. Defaults to it.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
    /// Report this percentile of boundary distances instead of the maximum.
    #[arg(long)]
    pub percentile: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Synthesis config JSON; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for templates and targets.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of templates.
    #[arg(long)]
    pub templates: Option<usize>,
    /// Number of ground-truth targets.
    #[arg(long)]
    pub targets: Option<usize>,
    /// Variance kept by the model the targets are drawn from.
    #[arg(long)]
    pub variance_fraction: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Settings of the `synth` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthRun {
    pub shapes: SynthConfig,
    pub target_count: usize,
    pub variance_fraction: f64,
    /// Target grid spacing, mm.
    pub spacing: f64,
    /// Target grid margin around the shape, mm.
    pub margin: f64,
    pub sampling: TargetSampling,
}

impl Default for SynthRun {
    fn default() -> Self {
        Self {
            shapes: SynthConfig::default(),
            target_count: 1,
            variance_fraction: 0.98,
            spacing: 1.0,
            margin: 5.0,
            sampling: TargetSampling::default(),
        }
    }
}

/// Ground truth written next to each synthetic target mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub case: String,
    pub seed: u64,
    pub variance_fraction: f64,
    pub params: shapefit_core::FitParams,
    pub grid: GridSpec,
    pub foreground_voxels: usize,
}

/// Parses `NX,NY,NZ/SX,SY,SZ/OX,OY,OZ`.
pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split('/').collect();
    let [dims, spacing, origin] = parts.as_slice() else {
        return Err("expected NX,NY,NZ/SX,SY,SZ/OX,OY,OZ".into());
    };
    fn triple<T: std::str::FromStr>(s: &str, what: &str) -> Result<[T; 3], String> {
        let v: Vec<T> = s
            .split(',')
            .map(|t| t.trim().parse::<T>().map_err(|_| format!("bad {what} value '{t}'")))
            .collect::<Result<_, _>>()?;
        v.try_into().map_err(|_| format!("{what} needs three comma-separated values"))
    }
    GridSpec::new(triple(dims, "dimension")?, triple(spacing, "spacing")?, triple(origin, "origin")?)
        .map_err(|e| e.to_string())
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs a parsed command line, writing its manifest on success.
pub fn run(cli: Cli) -> Result<(), Error> {
    let start = Instant::now();
    let evaluator = RayonEvaluator::new(cli.threads).map_err(|e| Error::Usage(e.to_string()))?;
    let (out, mut manifest) = match &cli.command {
        Command::BuildModel(a) => (&a.out, build_model(a)?),
        Command::Fit(a) => (&a.out, fit(a, &evaluator)?),
        Command::Mesh(a) => (&a.out, mesh(a)?),
        Command::Voxelize(a) => (&a.out, voxelize_cmd(a)?),
        Command::Evaluate(a) => (&a.out, evaluate(a, &evaluator)?),
        Command::Synth(a) => (&a.out, synth(a)?),
    };
    manifest.threads = evaluator.threads();
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    manifest.write(out)
}

fn list_templates(args: &[PathBuf]) -> Result<Vec<PathBuf>, Error> {
    if let [dir] = args {
        if dir.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| Error::io(dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("ply")))
                .collect();
            files.sort();
            return Ok(files);
        }
    }
    Ok(args.to_vec())
}

/// Warns when template centroids are spread out, which suggests the
/// templates were not rigidly aligned before model building.
fn check_alignment(templates: &[TriMesh]) {
    let centroids: Vec<_> = templates.iter().map(TriMesh::centroid).collect();
    let mean = centroids.iter().fold(shapefit_core::Vec3::ZERO, |a, c| a + *c) * (1.0 / centroids.len() as f64);
    let spread = centroids.iter().map(|c| (*c - mean).norm()).fold(0.0, f64::max);
    let size = templates[0].bounding_box().map(|(lo, hi)| (hi - lo).norm()).unwrap_or(0.0);
    if spread > 0.1 * size {
        log::warn!(
            "template centroids spread {spread:.2} mm against a shape size of {size:.2} mm; \
             the model will absorb pose differences unless templates are aligned first"
        );
    }
}

fn build_model(a: &BuildModelArgs) -> Result<RunManifest, Error> {
    let paths = list_templates(&a.templates)?;
    if paths.len() < 2 {
        return Err(Error::Usage(format!("build-model needs at least 2 templates, got {}", paths.len())));
    }
    let templates = paths.iter().map(|p| read_ply(p)).collect::<Result<Vec<_>, _>>()?;
    check_alignment(&templates);
    let model = ShapeModel::build(&templates, a.variance_fraction).map_err(|e| match e {
        ShapeModelError::TooFewTemplates(_) | ShapeModelError::VarianceFraction(_) => Error::Usage(e.to_string()),
        other => Error::compute(other),
    })?;
    create_dir(&a.out)?;
    let path = a.out.join("model.json");
    write_model(&model, &path)?;
    let kept: f64 = model.eigenvalues().iter().sum();
    let share = if model.total_variance() > 0.0 { kept / model.total_variance() } else { 1.0 };
    println!(
        "model: {} points, {} modes from {} templates ({:.2}% of variance)",
        model.point_count(),
        model.mode_count(),
        templates.len(),
        100.0 * share
    );
    let mut m = RunManifest::new("build-model", 0);
    m.config = json!({ "variance_fraction": a.variance_fraction });
    paths.iter().for_each(|p| m.input(p));
    m.output(&path);
    Ok(m)
}

fn fit(a: &FitArgs, evaluator: &RayonEvaluator) -> Result<RunManifest, Error> {
    let mut config: SwarmConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => SwarmConfig::default(),
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(s) = a.swarm_size {
        config.swarm_size = s;
    }
    if let Some(n) = a.max_iterations {
        config.max_iterations = n;
    }
    config.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let model = read_model(&a.model)?;
    let target = read_mhd(&a.target)?;
    let result = fit_with(&model, &target, &config, evaluator).map_err(|e| match e {
        FitError::Swarm(e) => Error::Usage(e.to_string()),
        other => Error::compute(other),
    })?;
    let surface = model.instantiate(&result.params).map_err(Error::compute)?;
    create_dir(&a.out)?;
    let mesh_path = a.out.join("fitted.ply");
    let result_path = a.out.join("fit_result.json");
    write_ply(&surface, &mesh_path)?;
    write_json(&result_path, &result)?;
    println!("fit: DSC {:.4} after {} iterations", result.dsc, result.iterations_run);
    let mut m = RunManifest::new("fit", 0);
    m.seed = Some(config.seed);
    m.config = serde_json::to_value(&config).expect("serializable config");
    m.input(&a.model);
    m.input(&a.target);
    if let Some(p) = &a.config {
        m.input(p);
    }
    m.output(&mesh_path);
    m.output(&result_path);
    Ok(m)
}

fn mesh(a: &MeshArgs) -> Result<RunManifest, Error> {
    let mask = read_mhd(&a.mask)?;
    if mask.is_empty() {
        log::warn!("{}: mask is empty; writing an empty mesh", a.mask.display());
    }
    let surface = marching_cubes(&mask);
    let topology = topology_report(&surface);
    create_dir(&a.out)?;
    let mesh_path = a.out.join("mesh.ply");
    let topo_path = a.out.join("topology.json");
    write_ply(&surface, &mesh_path)?;
    write_json(&topo_path, &topology)?;
    println!(
        "mesh: {} vertices, {} faces, {} component(s), Euler characteristic {}",
        topology.vertex_count, topology.face_count, topology.connected_components, topology.euler_characteristic
    );
    let mut m = RunManifest::new("mesh", 0);
    m.input(&a.mask);
    m.output(&mesh_path);
    m.output(&topo_path);
    Ok(m)
}

fn voxelize_cmd(a: &VoxelizeArgs) -> Result<RunManifest, Error> {
    let surface = read_ply(&a.mesh)?;
    let grid = match (&a.grid, &a.reference) {
        (Some(g), _) => *g,
        (None, Some(r)) => *read_mhd(r)?.grid(),
        (None, None) => {
            if !(a.spacing > 0.0 && a.margin >= 0.0) {
                return Err(Error::Usage("--spacing must be positive and --margin non-negative".into()));
            }
            grid_around(&surface, a.spacing, a.margin).map_err(|e| Error::Usage(e.to_string()))?
        }
    };
    let mask = voxelize(&surface, &grid).map_err(Error::compute)?;
    create_dir(&a.out)?;
    let path = a.out.join("mask.mhd");
    let raw = write_mhd(&mask, &path)?;
    println!("voxelize: {} foreground voxels on a {:?} grid", mask.count(), grid.dims);
    let mut m = RunManifest::new("voxelize", 0);
    m.config = json!({ "grid": grid });
    m.input(&a.mesh);
    if let Some(r) = &a.reference {
        m.input(r);
    }
    m.output(&path);
    m.output(&raw);
    Ok(m)
}

fn evaluate_case(
    case: String,
    surface_path: &Path,
    reference_path: &Path,
    grid: Option<GridSpec>,
    mode: HausdorffMode,
) -> Result<CaseReport, Error> {
    let surface = read_ply(surface_path)?;
    let reference = read_mhd(reference_path)?;
    let grid = grid.unwrap_or(*reference.grid());
    let report = evaluate_with(&surface, &reference, &grid, mode).map_err(|e| match e {
        MetricsError::GridMismatch => Error::Usage(format!(
            "{}: evaluation grid differs from the reference grid",
            reference_path.display()
        )),
        other => Error::Compute(format!("{case}: {other}")),
    })?;
    Ok(CaseReport {
        case,
        surface: surface_path.display().to_string(),
        reference: reference_path.display().to_string(),
        report,
    })
}

fn batch_cases(dir: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>, Error> {
    let mut cases = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x.eq_ignore_ascii_case("ply")) {
            let reference = path.with_extension("mhd");
            if !reference.is_file() {
                return Err(Error::Usage(format!("{}: no matching reference mask", path.display())));
            }
            let case = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            cases.push((case, path, reference));
        }
    }
    cases.sort();
    if cases.is_empty() {
        return Err(Error::Usage(format!("{}: no .ply surfaces found", dir.display())));
    }
    Ok(cases)
}

fn evaluate(a: &EvaluateArgs, evaluator: &RayonEvaluator) -> Result<RunManifest, Error> {
    let mode = match a.percentile {
        None => HausdorffMode::Max,
        Some(q) if q > 0.0 && q <= 100.0 => HausdorffMode::Percentile(q),
        Some(q) => return Err(Error::Usage(format!("--percentile {q} must lie in (0, 100]"))),
    };
    let cases = match (&a.batch, &a.surface, &a.reference) {
        (Some(dir), _, _) => batch_cases(dir)?,
        (None, Some(s), Some(r)) => {
            let case = s.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_default();
            vec![(case, s.clone(), r.clone())]
        }
        _ => return Err(Error::Usage("give SURFACE REFERENCE or --batch DIR".into())),
    };
    let reports: Vec<CaseReport> = evaluator.pool().install(|| {
        cases
            .par_iter()
            .map(|(case, s, r)| evaluate_case(case.clone(), s, r, a.grid, mode))
            .collect::<Result<_, _>>()
    })?;
    let batch = BatchReport::new(reports);
    create_dir(&a.out)?;
    let json_path = a.out.join("evaluation.json");
    let table_path = a.out.join("evaluation.txt");
    write_json(&json_path, &batch)?;
    let table = batch.table();
    fs::write(&table_path, &table).map_err(|e| Error::io(&table_path, e))?;
    print!("{table}");
    let mut m = RunManifest::new("evaluate", 0);
    m.config = json!({ "hausdorff": mode, "grid": a.grid });
    for (_, s, r) in &cases {
        m.input(s);
        m.input(r);
    }
    m.output(&json_path);
    m.output(&table_path);
    Ok(m)
}

fn synth(a: &SynthArgs) -> Result<RunManifest, Error> {
    let mut run: SynthRun = match &a.config {
        Some(p) => read_json(p)?,
        None => SynthRun::default(),
    };
    if let Some(s) = a.seed {
        run.shapes.seed = s;
    }
    if let Some(n) = a.templates {
        run.shapes.template_count = n;
    }
    if let Some(n) = a.targets {
        run.target_count = n;
    }
    if let Some(f) = a.variance_fraction {
        run.variance_fraction = f;
    }
    run.shapes.validate().map_err(|e| Error::Usage(e.to_string()))?;
    if !(run.spacing > 0.0 && run.margin >= 0.0) {
        return Err(Error::Usage("target spacing must be positive and margin non-negative".into()));
    }
    let templates = make_templates(&run.shapes).map_err(Error::compute)?;

    let mut m = RunManifest::new("synth", 0);
    m.seed = Some(run.shapes.seed);
    m.config = serde_json::to_value(&run).expect("serializable config");
    if let Some(p) = &a.config {
        m.input(p);
    }

    let template_dir = a.out.join("templates");
    create_dir(&template_dir)?;
    let mut names = Vec::new();
    for (i, t) in templates.iter().enumerate() {
        let name = format!("template_{i:03}.ply");
        let path = template_dir.join(&name);
        write_ply(t, &path)?;
        m.output(&path);
        names.push(name);
    }
    let list_path = a.out.join("templates.json");
    write_json(&list_path, &json!({ "templates": names, "config": run.shapes }))?;
    m.output(&list_path);

    if run.target_count > 0 {
        let model = ShapeModel::build(&templates, run.variance_fraction).map_err(|e| match e {
            ShapeModelError::VarianceFraction(_) => Error::Usage(e.to_string()),
            other => Error::compute(other),
        })?;
        let target_dir = a.out.join("targets");
        create_dir(&target_dir)?;
        for i in 0..run.target_count {
            let case = format!("target_{i:03}");
            let seed = run.shapes.seed.wrapping_add(1 + i as u64);
            let truth = sample_target_params(&model, &run.sampling, seed);
            let surface = model.instantiate(&truth).map_err(Error::compute)?;
            let grid = grid_around(&surface, run.spacing, run.margin).map_err(Error::compute)?;
            let (mask, params) = make_target(&model, &truth.shape_weights, truth.pose, &grid).map_err(Error::compute)?;
            let mhd = target_dir.join(format!("{case}.mhd"));
            let raw = write_mhd(&mask, &mhd)?;
            let record_path = target_dir.join(format!("{case}.json"));
            let record = TargetRecord {
                case,
                seed,
                variance_fraction: run.variance_fraction,
                params,
                grid,
                foreground_voxels: mask.count(),
            };
            write_json(&record_path, &record)?;
            m.output(&mhd);
            m.output(&raw);
            m.output(&record_path);
        }
    }
    println!("synth: {} templates, {} targets in {}", templates.len(), run.target_count, a.out.display());
    Ok(m)
}
