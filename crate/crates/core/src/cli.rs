//! The `partvox` command line.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 sample rejected by the
//! annotation filters.

use std::ffi::OsString;
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::annotate::{self, AnnotateConfig, FeatureSource, FilterThresholds, TriangleMesh};
use crate::attention::{bench_attention, BenchConfig, Mode, CSV_HEADER};
use crate::projection::{build_token_mask, CameraParams};
use crate::verify::{self, VerifyOptions};
use crate::voxgrid::{read_uvox, write_uvox};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "partvox", version, about = "Part attention over sparse voxel grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Voxelize a mesh, cluster it into parts and score the segmentation.
    Annotate(AnnotateArgs),
    /// Run the randomized equivalence suites.
    Verify(VerifyArgs),
    /// Time part attention against dense attention.
    Bench(BenchArgs),
    /// Build image-token part sets for a labeled grid.
    Project(ProjectArgs),
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Wavefront OBJ mesh.
    #[arg(long, required_unless_present = "mesh_dir", conflicts_with = "mesh_dir")]
    pub mesh: Option<PathBuf>,
    /// Directory of .obj meshes; one JSON line and one .uvox per mesh.
    #[arg(long)]
    pub mesh_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub res: u32,
    #[arg(long, default_value_t = 8)]
    pub parts: u32,
    #[arg(long, default_value_t = 500_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Raw little-endian f32 per-point features, one row per sample.
    #[arg(long, conflicts_with = "mesh_dir")]
    pub features: Option<PathBuf>,
    /// Row width of --features; inferred from the file size when omitted.
    #[arg(long, requires = "features")]
    pub feature_dim: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub ratio_threshold: f64,
    #[arg(long, default_value_t = 0.25)]
    pub inconsistency_threshold: f64,
    /// Output .uvox file, or output directory with --mesh-dir.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    #[value(name = "self")]
    SelfAttention,
    #[value(name = "cross")]
    CrossAttention,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::SelfAttention => Mode::SelfAttention,
            ModeArg::CrossAttention => Mode::CrossAttention,
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "self")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 16384)]
    pub tokens: usize,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 8)]
    pub parts: u32,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keys in cross mode.
    #[arg(long, default_value_t = 256)]
    pub image_tokens: usize,
    /// CSV file to append to (header written when the file is new or empty).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub uvox: PathBuf,
    #[arg(long)]
    pub camera: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
        }
    };
    let result = match cli.command {
        Command::Annotate(a) => cmd_annotate(&a, stdout),
        Command::Verify(a) => cmd_verify(&a, stdout),
        Command::Bench(a) => cmd_bench(&a, stdout),
        Command::Project(a) => cmd_project(&a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

#[derive(Debug, Serialize)]
struct AnnotateLine<'a> {
    mesh: &'a str,
    voxels: usize,
    parts: u32,
    squared_ratio_sum: f64,
    neighborhood_inconsistency: f64,
    accepted: bool,
}

#[derive(Debug, Serialize)]
struct AnnotateFailure<'a> {
    mesh: &'a str,
    error: String,
}

fn annotate_config(args: &AnnotateArgs) -> AnnotateConfig {
    AnnotateConfig {
        resolution: args.res,
        parts: args.parts,
        samples: args.samples,
        seed: args.seed,
        thresholds: FilterThresholds {
            ratio: args.ratio_threshold,
            inconsistency: args.inconsistency_threshold,
        },
    }
}

fn read_mesh(path: &Path) -> anyhow::Result<TriangleMesh> {
    let file = File::open(path).with_context(|| format!("opening mesh {}", path.display()))?;
    TriangleMesh::read_obj(BufReader::new(file)).with_context(|| format!("reading mesh {}", path.display()))
}

fn read_features(path: &Path, dim: Option<usize>, samples: usize) -> anyhow::Result<FeatureSource> {
    let bytes = fs::read(path).with_context(|| format!("reading features {}", path.display()))?;
    let dim = match dim {
        Some(d) => d,
        None => {
            let row_bytes = 4 * samples;
            if samples == 0 || bytes.len() % row_bytes != 0 || bytes.is_empty() {
                bail!(
                    "cannot infer feature width: {} bytes for {samples} samples; pass --feature-dim",
                    bytes.len()
                );
            }
            bytes.len() / row_bytes
        }
    };
    Ok(FeatureSource::PerPoint(annotate::read_point_features(bytes.as_slice(), dim)?))
}

/// Annotates one mesh and writes its grid. Returns the report line.
fn annotate_one(
    mesh_path: &Path,
    out: &Path,
    config: &AnnotateConfig,
    features: FeatureSource,
) -> anyhow::Result<(String, bool)> {
    let mesh = read_mesh(mesh_path)?;
    let result = annotate::annotate(&mesh, config, features)?;
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = BufWriter::new(file);
    write_uvox(&result.grid, &mut w)?;
    w.flush()?;
    let name = mesh_path.display().to_string();
    let line = AnnotateLine {
        mesh: &name,
        voxels: result.grid.len(),
        parts: config.parts,
        squared_ratio_sum: result.report.squared_ratio_sum,
        neighborhood_inconsistency: result.report.neighborhood_inconsistency,
        accepted: result.report.accepted,
    };
    Ok((serde_json::to_string(&line)?, result.report.accepted))
}

pub fn cmd_annotate(args: &AnnotateArgs, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let config = annotate_config(args);
    if let Some(mesh) = &args.mesh {
        let features = match &args.features {
            Some(path) => read_features(path, args.feature_dim, args.samples)?,
            None => FeatureSource::Geometric,
        };
        let (line, accepted) = annotate_one(mesh, &args.out, &config, features)?;
        writeln!(stdout, "{line}")?;
        return Ok(if accepted { EXIT_OK } else { EXIT_REJECTED });
    }

    let dir = args.mesh_dir.as_ref().expect("clap enforces --mesh or --mesh-dir");
    let mut meshes: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj")))
        .collect();
    meshes.sort();
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let mut code = EXIT_OK;
    for mesh in &meshes {
        let stem = mesh.file_stem().unwrap_or_default();
        let out = args.out.join(stem).with_extension("uvox");
        match annotate_one(mesh, &out, &config, FeatureSource::Geometric) {
            Ok((line, accepted)) => {
                writeln!(stdout, "{line}")?;
                if !accepted && code == EXIT_OK {
                    code = EXIT_REJECTED;
                }
            }
            Err(e) => {
                let name = mesh.display().to_string();
                let line = AnnotateFailure {
                    mesh: &name,
                    error: format!("{e:#}"),
                };
                writeln!(stdout, "{}", serde_json::to_string(&line)?)?;
                code = EXIT_ERROR;
            }
        }
    }
    Ok(code)
}

pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let report = verify::run_all(&VerifyOptions {
        cases: args.cases,
        seed: args.seed,
        inject_fault: args.inject_fault,
    });
    for suite in &report.suites {
        let status = if suite.ok() { "ok" } else { "FAILED" };
        writeln!(stdout, "{}: {}/{} {status}", suite.name, suite.passed, suite.total)?;
    }
    writeln!(stdout, "total checks: {}", report.total_checks())?;
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_ERROR })
}

pub fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let config = BenchConfig {
        mode: args.mode.into(),
        tokens: args.tokens,
        dim: args.dim,
        parts: args.parts,
        repetitions: args.reps,
        seed: args.seed,
        image_tokens: args.image_tokens,
    };
    let record = bench_attention(&config)?;
    let row = record.csv_row();
    match &args.csv {
        Some(path) => {
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .with_context(|| format!("opening {}", path.display()))?;
            if file.metadata()?.len() == 0 {
                writeln!(file, "{CSV_HEADER}")?;
            }
            writeln!(file, "{row}")?;
            writeln!(stdout, "{row}")?;
        }
        None => {
            writeln!(stdout, "{CSV_HEADER}")?;
            writeln!(stdout, "{row}")?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_project(args: &ProjectArgs, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let file = File::open(&args.uvox).with_context(|| format!("opening {}", args.uvox.display()))?;
    let grid = read_uvox(BufReader::new(file)).with_context(|| format!("reading {}", args.uvox.display()))?;
    let text = fs::read_to_string(&args.camera).with_context(|| format!("reading {}", args.camera.display()))?;
    let camera: CameraParams = text.parse()?;
    let mask = build_token_mask(&grid, &camera)?;
    fs::write(&args.out, mask.to_string()).with_context(|| format!("writing {}", args.out.display()))?;
    let (rows, cols) = mask.shape();
    let covered: Vec<String> = mask.covered_parts().iter().map(u32::to_string).collect();
    writeln!(
        stdout,
        "{rows}x{cols} tokens, {} non-empty, parts [{}]",
        mask.part_sets().iter().filter(|s| !s.is_empty()).count(),
        covered.join(" ")
    )?;
    Ok(EXIT_OK)
}
