use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use pcfilter_core::io::{read_cloud, write_cloud, write_cloud_with_comments, CloudFormat};
use pcfilter_core::pipeline::{
    prepare_normals, report_text, run_pipeline, NormalSource, PipelineParams, RunConfig, Stage,
};
use pcfilter_core::synth::{add_gaussian_noise, make_clustered_plane, make_shape, NoiseSpec, ShapeKind, RNG_ALGORITHM};
use pcfilter_core::{
    normalize_cloud, BilateralParams, FilterParams, MetricReport, MseVariant, RadiusMode, WeightVariant,
};

#[derive(Parser)]
#[command(name = "pcfilter", version, about = "Feature-preserving point cloud filtering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate normals and filter positions.
    Filter(FilterArgs),
    /// Estimate, orient and smooth normals only.
    Normals(NormalsArgs),
    /// Add seeded Gaussian noise to a cloud.
    Noise(NoiseArgs),
    /// Generate a synthetic shape.
    Shape(ShapeArgs),
    /// Compare a cloud against ground truth.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Output format (xyz|ply-ascii); defaults to the output extension.
    #[arg(long)]
    format: Option<CloudFormat>,
}

#[derive(Args)]
struct NormalArgs {
    /// Normal source: `file` or `pca`.
    #[arg(long = "normals", default_value = "pca")]
    source: NormalSource,
    #[arg(long, default_value_t = 15)]
    pca_k: usize,
    /// Spatial width, a value or `auto:MULT` of the mean neighbor spacing.
    #[arg(long, default_value = "auto:2")]
    bilateral_sigma_s: RadiusMode,
    #[arg(long, default_value_t = 0.3)]
    bilateral_sigma_r: f64,
    #[arg(long, default_value_t = 3)]
    bilateral_iters: usize,
    /// Work in the input frame instead of the centred unit-diagonal one.
    #[arg(long)]
    no_normalize: bool,
}

impl NormalArgs {
    fn apply(&self, params: &mut PipelineParams) {
        params.normal_source = self.source;
        params.pca_k = self.pca_k;
        params.bilateral = BilateralParams {
            sigma_s: self.bilateral_sigma_s,
            sigma_r: self.bilateral_sigma_r,
            iterations: self.bilateral_iters,
            ..BilateralParams::default()
        };
        params.normalize = !self.no_normalize;
    }
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    normals: NormalArgs,
    #[arg(long, default_value_t = 30)]
    k: usize,
    #[arg(long, default_value_t = 0.3)]
    mu: f64,
    #[arg(long, default_value_t = 5)]
    iters: usize,
    /// Support radius, a value or `auto:MULT` of the mean k-th neighbor distance.
    #[arg(long, default_value = "auto:4")]
    h: RadiusMode,
    #[arg(long, default_value = "printed")]
    wj_variant: WeightVariant,
    /// Ground truth cloud; enables metrics in the report.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Report path; without it the report goes to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-iteration CSV; defaults to `<output>.diagnostics.csv`.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    #[arg(long, default_value = "described")]
    mse_variant: MseVariant,
}

#[derive(Args)]
struct NormalsArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    normals: NormalArgs,
}

#[derive(Args)]
struct NoiseArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Standard deviation as a fraction of the bounding-box diagonal.
    #[arg(long)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ShapeArgs {
    /// plane, cube, sphere, wedge, icosahedron or clustered-plane.
    #[arg(long)]
    kind: String,
    /// Samples per unit edge; the cube yields 6·n² points.
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    clusters: usize,
    #[arg(long, default_value_t = 50)]
    per_cluster: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    format: Option<CloudFormat>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Cloud to evaluate.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value = "described")]
    mse_variant: MseVariant,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn at<T, E: Display>(stage: Stage, result: std::result::Result<T, E>) -> Result<T> {
    result.map_err(|e| anyhow!("[{stage}] {e}"))
}

fn output_format(io: &IoArgs) -> CloudFormat {
    io.format.unwrap_or_else(|| CloudFormat::from_path(&io.output))
}

fn load(path: &Path) -> Result<pcfilter_core::PointCloud> {
    at(Stage::Load, read_cloud(path, CloudFormat::from_path(path)))
}

fn write_text(stage: Stage, path: &Path, text: &str) -> Result<()> {
    at(
        stage,
        fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
    )
}

fn run_filter(args: FilterArgs) -> Result<()> {
    let mut config = RunConfig::new(&args.io.input, &args.io.output);
    config.output_format = Some(output_format(&args.io));
    args.normals.apply(&mut config.params);
    config.params.filter = FilterParams {
        k: args.k,
        mu: args.mu,
        iterations: args.iters,
        h: args.h,
        weight_variant: args.wj_variant,
        ..FilterParams::default()
    };
    config.ground_truth = args.gt;
    config.report = args.report;
    config.diagnostics = args.diagnostics;
    config.mse_variant = args.mse_variant;
    let outcome = run_pipeline(&config).map_err(|e| anyhow!("{e}"))?;
    if config.report.is_none() {
        print!("{}", report_text(&config, &outcome));
    }
    Ok(())
}

fn run_normals(args: NormalsArgs) -> Result<()> {
    let cloud = load(&args.io.input)?;
    let mut params = PipelineParams::default();
    args.normals.apply(&mut params);
    let working = if params.normalize {
        at(Stage::Normalize, normalize_cloud(&cloud))?.0
    } else {
        cloud.clone()
    };
    let prepared = at(Stage::Normals, prepare_normals(&working, &params))?;
    let mut out = cloud;
    at(Stage::Normals, out.set_normals(prepared.normals))?;
    at(
        Stage::Write,
        write_cloud(&out, &args.io.output, output_format(&args.io)),
    )?;
    println!("points={}", out.len());
    println!("normal_components={}", prepared.components);
    println!("degenerate_normals={}", prepared.degenerate);
    Ok(())
}

fn rng_comments(seed: u64) -> Vec<String> {
    vec![format!("rng={RNG_ALGORITHM}"), format!("seed={seed}")]
}

fn run_noise(args: NoiseArgs) -> Result<()> {
    let cloud = load(&args.io.input)?;
    let noisy = at(
        Stage::Generate,
        add_gaussian_noise(
            &cloud,
            NoiseSpec {
                level: args.level,
                seed: args.seed,
            },
        ),
    )?;
    let mut comments = rng_comments(args.seed);
    comments.push(format!("noise_level={}", args.level));
    at(
        Stage::Write,
        write_cloud_with_comments(&noisy, &args.io.output, output_format(&args.io), &comments),
    )
}

fn run_shape(args: ShapeArgs) -> Result<()> {
    let (cloud, mut comments) = if args.kind == "clustered-plane" {
        let cloud = at(
            Stage::Generate,
            make_clustered_plane(args.clusters, args.per_cluster, args.seed),
        )?;
        let mut c = rng_comments(args.seed);
        c.push(format!(
            "shape=clustered-plane clusters={} per_cluster={}",
            args.clusters, args.per_cluster
        ));
        (cloud, c)
    } else {
        let kind: ShapeKind = at(Stage::Generate, args.kind.parse())?;
        (
            at(Stage::Generate, make_shape(kind, args.n))?,
            vec![format!("shape={kind} n={}", args.n)],
        )
    };
    comments.push(format!("points={}", cloud.len()));
    let format = args.format.unwrap_or_else(|| CloudFormat::from_path(&args.output));
    at(
        Stage::Write,
        write_cloud_with_comments(&cloud, &args.output, format, &comments),
    )
}

fn run_metrics(args: MetricsArgs) -> Result<()> {
    let cloud = load(&args.input)?;
    let gt = load(&args.gt)?;
    let report = at(
        Stage::Metrics,
        MetricReport::compute(gt.points(), cloud.points(), args.mse_variant),
    )?;
    let text = report.to_key_values("");
    match &args.report {
        Some(path) => write_text(Stage::Report, path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Filter(a) => run_filter(a),
        Command::Normals(a) => run_normals(a),
        Command::Noise(a) => run_noise(a),
        Command::Shape(a) => run_shape(a),
        Command::Metrics(a) => run_metrics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pcfilter: {e}");
            ExitCode::FAILURE
        }
    }
}
