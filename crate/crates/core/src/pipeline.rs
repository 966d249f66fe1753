//! End-to-end filtering: load, normalize, estimate and smooth normals,
//! update positions, map back and write.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::error::Error;
use crate::filtering::{filter, FilterParams, IterationDiagnostics};
use crate::geometry::{normalize_cloud, CloudTransform, PointCloud, Vec3};
use crate::io::{format_significant, read_cloud, write_cloud, CloudFormat};
use crate::metrics::{MetricReport, MseVariant};
use crate::normals::{bilateral_filter_normals, estimate_normals_pca, orient_normals, BilateralParams, ORIENTATION_K};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Generate,
    Normalize,
    Normals,
    Filter,
    Write,
    Metrics,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Load => "load",
            Stage::Generate => "generate",
            Stage::Normalize => "normalize",
            Stage::Normals => "normals",
            Stage::Filter => "filter",
            Stage::Write => "write",
            Stage::Metrics => "metrics",
            Stage::Report => "report",
        })
    }
}

/// An error tagged with the pipeline stage that produced it.
#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> AtStage<T> for Result<T, Error> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalSource {
    /// Use normals stored in the input file.
    FromFile,
    /// Estimate by PCA, ignoring any stored normals.
    #[default]
    Pca,
}

impl std::str::FromStr for NormalSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "file" | "from-file" => Ok(NormalSource::FromFile),
            "pca" => Ok(NormalSource::Pca),
            other => Err(Error::InvalidParameter(format!(
                "unknown normal source '{other}' (expected file|pca)"
            ))),
        }
    }
}

/// Everything that shapes the in-memory computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams {
    pub filter: FilterParams,
    pub bilateral: BilateralParams,
    pub normal_source: NormalSource,
    pub pca_k: usize,
    pub normalize: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            filter: FilterParams::default(),
            bilateral: BilateralParams::default(),
            normal_source: NormalSource::Pca,
            pca_k: 15,
            normalize: true,
        }
    }
}

/// Normals ready for the position update along with how they were obtained.
#[derive(Debug, Clone)]
pub struct PreparedNormals {
    pub normals: Vec<Vec3>,
    pub components: usize,
    pub degenerate: usize,
}

/// Obtain, orient and bilaterally smooth normals for `cloud`.
pub fn prepare_normals(cloud: &PointCloud, params: &PipelineParams) -> Result<PreparedNormals, Error> {
    let points = cloud.points();
    let (raw, degenerate) = match params.normal_source {
        NormalSource::FromFile => (cloud.normals().ok_or(Error::MissingNormals)?.to_vec(), 0),
        NormalSource::Pca => {
            let k = params.pca_k.min(points.len().saturating_sub(1));
            let est = estimate_normals_pca(points, k)?;
            (est.normals, est.degenerate.len())
        }
    };
    let oriented = orient_normals(points, &raw, ORIENTATION_K)?;
    let normals = bilateral_filter_normals(points, &oriented.normals, &params.bilateral)?;
    Ok(PreparedNormals {
        normals,
        components: oriented.components,
        degenerate,
    })
}

#[derive(Debug, Clone)]
pub struct Processed {
    /// Filtered cloud in the input frame, carrying the smoothed normals.
    pub cloud: PointCloud,
    pub transform: CloudTransform,
    pub diagnostics: Vec<IterationDiagnostics>,
    pub normal_components: usize,
    pub degenerate_normals: usize,
}

/// The in-memory part of the pipeline.
pub fn process_cloud(cloud: &PointCloud, params: &PipelineParams) -> Result<Processed, PipelineError> {
    let (working, transform) = if params.normalize {
        normalize_cloud(cloud).at(Stage::Normalize)?
    } else {
        (cloud.clone(), CloudTransform::IDENTITY)
    };
    let prepared = prepare_normals(&working, params).at(Stage::Normals)?;
    let mut working = working;
    working.set_normals(prepared.normals).at(Stage::Normals)?;
    let (filtered, diagnostics) = filter(&working, &params.filter).at(Stage::Filter)?;
    Ok(Processed {
        cloud: transform.invert_cloud(&filtered),
        transform,
        diagnostics,
        normal_components: prepared.components,
        degenerate_normals: prepared.degenerate,
    })
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Input format; guessed from the extension when `None`.
    pub input_format: Option<CloudFormat>,
    pub output_format: Option<CloudFormat>,
    pub params: PipelineParams,
    pub ground_truth: Option<PathBuf>,
    pub report: Option<PathBuf>,
    /// Per-iteration CSV; defaults to `<output>.diagnostics.csv`.
    pub diagnostics: Option<PathBuf>,
    pub mse_variant: MseVariant,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            output: output.into(),
            input_format: None,
            output_format: None,
            params: PipelineParams::default(),
            ground_truth: None,
            report: None,
            diagnostics: None,
            mse_variant: MseVariant::Described,
        }
    }

    pub fn diagnostics_path(&self) -> PathBuf {
        self.diagnostics.clone().unwrap_or_else(|| {
            let mut s = self.output.clone().into_os_string();
            s.push(".diagnostics.csv");
            PathBuf::from(s)
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub processed: Processed,
    /// Ground truth vs. filtered output.
    pub metrics: Option<MetricReport>,
    /// Ground truth vs. the unfiltered input.
    pub input_metrics: Option<MetricReport>,
    pub wall_time: Duration,
}

fn format_of(path: &Path, explicit: Option<CloudFormat>) -> CloudFormat {
    explicit.unwrap_or_else(|| CloudFormat::from_path(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn diagnostics_csv(diagnostics: &[IterationDiagnostics]) -> String {
    let mut s = String::from("iteration,data_energy,mean_displacement,max_displacement,nn_distance_stddev,h\n");
    for (i, d) in diagnostics.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            i + 1,
            format_significant(d.data_energy),
            format_significant(d.mean_displacement),
            format_significant(d.max_displacement),
            format_significant(d.nn_distance_stddev),
            format_significant(d.h),
        );
    }
    s
}

/// Load, filter, write, and optionally evaluate and report.
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutcome, PipelineError> {
    let start = Instant::now();
    let input_format = format_of(&config.input, config.input_format);
    let cloud = read_cloud(&config.input, input_format).at(Stage::Load)?;
    let ground_truth = match &config.ground_truth {
        Some(path) => Some(read_cloud(path, CloudFormat::from_path(path)).at(Stage::Load)?),
        None => None,
    };

    let processed = process_cloud(&cloud, &config.params)?;

    let output_format = config.output_format.unwrap_or(input_format);
    write_cloud(&processed.cloud, &config.output, output_format).at(Stage::Write)?;
    write_text(&config.diagnostics_path(), &diagnostics_csv(&processed.diagnostics)).at(Stage::Write)?;
    let wall_time = start.elapsed();

    let (metrics, input_metrics) = match &ground_truth {
        Some(gt) => (
            Some(MetricReport::compute(gt.points(), processed.cloud.points(), config.mse_variant).at(Stage::Metrics)?),
            Some(MetricReport::compute(gt.points(), cloud.points(), config.mse_variant).at(Stage::Metrics)?),
        ),
        None => (None, None),
    };

    let outcome = RunOutcome {
        processed,
        metrics,
        input_metrics,
        wall_time,
    };
    if let Some(path) = &config.report {
        write_text(path, &report_text(config, &outcome)).at(Stage::Report)?;
    }
    Ok(outcome)
}

/// Flat `key=value` summary of a run.
pub fn report_text(config: &RunConfig, outcome: &RunOutcome) -> String {
    let p = &config.params;
    let mut s = String::new();
    let _ = writeln!(s, "points={}", outcome.processed.cloud.len());
    let _ = writeln!(s, "k={}", p.filter.k);
    let _ = writeln!(s, "mu={}", p.filter.mu);
    let _ = writeln!(s, "iterations={}", p.filter.iterations);
    let _ = writeln!(s, "h_mode={}", p.filter.h);
    let _ = writeln!(s, "normal_components={}", outcome.processed.normal_components);
    let _ = writeln!(s, "degenerate_normals={}", outcome.processed.degenerate_normals);
    let _ = writeln!(s, "wall_time_s={:.3}", outcome.wall_time.as_secs_f64());
    if let Some(m) = &outcome.input_metrics {
        s.push_str(&m.to_key_values("input_"));
    }
    if let Some(m) = &outcome.metrics {
        s.push_str(&m.to_key_values(""));
    }
    s
}
