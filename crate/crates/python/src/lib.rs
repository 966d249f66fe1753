//! Python bindings. Clouds cross the boundary as lists of `[x, y, z]`
//! triples; normals are a parallel list or `None`.

use std::collections::HashMap;
use std::path::PathBuf;

use pcfilter_core::io::CloudFormat;
use pcfilter_core::pipeline::{process_cloud, NormalSource, PipelineParams};
use pcfilter_core::synth::{NoiseSpec, ShapeKind};
use pcfilter_core::{BilateralParams, FilterParams, MseVariant, PointCloud, RadiusMode, Vec3, WeightVariant};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

type Triples = Vec<[f64; 3]>;
type Diagnostics = Vec<HashMap<String, f64>>;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_vecs(v: &[[f64; 3]]) -> Vec<Vec3> {
    v.iter().map(|&[x, y, z]| Vec3::new(x, y, z)).collect()
}

fn to_triples(v: &[Vec3]) -> Triples {
    v.iter().map(|p| p.to_array()).collect()
}

fn cloud(points: &[[f64; 3]], normals: Option<&[[f64; 3]]>) -> PyResult<PointCloud> {
    match normals {
        Some(n) => PointCloud::with_normals(to_vecs(points), to_vecs(n)),
        None => PointCloud::new(to_vecs(points)),
    }
    .map_err(value_error)
}

fn split(c: &PointCloud) -> (Triples, Option<Triples>) {
    (to_triples(c.points()), c.normals().map(to_triples))
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(value_error)
}

/// Sample a synthetic shape normalized to a unit diagonal.
#[pyfunction]
fn make_shape(kind: &str, n: usize) -> PyResult<(Triples, Option<Triples>)> {
    let kind: ShapeKind = parse(kind)?;
    Ok(split(&pcfilter_core::synth::make_shape(kind, n).map_err(value_error)?))
}

#[pyfunction]
#[pyo3(signature = (clusters=4, per_cluster=50, seed=0))]
fn make_clustered_plane(clusters: usize, per_cluster: usize, seed: u64) -> PyResult<(Triples, Option<Triples>)> {
    Ok(split(
        &pcfilter_core::synth::make_clustered_plane(clusters, per_cluster, seed).map_err(value_error)?,
    ))
}

/// Gaussian noise with standard deviation `level` times the bounding-box diagonal.
#[pyfunction]
#[pyo3(signature = (points, level, seed=0))]
fn add_noise(points: Triples, level: f64, seed: u64) -> PyResult<Triples> {
    let c = cloud(&points, None)?;
    let noisy = pcfilter_core::synth::add_gaussian_noise(&c, NoiseSpec { level, seed }).map_err(value_error)?;
    Ok(to_triples(noisy.points()))
}

/// Oriented, bilaterally smoothed normals. Uses PCA unless `normals` is given.
#[pyfunction]
#[pyo3(signature = (points, normals=None, pca_k=15, normalize=true))]
fn estimate_normals(points: Triples, normals: Option<Triples>, pca_k: usize, normalize: bool) -> PyResult<Triples> {
    let c = cloud(&points, normals.as_deref())?;
    let params = PipelineParams {
        normal_source: if normals.is_some() {
            NormalSource::FromFile
        } else {
            NormalSource::Pca
        },
        pca_k,
        ..PipelineParams::default()
    };
    let working = if normalize {
        pcfilter_core::normalize_cloud(&c).map_err(value_error)?.0
    } else {
        c
    };
    let prepared = pcfilter_core::pipeline::prepare_normals(&working, &params).map_err(value_error)?;
    Ok(to_triples(&prepared.normals))
}

/// Run the full filter. Returns `(points, normals, diagnostics)`.
#[pyfunction]
#[pyo3(signature = (
    points, normals=None, k=30, mu=0.3, iterations=5, h="auto:4", pca_k=15,
    bilateral_sigma_s="auto:2", bilateral_sigma_r=0.3, bilateral_iterations=3,
    normalize=true, wj_variant="printed",
))]
#[allow(clippy::too_many_arguments)]
fn filter(
    points: Triples,
    normals: Option<Triples>,
    k: usize,
    mu: f64,
    iterations: usize,
    h: &str,
    pca_k: usize,
    bilateral_sigma_s: &str,
    bilateral_sigma_r: f64,
    bilateral_iterations: usize,
    normalize: bool,
    wj_variant: &str,
) -> PyResult<(Triples, Triples, Diagnostics)> {
    let c = cloud(&points, normals.as_deref())?;
    let params = PipelineParams {
        filter: FilterParams {
            k,
            mu,
            iterations,
            h: parse::<RadiusMode>(h)?,
            weight_variant: parse::<WeightVariant>(wj_variant)?,
            ..FilterParams::default()
        },
        bilateral: BilateralParams {
            sigma_s: parse::<RadiusMode>(bilateral_sigma_s)?,
            sigma_r: bilateral_sigma_r,
            iterations: bilateral_iterations,
            ..BilateralParams::default()
        },
        normal_source: if normals.is_some() {
            NormalSource::FromFile
        } else {
            NormalSource::Pca
        },
        pca_k,
        normalize,
    };
    let out = process_cloud(&c, &params).map_err(value_error)?;
    let diagnostics = out
        .diagnostics
        .iter()
        .map(|d| {
            HashMap::from([
                ("data_energy".to_string(), d.data_energy),
                ("mean_displacement".to_string(), d.mean_displacement),
                ("max_displacement".to_string(), d.max_displacement),
                ("nn_distance_stddev".to_string(), d.nn_distance_stddev),
                ("h".to_string(), d.h),
            ])
        })
        .collect();
    let (p, n) = split(&out.cloud);
    Ok((p, n.unwrap_or_default(), diagnostics))
}

#[pyfunction]
fn chamfer_distance(a: Triples, b: Triples) -> PyResult<f64> {
    pcfilter_core::chamfer_distance(&to_vecs(&a), &to_vecs(&b)).map_err(value_error)
}

/// Mean squared distance to the 10 nearest ground-truth points.
#[pyfunction]
#[pyo3(signature = (ground_truth, points, variant="described"))]
fn mean_square_error(ground_truth: Triples, points: Triples, variant: &str) -> PyResult<f64> {
    let variant: MseVariant = parse(variant)?;
    pcfilter_core::mean_square_error(
        &to_vecs(&ground_truth),
        &to_vecs(&points),
        pcfilter_core::metrics::MSE_NEIGHBORS,
        variant,
    )
    .map_err(value_error)
}

#[pyfunction]
fn read_cloud(path: PathBuf) -> PyResult<(Triples, Option<Triples>)> {
    let c = pcfilter_core::io::read_cloud(&path, CloudFormat::from_path(&path)).map_err(value_error)?;
    Ok(split(&c))
}

#[pyfunction]
#[pyo3(signature = (path, points, normals=None))]
fn write_cloud(path: PathBuf, points: Triples, normals: Option<Triples>) -> PyResult<()> {
    let c = cloud(&points, normals.as_deref())?;
    pcfilter_core::io::write_cloud(&c, &path, CloudFormat::from_path(&path)).map_err(value_error)
}

#[pymodule]
fn pcfilter(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(make_shape, m)?)?;
    m.add_function(wrap_pyfunction!(make_clustered_plane, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_normals, m)?)?;
    m.add_function(wrap_pyfunction!(filter, m)?)?;
    m.add_function(wrap_pyfunction!(chamfer_distance, m)?)?;
    m.add_function(wrap_pyfunction!(mean_square_error, m)?)?;
    m.add_function(wrap_pyfunction!(read_cloud, m)?)?;
    m.add_function(wrap_pyfunction!(write_cloud, m)?)?;
    m.add("RNG_ALGORITHM", pcfilter_core::synth::RNG_ALGORITHM)?;
    Ok(())
}
