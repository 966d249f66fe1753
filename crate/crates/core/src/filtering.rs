//! Position update: edge-aware data term plus tangential repulsion.
//!
//! Each iteration rebuilds the k-NN patches on the current positions and moves
//! every point by
//!
//! ```text
//! p_i' = p_i + γ_i Σ_j [((p_j − p_i)·n_j) n_j + ((p_j − p_i)·n_i) n_i]
//!            + μ Σ_j w_j β_ij (I − n_j n_jᵀ)(p_i − p_j) / Σ_j w_j β_ij
//! ```
//!
//! with `γ_i = 1/(3|s_i|)`, `β_ij = θ(r_ij)/r_ij`, `θ(r) = exp(−r²/(h/2)²)`
//! and `r_ij` the length of `p_i − p_j` projected onto the tangent plane of
//! `n_j`. All points are updated from the same snapshot (Jacobi order).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};
use crate::index::{Neighbor, NeighborIndex};
use crate::radius::RadiusMode;

/// How the neighbor weight `w_j` of the repulsion term is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightVariant {
    /// `w_j = 1 + Σ_{l∈s_i} θ(‖p_i − p_l‖)`, the same for every neighbor of a patch.
    #[default]
    Printed,
    /// `w_j = 1 + θ(‖p_i − p_j‖)`.
    PerNeighbor,
}

impl std::str::FromStr for WeightVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(WeightVariant::Printed),
            "per-neighbor" => Ok(WeightVariant::PerNeighbor),
            other => Err(Error::InvalidParameter(format!(
                "unknown weight variant '{other}' (expected printed|per-neighbor)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// Patch size |s_i|.
    pub k: usize,
    /// Repulsion magnitude.
    pub mu: f64,
    /// Number of iterations.
    pub iterations: usize,
    /// Support radius of θ; `Auto(m)` is `m` times the mean distance to the
    /// k-th nearest neighbor, re-measured every iteration.
    pub h: RadiusMode,
    /// Lower clamp on `r_ij` inside β.
    pub epsilon_r: f64,
    pub weight_variant: WeightVariant,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            k: 30,
            mu: 0.3,
            iterations: 5,
            h: RadiusMode::Auto(4.0),
            epsilon_r: 1e-8,
            weight_variant: WeightVariant::Printed,
        }
    }
}

impl FilterParams {
    /// The smooth-surface regime: `μ = 0.1`, 30 iterations.
    pub fn smooth() -> Self {
        Self {
            mu: 0.1,
            iterations: 30,
            ..Self::default()
        }
    }

    pub fn validate(&self, points: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.k >= points {
            return Err(Error::KExceedsCloudSize { k: self.k, points });
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be non-negative, got {}", self.mu));
        }
        if self.iterations == 0 {
            return bad("iteration count must be at least 1".into());
        }
        if !(self.epsilon_r > 0.0 && self.epsilon_r.is_finite()) {
            return bad(format!("epsilon_r must be positive, got {}", self.epsilon_r));
        }
        let h = self.h.value();
        if !(h > 0.0 && h.is_finite()) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        Ok(())
    }
}

/// Per-iteration statistics, measured on the updated positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationDiagnostics {
    pub data_energy: f64,
    pub mean_displacement: f64,
    pub max_displacement: f64,
    /// Standard deviation of nearest-neighbor distances (uniformity).
    pub nn_distance_stddev: f64,
    /// Support radius used for this iteration.
    pub h: f64,
}

/// Length of `p_i − p_j` after removing its component along `n_j`.
#[inline]
pub fn repulsion_radius(p_i: Vec3, p_j: Vec3, n_j: Vec3) -> f64 {
    (p_i - p_j).reject_from(n_j).norm()
}

#[inline]
pub fn theta(r: f64, h: f64) -> f64 {
    let half = 0.5 * h;
    (-(r * r) / (half * half)).exp()
}

/// `θ(r)/r · |∂η/∂r|` with `η(r) = −r`, and `r` clamped below by `epsilon_r`.
#[inline]
pub fn beta(r: f64, h: f64, epsilon_r: f64) -> f64 {
    let r = r.max(epsilon_r);
    theta(r, h) / r
}

fn patch_data_energy(i: usize, points: &[Vec3], normals: &[Vec3], patch: &[Neighbor]) -> f64 {
    let (p_i, n_i) = (points[i], normals[i]);
    patch
        .iter()
        .map(|nb| {
            let d = p_i - points[nb.index];
            let a = d.dot(normals[nb.index]);
            let b = d.dot(n_i);
            a * a + b * b
        })
        .sum()
}

/// Σ_i Σ_{j∈s_i} [((p_i − p_j)·n_j)² + ((p_i − p_j)·n_i)²] over self-excluding
/// k-NN patches of `index`.
pub fn data_energy(index: &NeighborIndex, normals: &[Vec3], k: usize) -> Result<f64> {
    check_normals(index.len(), normals)?;
    let patches = index.all_k_nearest(k)?;
    Ok(energy_from_patches(index.points(), normals, &patches))
}

fn energy_from_patches(points: &[Vec3], normals: &[Vec3], patches: &[Vec<Neighbor>]) -> f64 {
    let per_point: Vec<f64> = patches
        .par_iter()
        .enumerate()
        .map(|(i, patch)| patch_data_energy(i, points, normals, patch))
        .collect();
    per_point.iter().sum()
}

/// Σ_i Σ_{j∈s_i} η(r_ij) θ(r_ij) with unit per-point weights.
pub fn repulsion_energy(index: &NeighborIndex, normals: &[Vec3], k: usize, h: f64) -> Result<f64> {
    check_normals(index.len(), normals)?;
    let points = index.points();
    let patches = index.all_k_nearest(k)?;
    let per_point: Vec<f64> = patches
        .par_iter()
        .enumerate()
        .map(|(i, patch)| {
            patch
                .iter()
                .map(|nb| {
                    let r = repulsion_radius(points[i], points[nb.index], normals[nb.index]);
                    -r * theta(r, h)
                })
                .sum::<f64>()
        })
        .collect();
    Ok(per_point.iter().sum())
}

/// New position of point `i` given its patch (indices of its neighbors,
/// excluding `i`) and the resolved support radius `h`.
pub fn update_point(
    i: usize,
    points: &[Vec3],
    normals: &[Vec3],
    patch: &[usize],
    params: &FilterParams,
    h: f64,
) -> Vec3 {
    let (p_i, n_i) = (points[i], normals[i]);
    if patch.is_empty() {
        return p_i;
    }
    let gamma = 1.0 / (3.0 * patch.len() as f64);

    let mut data = Vec3::ZERO;
    for &j in patch {
        let d = points[j] - p_i;
        let n_j = normals[j];
        data += n_j * d.dot(n_j) + n_i * d.dot(n_i);
    }
    let mut out = p_i + data * gamma;

    if params.mu > 0.0 {
        let patch_weight = match params.weight_variant {
            WeightVariant::Printed => 1.0 + patch.iter().map(|&l| theta(p_i.distance(points[l]), h)).sum::<f64>(),
            WeightVariant::PerNeighbor => 0.0,
        };
        let tangential: Vec<Vec3> = patch
            .iter()
            .map(|&j| (p_i - points[j]).reject_from(normals[j]))
            .collect();
        // β is evaluated relative to the nearest tangential radius; the common
        // factor cancels in the ratio and keeps θ from underflowing.
        let r_min = tangential
            .iter()
            .map(|t| t.norm().max(params.epsilon_r))
            .fold(f64::INFINITY, f64::min);
        let half = 0.5 * h;
        let mut num = Vec3::ZERO;
        let mut den = 0.0;
        for (&j, &t) in patch.iter().zip(&tangential) {
            let w = match params.weight_variant {
                WeightVariant::Printed => patch_weight,
                WeightVariant::PerNeighbor => 1.0 + theta(p_i.distance(points[j]), h),
            };
            let r = t.norm().max(params.epsilon_r);
            let scaled_beta = (-(r * r - r_min * r_min) / (half * half)).exp() / r;
            let wb = w * scaled_beta;
            num += t * wb;
            den += wb;
        }
        if den > 0.0 && den.is_finite() {
            out += num * (params.mu / den);
        }
    }
    out
}

/// Mean distance from each point to its k-th nearest neighbor.
fn mean_kth_distance(patches: &[Vec<Neighbor>]) -> f64 {
    let total: f64 = patches.iter().map(|p| p.last().map_or(0.0, Neighbor::distance)).sum();
    total / patches.len().max(1) as f64
}

/// Population standard deviation of nearest-neighbor distances.
pub fn nn_distance_stddev(index: &NeighborIndex) -> f64 {
    if index.len() < 2 {
        return 0.0;
    }
    let points = index.points();
    let d: Vec<f64> = (0..index.len())
        .into_par_iter()
        .map(|i| index.nearest_to(points[i], 1, Some(i))[0].distance())
        .collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    (d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

fn check_normals(points: usize, normals: &[Vec3]) -> Result<()> {
    if normals.len() != points {
        return Err(Error::LengthMismatch {
            points,
            normals: normals.len(),
        });
    }
    Ok(())
}

fn require_normals(cloud: &PointCloud) -> Result<&[Vec3]> {
    cloud.normals().ok_or(Error::MissingNormals)
}

/// One Jacobi sweep. Returns the moved cloud, its freshly built index and
/// diagnostics.
fn step(
    index: &NeighborIndex,
    normals: &[Vec3],
    params: &FilterParams,
) -> Result<(Vec<Vec3>, NeighborIndex, IterationDiagnostics)> {
    let points = index.points();
    let patches = index.all_k_nearest(params.k)?;
    let h = params.h.resolve(mean_kth_distance(&patches))?;

    let moved: Vec<Vec3> = patches
        .par_iter()
        .enumerate()
        .map(|(i, patch)| {
            let ids: Vec<usize> = patch.iter().map(|n| n.index).collect();
            update_point(i, points, normals, &ids, params, h)
        })
        .collect();

    let displacement: Vec<f64> = moved.iter().zip(points).map(|(a, b)| a.distance(*b)).collect();
    let next = NeighborIndex::build(&moved)?;
    let next_patches = next.all_k_nearest(params.k)?;
    let diagnostics = IterationDiagnostics {
        data_energy: energy_from_patches(&moved, normals, &next_patches),
        mean_displacement: displacement.iter().sum::<f64>() / displacement.len() as f64,
        max_displacement: displacement.iter().copied().fold(0.0, f64::max),
        nn_distance_stddev: nn_distance_stddev(&next),
        h,
    };
    Ok((moved, next, diagnostics))
}

/// A single filtering iteration on a cloud carrying oriented normals.
pub fn filter_iteration(cloud: &PointCloud, params: &FilterParams) -> Result<(PointCloud, IterationDiagnostics)> {
    let normals = require_normals(cloud)?;
    params.validate(cloud.len())?;
    let index = NeighborIndex::build(cloud.points())?;
    let (moved, _, diagnostics) = step(&index, normals, params)?;
    Ok((cloud.with_points(moved)?, diagnostics))
}

/// Run `params.iterations` sweeps. Normals stay fixed throughout.
pub fn filter(cloud: &PointCloud, params: &FilterParams) -> Result<(PointCloud, Vec<IterationDiagnostics>)> {
    let normals = require_normals(cloud)?;
    params.validate(cloud.len())?;
    let mut index = NeighborIndex::build(cloud.points())?;
    let mut history = Vec::with_capacity(params.iterations);
    for _ in 0..params.iterations {
        let (_, next, diagnostics) = step(&index, normals, params)?;
        index = next;
        history.push(diagnostics);
    }
    Ok((cloud.with_points(index.points().to_vec())?, history))
}
