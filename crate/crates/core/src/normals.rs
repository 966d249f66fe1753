//! Normal estimation, orientation and bilateral smoothing.
//!
//! The position optimizer needs unit normals with a consistent sign. They are
//! produced in three steps: PCA over each k-neighborhood, sign propagation
//! along a minimum spanning tree of the k-NN graph, and a bilateral filter
//! that averages normals of nearby points with similar orientation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::index::{Neighbor, NeighborIndex};
use crate::radius::RadiusMode;

/// Neighborhood size of the graph used by [`orient_normals`].
pub const ORIENTATION_K: usize = 8;

/// Relative eigenvalue gap below which two eigenvalues count as equal.
const EIGEN_GAP_TOLERANCE: f64 = 1e-10;

/// Total bilateral weight below which a point keeps its input normal.
const MIN_TOTAL_WEIGHT: f64 = 1e-12;

/// Result of [`estimate_normals_pca`].
#[derive(Debug, Clone)]
pub struct PcaNormals {
    pub normals: Vec<Vec3>,
    /// Points whose smallest-eigenvalue eigenspace had dimension > 1.
    pub degenerate: Vec<usize>,
}

/// Unit normal of each point from the covariance of itself plus its `k`
/// nearest neighbors. The sign is arbitrary; see [`orient_normals`].
pub fn estimate_normals_pca(points: &[Vec3], k: usize) -> Result<PcaNormals> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "PCA neighborhood size must be at least 3, got {k}"
        )));
    }
    let index = NeighborIndex::build(points)?;
    let neighborhoods = index.all_k_nearest(k)?;
    let estimates: Vec<(Vec3, bool)> = neighborhoods
        .par_iter()
        .enumerate()
        .map(|(i, nbrs)| {
            let members = std::iter::once(points[i]).chain(nbrs.iter().map(|n| points[n.index]));
            smallest_eigenvector(members)
        })
        .collect();
    let degenerate = estimates
        .iter()
        .enumerate()
        .filter_map(|(i, &(_, flagged))| flagged.then_some(i))
        .collect();
    Ok(PcaNormals {
        normals: estimates.into_iter().map(|(n, _)| n).collect(),
        degenerate,
    })
}

fn smallest_eigenvector(members: impl Iterator<Item = Vec3> + Clone) -> (Vec3, bool) {
    let count = members.clone().count() as f64;
    let mean = members.clone().fold(Vec3::ZERO, |a, p| a + p) / count;
    let mut cov = Matrix3::<f64>::zeros();
    for p in members {
        let d = p - mean;
        let v = Vector3::new(d.x, d.y, d.z);
        cov += v * v.transpose();
    }
    cov /= count;

    let eigen = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let values = order.map(|i| eigen.eigenvalues[i]);
    let vectors = order.map(|i| {
        let c = eigen.eigenvectors.column(i);
        Vec3::new(c[0], c[1], c[2])
    });

    let tol = EIGEN_GAP_TOLERANCE * values[2].abs().max(f64::MIN_POSITIVE);
    let dim = 1 + values[1..].iter().filter(|&&v| v - values[0] <= tol).count();
    if dim == 1 {
        let n = vectors[0].try_normalize().unwrap_or(Vec3::Z);
        (n, false)
    } else {
        (lexicographic_min_unit(&vectors[..dim]), true)
    }
}

/// The lexicographically smallest unit vector in the span of an orthonormal basis.
fn lexicographic_min_unit(basis: &[Vec3]) -> Vec3 {
    for axis in [Vec3::X, Vec3::Y, Vec3::Z] {
        let projection = basis.iter().fold(Vec3::ZERO, |acc, &b| acc + b * b.dot(axis));
        if projection.norm() > 1e-12 {
            return -projection.try_normalize().expect("non-zero projection");
        }
        // Span orthogonal to this axis: every candidate ties on it.
    }
    -Vec3::X
}

/// Result of [`orient_normals`].
#[derive(Debug, Clone)]
pub struct OrientedNormals {
    pub normals: Vec<Vec3>,
    /// Connected components of the k-NN graph, each oriented independently.
    pub components: usize,
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    weight: f64,
    to: usize,
    from: usize,
}

impl PartialEq for Edge {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Edge {}

impl PartialOrd for Edge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Edge {
    // Reversed so BinaryHeap pops the lightest edge first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .weight
            .total_cmp(&self.weight)
            .then(other.to.cmp(&self.to))
            .then(other.from.cmp(&self.from))
    }
}

/// Flip normal signs so they agree along a minimum spanning tree of the
/// symmetrized k-NN graph (edge weight `1 − |n_a·n_b|`). Each component's root
/// is its highest point, oriented toward +z.
pub fn orient_normals(points: &[Vec3], normals: &[Vec3], k: usize) -> Result<OrientedNormals> {
    if normals.len() != points.len() {
        return Err(Error::LengthMismatch {
            points: points.len(),
            normals: normals.len(),
        });
    }
    let m = points.len();
    if m == 1 {
        let n = normals[0];
        return Ok(OrientedNormals {
            normals: vec![if n.z < 0.0 { -n } else { n }],
            components: 1,
        });
    }
    let index = NeighborIndex::build(points)?;
    let k = k.clamp(1, m - 1);
    let mut adjacency: Vec<Vec<usize>> = index
        .all_k_nearest(k)?
        .into_iter()
        .map(|nbrs| nbrs.into_iter().map(|n| n.index).collect())
        .collect();
    for i in 0..m {
        for j in adjacency[i].clone() {
            if !adjacency[j].contains(&i) {
                adjacency[j].push(i);
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    let component_of = label_components(&adjacency);
    let components = component_of.iter().copied().max().map_or(0, |c| c + 1);
    let mut roots: Vec<Option<usize>> = vec![None; components];
    for i in 0..m {
        let c = component_of[i];
        match roots[c] {
            Some(r) if points[r].z >= points[i].z => {}
            _ => roots[c] = Some(i),
        }
    }

    let mut out = normals.to_vec();
    let mut visited = vec![false; m];
    let mut heap = BinaryHeap::new();
    for root in roots.into_iter().flatten() {
        if out[root].z < 0.0 {
            out[root] = -out[root];
        }
        visited[root] = true;
        push_edges(root, &adjacency, &out, &visited, &mut heap);
        while let Some(edge) = heap.pop() {
            if visited[edge.to] {
                continue;
            }
            visited[edge.to] = true;
            if out[edge.to].dot(out[edge.from]) < 0.0 {
                out[edge.to] = -out[edge.to];
            }
            push_edges(edge.to, &adjacency, &out, &visited, &mut heap);
        }
    }
    Ok(OrientedNormals {
        normals: out,
        components,
    })
}

fn push_edges(from: usize, adjacency: &[Vec<usize>], normals: &[Vec3], visited: &[bool], heap: &mut BinaryHeap<Edge>) {
    for &to in &adjacency[from] {
        if !visited[to] {
            heap.push(Edge {
                weight: 1.0 - normals[from].dot(normals[to]).abs(),
                to,
                from,
            });
        }
    }
}

fn label_components(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let mut label = vec![usize::MAX; adjacency.len()];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..adjacency.len() {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if label[w] == usize::MAX {
                    label[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    label
}

/// Tunables of [`bilateral_filter_normals`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilateralParams {
    /// Spatial kernel width; `Auto(m)` is `m` times the mean k-NN distance.
    pub sigma_s: RadiusMode,
    /// Width of the normal-difference kernel on `1 − n_i·n_j`.
    pub sigma_r: f64,
    pub iterations: usize,
    pub k: usize,
}

impl Default for BilateralParams {
    fn default() -> Self {
        Self {
            sigma_s: RadiusMode::Auto(2.0),
            sigma_r: 0.3,
            iterations: 3,
            k: 15,
        }
    }
}

impl BilateralParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.sigma_r > 0.0 && self.sigma_r.is_finite()) {
            return bad("bilateral sigma_r must be positive");
        }
        let s = self.sigma_s.value();
        if !(s > 0.0 && s.is_finite()) {
            return bad("bilateral sigma_s must be positive");
        }
        if self.iterations < 1 {
            return bad("bilateral iterations must be at least 1");
        }
        if self.k < 3 {
            return bad("bilateral k must be at least 3");
        }
        Ok(())
    }
}

/// Mean over all points of the mean distance to their neighbors.
pub fn mean_neighbor_distance(neighborhoods: &[Vec<Neighbor>]) -> f64 {
    let total: f64 = neighborhoods
        .iter()
        .map(|nbrs| nbrs.iter().map(Neighbor::distance).sum::<f64>() / nbrs.len().max(1) as f64)
        .sum();
    total / neighborhoods.len().max(1) as f64
}

/// Smooth consistently oriented normals with the weight
/// `exp(−d²/σ_s²)·exp(−(1 − n_i·n_j)²/σ_r²)` over each point and its `k`
/// neighbors. Each pass reads only the previous pass's normals.
pub fn bilateral_filter_normals(points: &[Vec3], normals: &[Vec3], params: &BilateralParams) -> Result<Vec<Vec3>> {
    params.validate()?;
    if normals.len() != points.len() {
        return Err(Error::LengthMismatch {
            points: points.len(),
            normals: normals.len(),
        });
    }
    if points.len() < 2 {
        return Ok(normals.to_vec());
    }
    let index = NeighborIndex::build(points)?;
    let k = params.k.min(points.len() - 1);
    let neighborhoods = index.all_k_nearest(k)?;
    let sigma_s = params.sigma_s.resolve(mean_neighbor_distance(&neighborhoods))?;
    let inv_s2 = 1.0 / (sigma_s * sigma_s);
    let inv_r2 = 1.0 / (params.sigma_r * params.sigma_r);

    let mut current = normals.to_vec();
    for _ in 0..params.iterations {
        current = neighborhoods
            .par_iter()
            .enumerate()
            .map(|(i, nbrs)| {
                let ni = current[i];
                let mut sum = ni;
                let mut total = 1.0;
                for nb in nbrs {
                    let nj = current[nb.index];
                    let range = 1.0 - ni.dot(nj);
                    let w = (-nb.distance_squared * inv_s2).exp() * (-range * range * inv_r2).exp();
                    sum += nj * w;
                    total += w;
                }
                if total < MIN_TOTAL_WEIGHT {
                    return ni;
                }
                sum.try_normalize().unwrap_or(ni)
            })
            .collect();
    }
    Ok(current)
}
