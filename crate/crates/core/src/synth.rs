//! Deterministic synthetic shapes and Gaussian noise.
//!
//! Randomness comes from [`RNG_ALGORITHM`] seeded with `seed_from_u64`, so a
//! given seed reproduces bit-identical output within this implementation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{normalize_cloud, PointCloud, Vec3};

/// Name of the generator recorded in file metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng(seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Plane,
    Cube,
    Sphere,
    Wedge,
    Icosahedron,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Plane,
        ShapeKind::Cube,
        ShapeKind::Sphere,
        ShapeKind::Wedge,
        ShapeKind::Icosahedron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Plane => "plane",
            ShapeKind::Cube => "cube",
            ShapeKind::Sphere => "sphere",
            ShapeKind::Wedge => "wedge",
            ShapeKind::Icosahedron => "icosahedron",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownShape(s.to_string()))
    }
}

/// Cell-centred `n × n` grid on the parallelogram `origin + u·a + v·b`, `u, v ∈ [0, 1]`.
fn face_grid(origin: Vec3, a: Vec3, b: Vec3, normal: Vec3, n: usize, out: &mut Vec<(Vec3, Vec3)>) {
    for row in 0..n {
        for col in 0..n {
            let u = (col as f64 + 0.5) / n as f64;
            let v = (row as f64 + 0.5) / n as f64;
            out.push((origin + a * u + b * v, normal));
        }
    }
}

/// Centroids of the `n²` sub-triangles of a regular subdivision.
fn triangle_samples(a: Vec3, b: Vec3, c: Vec3, n: usize, out: &mut Vec<(Vec3, Vec3)>) {
    let normal = (b - a).cross(c - a).try_normalize().expect("non-degenerate face");
    let (e1, e2) = ((b - a) / n as f64, (c - a) / n as f64);
    let at = |i: f64, j: f64| a + e1 * i + e2 * j;
    for i in 0..n {
        for j in 0..n - i {
            let (fi, fj) = (i as f64, j as f64);
            let up = (at(fi, fj) + at(fi + 1.0, fj) + at(fi, fj + 1.0)) / 3.0;
            out.push((up, normal));
            if i + j + 1 < n {
                let down = (at(fi + 1.0, fj) + at(fi, fj + 1.0) + at(fi + 1.0, fj + 1.0)) / 3.0;
                out.push((down, normal));
            }
        }
    }
}

fn icosahedron_faces() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let v = vec![
        Vec3::new(-1.0, phi, 0.0),
        Vec3::new(1.0, phi, 0.0),
        Vec3::new(-1.0, -phi, 0.0),
        Vec3::new(1.0, -phi, 0.0),
        Vec3::new(0.0, -1.0, phi),
        Vec3::new(0.0, 1.0, phi),
        Vec3::new(0.0, -1.0, -phi),
        Vec3::new(0.0, 1.0, -phi),
        Vec3::new(phi, 0.0, -1.0),
        Vec3::new(phi, 0.0, 1.0),
        Vec3::new(-phi, 0.0, -1.0),
        Vec3::new(-phi, 0.0, 1.0),
    ];
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}

/// Surface samples in the shape's own frame, before normalization.
///
/// * plane: `n²` points on the unit square at z = 0.
/// * cube: `n²` points per face of the unit cube, `6n²` total.
/// * sphere: `6n²` Fibonacci-lattice points on the unit sphere.
/// * wedge: two perpendicular unit squares sharing a convex edge, `2n²` points.
/// * icosahedron: `n²` points per face, `20n²` total.
pub fn sample_shape(kind: ShapeKind, samples_per_unit: usize) -> Result<PointCloud> {
    let n = samples_per_unit;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "samples per unit must be at least 2, got {n}"
        )));
    }
    let mut samples = Vec::new();
    match kind {
        ShapeKind::Plane => face_grid(Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::Z, n, &mut samples),
        ShapeKind::Cube => {
            let o = Vec3::ZERO;
            let one = Vec3::new(1.0, 1.0, 1.0);
            face_grid(o, Vec3::Y, Vec3::X, -Vec3::Z, n, &mut samples);
            face_grid(Vec3::Z, Vec3::X, Vec3::Y, Vec3::Z, n, &mut samples);
            face_grid(o, Vec3::Z, Vec3::Y, -Vec3::X, n, &mut samples);
            face_grid(Vec3::X, Vec3::Y, Vec3::Z, Vec3::X, n, &mut samples);
            face_grid(o, Vec3::X, Vec3::Z, -Vec3::Y, n, &mut samples);
            face_grid(one - Vec3::X - Vec3::Z, Vec3::Z, Vec3::X, Vec3::Y, n, &mut samples);
        }
        ShapeKind::Sphere => {
            let count = 6 * n * n;
            let golden = PI * (3.0 - 5f64.sqrt());
            for i in 0..count {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let a = golden * i as f64;
                let p = Vec3::new(r * a.cos(), r * a.sin(), z);
                let p = p.try_normalize().expect("unit sphere sample");
                samples.push((p, p));
            }
        }
        ShapeKind::Wedge => {
            face_grid(Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::Z, n, &mut samples);
            face_grid(Vec3::X - Vec3::Z, Vec3::Y, Vec3::Z, Vec3::X, n, &mut samples);
        }
        ShapeKind::Icosahedron => {
            let (verts, faces) = icosahedron_faces();
            for [a, b, c] in faces {
                triangle_samples(verts[a], verts[b], verts[c], n, &mut samples);
            }
        }
    }
    let (points, normals): (Vec<Vec3>, Vec<Vec3>) = samples.into_iter().unzip();
    PointCloud::with_normals(points, normals)
}

/// [`sample_shape`] normalized to a centred cloud with unit bounding-box diagonal.
pub fn make_shape(kind: ShapeKind, samples_per_unit: usize) -> Result<PointCloud> {
    let raw = sample_shape(kind, samples_per_unit)?;
    Ok(normalize_cloud(&raw)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation as a fraction of the bounding-box diagonal.
    pub level: f64,
    pub seed: u64,
}

/// Perturb each coordinate by an independent `N(0, (level · diagonal)²)`
/// sample. Normals and ordering are kept.
pub fn add_gaussian_noise(cloud: &PointCloud, spec: NoiseSpec) -> Result<PointCloud> {
    if !(spec.level >= 0.0 && spec.level.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be non-negative, got {}",
            spec.level
        )));
    }
    if spec.level == 0.0 {
        return Ok(cloud.clone());
    }
    let sigma = spec.level * cloud.bbox_diagonal();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let points = cloud
        .points()
        .iter()
        .map(|&p| {
            let dx = normal.sample(&mut rng);
            let dy = normal.sample(&mut rng);
            let dz = normal.sample(&mut rng);
            p + Vec3::new(dx, dy, dz)
        })
        .collect();
    cloud.with_points(points)
}

/// Planar Gaussian blobs at z = 0 with normals (0, 0, 1), normalized to a
/// unit diagonal.
pub fn make_clustered_plane(clusters: usize, points_per_cluster: usize, seed: u64) -> Result<PointCloud> {
    if clusters < 2 {
        return Err(Error::InvalidParameter(format!(
            "clustered plane needs at least 2 clusters, got {clusters}"
        )));
    }
    if points_per_cluster == 0 {
        return Err(Error::InvalidParameter("points per cluster must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Blob width relative to the unit square the centres are drawn from.
    let spread = Normal::new(0.0, 0.06).expect("valid sigma");
    let mut points = Vec::with_capacity(clusters * points_per_cluster);
    for _ in 0..clusters {
        let cx: f64 = rng.random_range(0.0..1.0);
        let cy: f64 = rng.random_range(0.0..1.0);
        for _ in 0..points_per_cluster {
            points.push(Vec3::new(
                cx + spread.sample(&mut rng),
                cy + spread.sample(&mut rng),
                0.0,
            ));
        }
    }
    let normals = vec![Vec3::Z; points.len()];
    let cloud = PointCloud::with_normals(points, normals)?;
    Ok(normalize_cloud(&cloud)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_counts_and_normals() {
        let c = make_shape(ShapeKind::Plane, 10).unwrap();
        assert_eq!(c.len(), 100);
        assert!(c.points().iter().all(|p| p.z.abs() < 1e-15));
        assert!(c.normals().unwrap().iter().all(|&n| n == Vec3::Z));
    }

    #[test]
    fn cube_has_six_axis_normals() {
        let c = make_shape(ShapeKind::Cube, 8).unwrap();
        assert_eq!(c.len(), 384);
        let mut distinct: Vec<[i64; 3]> = c
            .normals()
            .unwrap()
            .iter()
            .map(|n| [n.x as i64, n.y as i64, n.z as i64])
            .collect();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 6);
        for n in c.normals().unwrap() {
            assert_eq!(n.x.abs() + n.y.abs() + n.z.abs(), 1.0);
        }
    }

    #[test]
    fn cube_normals_point_outward() {
        let c = sample_shape(ShapeKind::Cube, 4).unwrap();
        let center = Vec3::new(0.5, 0.5, 0.5);
        for (p, n) in c.points().iter().zip(c.normals().unwrap()) {
            assert!((*p - center).dot(*n) > 0.49, "{p:?} {n:?}");
        }
    }

    #[test]
    fn icosahedron_normals_point_outward() {
        let c = sample_shape(ShapeKind::Icosahedron, 3).unwrap();
        assert_eq!(c.len(), 20 * 9);
        for (p, n) in c.points().iter().zip(c.normals().unwrap()) {
            assert!(p.dot(*n) > 0.0);
        }
    }

    #[test]
    fn wedge_has_two_faces() {
        let c = sample_shape(ShapeKind::Wedge, 5).unwrap();
        assert_eq!(c.len(), 50);
        let up = c.normals().unwrap().iter().filter(|&&n| n == Vec3::Z).count();
        assert_eq!(up, 25);
    }

    #[test]
    fn unknown_kind() {
        assert!(matches!("torus".parse::<ShapeKind>(), Err(Error::UnknownShape(_))));
        assert_eq!("sphere".parse::<ShapeKind>().unwrap(), ShapeKind::Sphere);
        assert!(make_shape(ShapeKind::Plane, 1).is_err());
    }

    #[test]
    fn sphere_points_are_radial() {
        let raw = sample_shape(ShapeKind::Sphere, 5).unwrap();
        let (norm, t) = normalize_cloud(&raw).unwrap();
        let back = t.invert_cloud(&norm);
        for (p, n) in back.points().iter().zip(back.normals().unwrap()) {
            assert!((p.norm() - 1.0).abs() < 1e-9);
            assert!((*p / p.norm() - *n).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_noise_is_identity_and_seed_is_deterministic() {
        let c = make_shape(ShapeKind::Cube, 4).unwrap();
        assert_eq!(add_gaussian_noise(&c, NoiseSpec { level: 0.0, seed: 1 }).unwrap(), c);
        let spec = NoiseSpec { level: 0.01, seed: 42 };
        let a = add_gaussian_noise(&c, spec).unwrap();
        let b = add_gaussian_noise(&c, spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.normals(), c.normals());
        let other = add_gaussian_noise(&c, NoiseSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn clustered_plane_basics() {
        assert!(make_clustered_plane(1, 10, 0).is_err());
        let a = make_clustered_plane(4, 50, 7).unwrap();
        assert_eq!(a.len(), 200);
        assert!(a.points().iter().all(|p| p.z == 0.0));
        assert_eq!(a, make_clustered_plane(4, 50, 7).unwrap());
    }
}
