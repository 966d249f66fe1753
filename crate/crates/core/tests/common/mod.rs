//! Exhaustive reference implementations and fixtures shared by the
//! integration tests. Nothing here goes through the kd-tree.
#![allow(dead_code)]

use pcfilter_core::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(seed: u64, n: usize) -> Vec<Vec3> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            Vec3::new(
                r.random_range(-1.0..1.0),
                r.random_range(-1.0..1.0),
                r.random_range(-1.0..1.0),
            )
        })
        .collect()
}

pub fn random_unit(r: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// All-pairs k-NN with (distance², index) ranking.
pub fn brute_knn(points: &[Vec3], query: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != query)
        .map(|(j, &p)| ((p - points[query]).norm_squared(), j))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|(_, j)| j).collect()
}

pub fn brute_chamfer(a: &[Vec3], b: &[Vec3]) -> f64 {
    let directed = |from: &[Vec3], to: &[Vec3]| {
        let mut total = 0.0;
        for &x in from {
            let mut best = f64::INFINITY;
            for &y in to {
                let d = (x.x - y.x).powi(2) + (x.y - y.y).powi(2) + (x.z - y.z).powi(2);
                best = best.min(d);
            }
            total += best;
        }
        total / from.len() as f64
    };
    directed(a, b) + directed(b, a)
}

pub fn brute_mse(s1: &[Vec3], s2: &[Vec3], m: usize) -> f64 {
    let mut total = 0.0;
    for &y in s2 {
        let mut d: Vec<f64> = s1
            .iter()
            .map(|&x| (x.x - y.x).powi(2) + (x.y - y.y).powi(2) + (x.z - y.z).powi(2))
            .collect();
        d.sort_by(f64::total_cmp);
        total += d[..m].iter().sum::<f64>();
    }
    total / (s2.len() as f64 * m as f64)
}

/// Data energy by explicit double loop: patches via brute-force k-NN.
pub fn brute_data_energy(points: &[Vec3], normals: &[Vec3], k: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..points.len() {
        for j in brute_knn(points, i, k) {
            let d = [
                points[i].x - points[j].x,
                points[i].y - points[j].y,
                points[i].z - points[j].z,
            ];
            let dot = |n: Vec3| d[0] * n.x + d[1] * n.y + d[2] * n.z;
            total += dot(normals[j]).powi(2) + dot(normals[i]).powi(2);
        }
    }
    total
}

/// Row-major 3×3 rotation from axis–angle (Rodrigues).
pub fn rotation(axis: Vec3, angle: f64) -> [[f64; 3]; 3] {
    let a = axis.try_normalize().unwrap();
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * a.x * a.x + c, t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y],
        [t * a.x * a.y + s * a.z, t * a.y * a.y + c, t * a.y * a.z - s * a.x],
        [t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c],
    ]
}

pub fn rotate(r: &[[f64; 3]; 3], v: Vec3) -> Vec3 {
    Vec3::new(
        r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
        r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
        r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
    )
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Angle in degrees between two unit vectors.
pub fn angle_deg(a: Vec3, b: Vec3) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos().to_degrees()
}
