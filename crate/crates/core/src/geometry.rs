//! Vectors, point clouds and the ingest normalization transform.

use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Tolerance on `|‖n‖ − 1|` for a stored normal.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// A 3-vector used for both positions and normals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance_squared(self, other: Vec3) -> f64 {
        (self - other).norm_squared()
    }

    #[inline]
    pub fn distance(self, other: Vec3) -> f64 {
        self.distance_squared(other).sqrt()
    }

    /// Unit vector in the same direction, or `None` for a zero or non-finite vector.
    pub fn try_normalize(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    /// Component of `self` orthogonal to the unit vector `n`.
    #[inline]
    pub fn reject_from(self, n: Vec3) -> Vec3 {
        self - n * self.dot(n)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component_min(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x.min(other.x), self.y.min(other.y), self.z.min(other.z))
    }

    pub fn component_max(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x.max(other.x), self.y.max(other.y), self.z.max(other.z))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;

    fn index(&self, axis: usize) -> &f64 {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis {axis} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Axis-aligned bounding box diagonal length. Zero for an empty slice.
pub fn bbox_diagonal(points: &[Vec3]) -> f64 {
    let Some(&first) = points.first() else {
        return 0.0;
    };
    let (lo, hi) = points.iter().fold((first, first), |(lo, hi), &p| {
        (lo.component_min(p), hi.component_max(p))
    });
    (hi - lo).norm()
}

pub fn centroid(points: &[Vec3]) -> Vec3 {
    let sum = points.iter().fold(Vec3::ZERO, |acc, &p| acc + p);
    sum / points.len() as f64
}

/// Positions with an optional parallel sequence of unit normals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Vec3>,
    normals: Option<Vec<Vec3>>,
}

impl PointCloud {
    /// Positions only.
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        check_finite(&points)?;
        Ok(Self { points, normals: None })
    }

    /// Positions and normals. Normals must already be unit length.
    pub fn with_normals(points: Vec<Vec3>, normals: Vec<Vec3>) -> Result<Self> {
        check_finite(&points)?;
        check_normals(points.len(), &normals)?;
        Ok(Self {
            points,
            normals: Some(normals),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vec3]> {
        self.normals.as_deref()
    }

    pub fn into_parts(self) -> (Vec<Vec3>, Option<Vec<Vec3>>) {
        (self.points, self.normals)
    }

    /// Replace the normals, keeping positions.
    pub fn set_normals(&mut self, normals: Vec<Vec3>) -> Result<()> {
        check_normals(self.points.len(), &normals)?;
        self.normals = Some(normals);
        Ok(())
    }

    pub fn clear_normals(&mut self) {
        self.normals = None;
    }

    /// Replace positions, keeping normals.
    pub fn with_points(&self, points: Vec<Vec3>) -> Result<Self> {
        check_finite(&points)?;
        if points.len() != self.points.len() {
            return Err(Error::LengthMismatch {
                points: points.len(),
                normals: self.points.len(),
            });
        }
        Ok(Self {
            points,
            normals: self.normals.clone(),
        })
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.points)
    }
}

fn check_finite(points: &[Vec3]) -> Result<()> {
    match points.iter().position(|p| !p.is_finite()) {
        Some(index) => Err(Error::InvalidCoordinate { index }),
        None => Ok(()),
    }
}

fn check_normals(len: usize, normals: &[Vec3]) -> Result<()> {
    if normals.len() != len {
        return Err(Error::LengthMismatch {
            points: len,
            normals: normals.len(),
        });
    }
    for (index, n) in normals.iter().enumerate() {
        if !n.is_finite() {
            return Err(Error::InvalidCoordinate { index });
        }
        let norm = n.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNormal { index });
        }
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "normal at index {index} is not unit length (norm {norm})"
            )));
        }
    }
    Ok(())
}

/// Map `p ↦ (p + translation) · scale` applied at ingest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudTransform {
    pub translation: Vec3,
    pub scale: f64,
}

impl CloudTransform {
    pub const IDENTITY: CloudTransform = CloudTransform {
        translation: Vec3::ZERO,
        scale: 1.0,
    };

    #[inline]
    pub fn apply(&self, p: Vec3) -> Vec3 {
        (p + self.translation) * self.scale
    }

    #[inline]
    pub fn invert(&self, q: Vec3) -> Vec3 {
        q / self.scale - self.translation
    }

    pub fn apply_cloud(&self, cloud: &PointCloud) -> PointCloud {
        PointCloud {
            points: cloud.points.iter().map(|&p| self.apply(p)).collect(),
            normals: cloud.normals.clone(),
        }
    }

    pub fn invert_cloud(&self, cloud: &PointCloud) -> PointCloud {
        PointCloud {
            points: cloud.points.iter().map(|&q| self.invert(q)).collect(),
            normals: cloud.normals.clone(),
        }
    }
}

/// Move the centroid to the origin and scale the bounding-box diagonal to 1.
///
/// Normals are carried over untouched since the map is a translation plus a
/// positive uniform scale.
pub fn normalize_cloud(cloud: &PointCloud) -> Result<(PointCloud, CloudTransform)> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let diagonal = cloud.bbox_diagonal();
    if diagonal <= 0.0 || !diagonal.is_finite() {
        return Err(Error::DegenerateExtent);
    }
    let transform = CloudTransform {
        translation: -centroid(&cloud.points),
        scale: 1.0 / diagonal,
    };
    Ok((transform.apply_cloud(cloud), transform))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_point_normalization() {
        let cloud = PointCloud::new(vec![Vec3::ZERO, Vec3::new(2.0, 0.0, 0.0)]).unwrap();
        let (out, t) = normalize_cloud(&cloud).unwrap();
        assert_eq!(out.points()[0], Vec3::new(-0.5, 0.0, 0.0));
        assert_eq!(out.points()[1], Vec3::new(0.5, 0.0, 0.0));
        assert_eq!(t.scale, 0.5);
    }

    #[test]
    fn normalized_cloud_has_identity_transform() {
        let cloud = PointCloud::new(vec![Vec3::new(-0.5, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0)]).unwrap();
        let (_, t) = normalize_cloud(&cloud).unwrap();
        assert_abs_diff_eq!(t.scale, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.translation.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        let cloud = PointCloud::new(vec![p, p, p]).unwrap();
        assert!(matches!(normalize_cloud(&cloud), Err(Error::DegenerateExtent)));
        assert!(matches!(
            normalize_cloud(&PointCloud::default()),
            Err(Error::EmptyCloud)
        ));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            PointCloud::new(vec![Vec3::ZERO, Vec3::new(f64::NAN, 0.0, 0.0)]),
            Err(Error::InvalidCoordinate { index: 1 })
        ));
        assert!(matches!(
            PointCloud::with_normals(vec![Vec3::ZERO], vec![]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            PointCloud::with_normals(vec![Vec3::ZERO], vec![Vec3::ZERO]),
            Err(Error::ZeroNormal { index: 0 })
        ));
        assert!(PointCloud::with_normals(vec![Vec3::ZERO], vec![Vec3::new(0.0, 0.0, 2.0)]).is_err());
    }

    #[test]
    fn normals_untouched_by_normalization() {
        let n = vec![Vec3::Z, Vec3::X];
        let cloud = PointCloud::with_normals(vec![Vec3::ZERO, Vec3::new(3.0, 4.0, 0.0)], n.clone()).unwrap();
        let (out, _) = normalize_cloud(&cloud).unwrap();
        assert_eq!(out.normals().unwrap(), &n[..]);
    }

    #[test]
    fn reject_removes_normal_component() {
        let v = Vec3::new(1.0, 0.0, 1.0);
        assert_eq!(v.reject_from(Vec3::Z), Vec3::new(1.0, 0.0, 0.0));
    }
}
