//! Chamfer distance and k-neighbor mean square error against ground truth.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::index::NeighborIndex;

/// Neighbor count used by [`mean_square_error`] in reports.
pub const MSE_NEIGHBORS: usize = 10;

/// Normalization of the MSE sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MseVariant {
    /// Divide by the number of predicted points, `|S2|`.
    #[default]
    Described,
    /// Divide by the number of ground-truth points, `|S1|`.
    Printed,
}

impl std::str::FromStr for MseVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "described" => Ok(MseVariant::Described),
            "printed" => Ok(MseVariant::Printed),
            other => Err(Error::InvalidParameter(format!(
                "unknown MSE variant '{other}' (expected described|printed)"
            ))),
        }
    }
}

fn mean_nearest_squared(from: &[Vec3], to: &NeighborIndex) -> f64 {
    let d: Vec<f64> = from
        .par_iter()
        .map(|&p| to.nearest_to(p, 1, None)[0].distance_squared)
        .collect();
    d.iter().sum::<f64>() / from.len() as f64
}

/// Sum of the two directed mean squared nearest-neighbor distances.
pub fn chamfer_distance(s1: &[Vec3], s2: &[Vec3]) -> Result<f64> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let i1 = NeighborIndex::build(s1)?;
    let i2 = NeighborIndex::build(s2)?;
    Ok(mean_nearest_squared(s1, &i2) + mean_nearest_squared(s2, &i1))
}

/// Mean squared distance from each predicted point in `s2` to its `m`
/// nearest ground-truth points in `s1`.
pub fn mean_square_error(s1: &[Vec3], s2: &[Vec3], m: usize, variant: MseVariant) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("MSE neighbor count must be positive".into()));
    }
    if s2.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if s1.len() < m {
        return Err(Error::TooFewGroundTruthPoints {
            needed: m,
            got: s1.len(),
        });
    }
    let i1 = NeighborIndex::build(s1)?;
    let per_point: Vec<f64> = s2
        .par_iter()
        .map(|&y| i1.nearest_to(y, m, None).iter().map(|n| n.distance_squared).sum())
        .collect();
    let total: f64 = per_point.iter().sum();
    let count = match variant {
        MseVariant::Described => s2.len(),
        MseVariant::Printed => s1.len(),
    };
    Ok(total / (count as f64 * m as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub chamfer: f64,
    pub mse: f64,
    pub s1_count: usize,
    pub s2_count: usize,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "chamfer,mse,s1_count,s2_count";

    /// `s1` is ground truth, `s2` the filtered cloud.
    pub fn compute(s1: &[Vec3], s2: &[Vec3], variant: MseVariant) -> Result<Self> {
        Ok(Self {
            chamfer: chamfer_distance(s1, s2)?,
            mse: mean_square_error(s1, s2, MSE_NEIGHBORS, variant)?,
            s1_count: s1.len(),
            s2_count: s2.len(),
        })
    }

    /// `key=value` lines, each key prefixed with `prefix`.
    pub fn to_key_values(&self, prefix: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{prefix}chamfer={:e}", self.chamfer);
        let _ = writeln!(s, "{prefix}mse={:e}", self.mse);
        let _ = writeln!(s, "{prefix}s1_count={}", self.s1_count);
        let _ = writeln!(s, "{prefix}s2_count={}", self.s2_count);
        s
    }

    pub fn to_csv_row(&self) -> String {
        format!("{:e},{:e},{},{}", self.chamfer, self.mse, self.s1_count, self.s2_count)
    }
}
