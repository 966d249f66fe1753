//! Exact k-nearest-neighbor search over an immutable position snapshot.
//!
//! A median-split kd-tree with small leaves. Neighbors are ranked by
//! `(squared distance, point index)` so equal distances resolve to the lower
//! index and results match an exhaustive scan exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

const LEAF_SIZE: usize = 8;

/// A neighbor returned by a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance_squared: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.distance_squared.sqrt()
    }

    fn rank(&self, other: &Self) -> Ordering {
        self.distance_squared
            .total_cmp(&other.distance_squared)
            .then(self.index.cmp(&other.index))
    }
}

// Max-heap on rank: the worst kept candidate sits at the top.
struct Candidate(Neighbor);

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank(&other.0)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct NeighborIndex {
    points: Vec<Vec3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl NeighborIndex {
    pub fn build(points: &[Vec3]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidCoordinate { index });
        }
        let mut index = Self {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        index.build_node(0, points.len());
        Ok(index)
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = self.widest_axis(start, end);
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let first = self.points[self.order[start]];
        let (lo, hi) = self.order[start..end]
            .iter()
            .map(|&i| self.points[i])
            .fold((first, first), |(lo, hi), p| (lo.component_min(p), hi.component_max(p)));
        let extent = hi - lo;
        if extent.x >= extent.y && extent.x >= extent.z {
            0
        } else if extent.y >= extent.z {
            1
        } else {
            2
        }
    }

    /// Number of points in the snapshot.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// The `k` nearest other points to point `query_idx`, nearest first.
    pub fn k_nearest(&self, query_idx: usize, k: usize) -> Result<Vec<usize>> {
        Ok(self
            .k_nearest_with_distances(query_idx, k)?
            .into_iter()
            .map(|n| n.index)
            .collect())
    }

    pub fn k_nearest_with_distances(&self, query_idx: usize, k: usize) -> Result<Vec<Neighbor>> {
        self.check_k(k)?;
        if query_idx >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: query_idx,
                points: self.len(),
            });
        }
        Ok(self.nearest_to(self.points[query_idx], k, Some(query_idx)))
    }

    /// Self-excluding k-NN lists for every point, computed in parallel.
    pub fn all_k_nearest(&self, k: usize) -> Result<Vec<Vec<Neighbor>>> {
        self.check_k(k)?;
        Ok((0..self.len())
            .into_par_iter()
            .map(|i| self.nearest_to(self.points[i], k, Some(i)))
            .collect())
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if k >= self.len() {
            return Err(Error::KExceedsCloudSize { k, points: self.len() });
        }
        Ok(())
    }

    /// Up to `k` nearest points to an arbitrary location, optionally skipping
    /// one index. Returns fewer than `k` only when the snapshot is too small.
    pub fn nearest_to(&self, query: Vec3, k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, exclude, &mut heap);
        let mut out: Vec<Neighbor> = heap.into_iter().map(|c| c.0).collect();
        out.sort_by(Neighbor::rank);
        out
    }

    fn search(&self, node: usize, query: Vec3, k: usize, exclude: Option<usize>, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &index in &self.order[start..end] {
                    if Some(index) == exclude {
                        continue;
                    }
                    let candidate = Neighbor {
                        index,
                        distance_squared: self.points[index].distance_squared(query),
                    };
                    if heap.len() < k {
                        heap.push(Candidate(candidate));
                    } else if let Some(worst) = heap.peek() {
                        if candidate.rank(&worst.0) == Ordering::Less {
                            heap.pop();
                            heap.push(Candidate(candidate));
                        }
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, k, exclude, heap);
                let gap = diff * diff;
                let full = heap.len() == k;
                // Equal gap is still explored: a tied distance may carry a lower index.
                if !full || heap.peek().is_some_and(|w| gap <= w.0.distance_squared) {
                    self.search(far, query, k, exclude, heap);
                }
            }
        }
    }
}
