//! Feature-preserving point cloud filtering with uniform point distribution.
//!
//! Normals are estimated by PCA, oriented, and smoothed with a bilateral
//! filter. Positions are then moved by a few Jacobi sweeps that combine an
//! edge-aware data term, which pulls points onto the tangent planes of their
//! neighbors, with a repulsion term that spreads points along the surface.
//!
//! ```no_run
//! use pcfilter_core::{pipeline, synth};
//!
//! let noisy = synth::add_gaussian_noise(
//!     &synth::make_shape(synth::ShapeKind::Cube, 8)?,
//!     synth::NoiseSpec { level: 0.005, seed: 1 },
//! )?;
//! let out = pipeline::process_cloud(&noisy, &pipeline::PipelineParams::default())?;
//! println!("{} points", out.cloud.len());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod error;
pub mod filtering;
pub mod geometry;
pub mod index;
pub mod io;
pub mod metrics;
pub mod normals;
pub mod pipeline;
pub mod radius;
pub mod synth;

pub use error::{Error, Result};
pub use filtering::{filter, filter_iteration, FilterParams, IterationDiagnostics, WeightVariant};
pub use geometry::{normalize_cloud, CloudTransform, PointCloud, Vec3};
pub use index::{Neighbor, NeighborIndex};
pub use metrics::{chamfer_distance, mean_square_error, MetricReport, MseVariant};
pub use normals::BilateralParams;
pub use radius::RadiusMode;
