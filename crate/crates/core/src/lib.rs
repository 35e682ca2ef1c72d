//! Lung deflation modeling toolkit.
//!
//! Provides the building blocks for modeling the inflated-to-deflated shape
//! change of a lung during thoracoscopic surgery:
//!
//! - [`mesh`] — triangle surface meshes, closest-point queries, discrete
//!   Laplacians, enclosed volume, displacement fields.
//! - [`metrics`] — mean distance, Hausdorff distance, target registration
//!   error, volume-change ratio.
//! - [`registration`] — landmark-constrained deformable mesh registration.
//! - [`kernel`] — per-region Gaussian kernel ridge regression that learns
//!   displacement fields from shape features, plus interior-point transport.
//! - [`synthetic`] — seed-deterministic generator of lung-like meshes with
//!   ground-truth deflation fields for benchmarking.
//! - [`pipeline`] — mesh I/O, rigid normalization, cross-validation, config
//!   and report handling.
//!
//! All geometry is double precision, coordinates in millimeters.

pub mod kernel;
pub mod mesh;
pub mod metrics;
pub mod pipeline;
pub mod registration;
pub mod synthetic;

pub use mesh::{DisplacementField, InteriorPointSet, Point3, SurfaceMesh, Vec3};
