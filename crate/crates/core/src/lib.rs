//! Statistical shape modelling and swarm-based fitting of triangulated
//! surfaces to binary segmentation masks.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! core: mesh and volume types, marching cubes, voxelization, the
//! point-distribution model, the hybrid global/local-best particle swarm,
//! evaluation metrics and synthetic data generation. File formats, thread
//! pools and the command-line tool live in the `shapefit` crate.
//!
//! A typical pipeline:
//!
//! 1. [`shape_model::ShapeModel::build`] from corresponded templates.
//! 2. [`fitter::fit`] the model to a [`volume::BinaryVolume`].
//! 3. [`metrics::evaluate`] the fitted surface against a reference mask.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so NaN is rejected along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod eigen;
pub mod fitter;
pub mod marching_cubes;
pub mod math;
pub mod mesh;
pub mod metrics;
pub mod pso;
pub mod shape_model;
pub mod synth;
pub mod volume;
pub mod voxelize;

pub use fitter::{dice_loss, fit, fit_with, FitError, FitResult};
pub use marching_cubes::marching_cubes;
pub use math::Vec3;
pub use mesh::{surface_gl, topology_report, vertex_gl, MeshError, MeshTopologyReport, TriMesh};

pub use metrics::{dsc, evaluate, hausdorff, EvaluationReport, MetricsError};
pub use pso::{optimize, Bounds, Evaluator, PsoError, Sequential, SwarmConfig};
pub use shape_model::{FitParams, PoseParams, ShapeModel, ShapeModelError, ShapeVector};
pub use synth::{make_target, make_templates, SynthConfig, SynthError};
pub use volume::{boundary_voxels, BinaryVolume, GridSpec, VolumeError};
pub use voxelize::{point_in_mesh, voxelize};
