//! File formats, parallel fitness evaluation and the command-line front end
//! for [`shapefit_core`].
//!
//! - [`ply`]: ASCII PLY triangle meshes.
//! - [`metaimage`]: `.mhd`/`.raw` binary masks.
//! - [`model_io`]: shape models as JSON.
//! - [`parallel`]: a rayon-backed [`shapefit_core::Evaluator`].
//! - [`cli`]: the `shapefit` binary's subcommands.

pub mod cli;
pub mod error;
pub mod json;
pub mod manifest;
pub mod metaimage;
pub mod model_io;
pub mod parallel;
pub mod ply;
pub mod report;

pub use error::Error;
