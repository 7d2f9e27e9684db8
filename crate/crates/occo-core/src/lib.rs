//! Occlusion-completion pre-training for point clouds at desk scale.
//!
//! The pipeline: sample meshes into clouds, occlude them from random camera
//! views via Delaunay triangulation and z-buffering, pre-train a small
//! encoder-decoder completion network with Chamfer losses, then evaluate the
//! learned encoder with clustering, linear-probe, network-dissection, and
//! loss-landscape probes.

pub mod camera;
pub mod ckpt;
pub mod cloud;
pub mod dataset;
pub mod delaunay;
pub mod error;
pub mod io;
pub mod losses;
pub mod matrix;
pub mod net;
pub mod occlusion;
pub mod probe;
pub mod seed;
pub mod synth;
pub mod train;

pub use cloud::{Point3, PointCloud, TransformSpec, TriMesh};
pub use error::{Error, Result};
