//! Refinement of reconstructed 3D line segments against the center cloud of a
//! Gaussian-splatting model, and evaluation of how well a segment set
//! represents that cloud.
//!
//! All geometry is generic over [`Scalar`] (`f32` or `f64`); the `*d`
//! aliases below fix it to `f64`, the `*f` aliases to `f32`.

pub mod error;
pub mod geom;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod scalar;
pub mod spatial_index;
pub mod synth;

pub use error::{Error, Result};
pub use geom::{Aabb, Cylinder, OverlapSemantics, Point3, Segment};
pub use metrics::{EvalConfig, EvalReport};
pub use io::RunConfig;
pub use pipeline::{PipelineConfig, RefineReport, Refinement, SegmentStats, SimilarityBranch};
pub use scalar::Scalar;
pub use spatial_index::{GaussianCloud, Octree};

pub type Point3d = Point3<f64>;
pub type Segmentd = Segment<f64>;
pub type Cylinderd = Cylinder<f64>;
pub type Aabbd = Aabb<f64>;
pub type GaussianCloudd = GaussianCloud<f64>;
pub type Octreed = Octree<f64>;
pub type PipelineConfigd = PipelineConfig<f64>;
pub type EvalConfigd = EvalConfig<f64>;
pub type EvalReportd = EvalReport<f64>;
pub type RunConfigd = RunConfig<f64>;

pub type Point3f = Point3<f32>;
pub type Segmentf = Segment<f32>;
pub type Cylinderf = Cylinder<f32>;
pub type GaussianCloudf = GaussianCloud<f32>;
pub type Octreef = Octree<f32>;
