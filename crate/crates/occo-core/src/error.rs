use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("face index {index} out of range (vertex count {nverts})")]
    IndexOutOfRange { index: usize, nverts: usize },
    #[error("face with {0} vertices is not a triangle")]
    NonTriangleFace(usize),
    #[error("PLY vertex element missing coordinate property '{0}'")]
    MissingCoordinateProperty(String),
    #[error("mesh has zero total surface area")]
    DegenerateMesh,
    #[error("empty point cloud passed to {0}")]
    EmptyCloud(&'static str),
    #[error("non-positive camera depth {depth} at point {index}; increase the view standoff")]
    NonPositiveDepth { index: usize, depth: f64 },
    #[error("camera intrinsics are singular (f = 0)")]
    SingularIntrinsics,
    #[error("all points occluded from this view; eps_depth is likely pathological")]
    AllOccluded,
    #[error("point sets have different sizes: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("exact assignment limited to {max} points, got {got}")]
    TooLarge { got: usize, max: usize },
    #[error("forward cache does not match the sample/params it is used with: {0}")]
    StaleCache(String),
    #[error("checkpoint incompatible: {0}")]
    DimsMismatch(String),
    #[error("gradient/parameter shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite loss at step {step} (value {value})")]
    NonFiniteLoss { step: u64, value: f64 },
    #[error("resume config differs from checkpoint config ({0})")]
    ConfigMismatch(String),
    #[error("k-means needs at least {k} items, got {got}")]
    TooFewItems { k: usize, got: usize },
    #[error("clusterings label different item counts: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("linear probe needs at least 2 classes in the training labels")]
    SingleClass,
    #[error("mask length {got} does not match object point count {expected}")]
    MaskLengthMismatch { got: usize, expected: usize },
    #[error("every input object was skipped; nothing to write")]
    AllObjectsSkipped,
    #[error("{0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
