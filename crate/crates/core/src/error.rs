use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter schema mismatch: expected {expected:?}, found {found:?}")]
    SchemaMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("parameter `{0}` is not finite")]
    NonFinite(String),

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("unknown family `{id}`; registered families: {registered}")]
    UnknownFamily { id: String, registered: String },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max |U^dagger U - I| = {0:.3e})")]
    NotUnitary(f64),

    #[error("basis is not orthonormal (max |V^dagger V - I| = {0:.3e})")]
    NotOrthonormal(f64),

    #[error("basis does not span a degenerate eigenspace (residual {0:.3e})")]
    NotEigenspace(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("overlap {overlap:.3e} is below the threshold {threshold:.1e}; the path discretization is too coarse")]
    NearOrthogonal { overlap: f64, threshold: f64 },

    #[error("selected eigenstate {index} is degenerate (cluster of size {size}); use the Wilczek-Zee connection")]
    Degenerate { index: usize, size: usize },

    #[error("degeneracy structure changed at step {step}: {detail}")]
    DegeneracyChange { step: usize, detail: String },

    #[error("gauge anchor component {component} vanishes at this point (|v| = {magnitude:.3e})")]
    GaugeSingular { component: usize, magnitude: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("path is not closed: {0}")]
    OpenPath(String),

    #[error("point {point:?} lies within {margin:.1e} of a singular locus of field `{field}`")]
    Singular {
        field: String,
        point: Vec<f64>,
        margin: f64,
    },

    #[error("norm drift {0:.3e} exceeds 1e-6; increase the step count")]
    NormDrift(f64),

    #[error("reference frame is not single-valued (closure mismatch {0:.3e})")]
    NotSingleValued(f64),

    #[error("radius {radius} lies outside the density support (max {max})")]
    OutsideSupport { radius: f64, max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
