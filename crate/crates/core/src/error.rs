use alloc::string::String;

/// Failures raised by geometric and variational computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("invalid surface descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("first fundamental form is degenerate at ({u}, {v})")]
    DegenerateMetric { u: f64, v: f64 },
    #[error("second fundamental form is degenerate at ({u}, {v})")]
    DegenerateSecondForm { u: f64, v: f64 },
    #[error("finite-difference stencil leaves the domain at ({u}, {v})")]
    Boundary { u: f64, v: f64 },
    #[error("jets of order {requested} requested, chart provides at most {available}")]
    UnsupportedOrder { requested: usize, available: usize },
    #[error("curvature function evaluated outside its domain at (H, K) = ({h}, {k})")]
    DomainGuard { h: f64, k: f64 },
    #[error("vector field is tangent to the surface at ({u}, {v})")]
    NotTransversal { u: f64, v: f64 },
    #[error("Gaussian curvature vanishes at ({u}, {v})")]
    VanishingGaussCurvature { u: f64, v: f64 },
    #[error("Gauss map inversion did not converge (best residual {residual:e})")]
    Inversion { residual: f64 },
    #[error("surface is not strictly convex at ({u}, {v}): H = {h}, K = {k}")]
    NotConvex { u: f64, v: f64, h: f64, k: f64 },
    #[error("deformation parameter t = {t} degenerates the surface; try |t| <= {suggested:e}")]
    StepTooLarge { t: f64, suggested: f64 },
    #[error("non-finite value encountered at ({u}, {v})")]
    NonFinite { u: f64, v: f64 },
}

pub type Result<T> = core::result::Result<T, GeomError>;
