use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point coordinate {axis} = {value} lies outside the sampling region [{low}, {high}]")]
    OutsideDomain {
        axis: usize,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("point has {got} coordinates, chart dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("metric is not positive definite at the point ({0})")]
    SingularMetric(String),

    #[error("differentiation order budget exceeded: need order {needed}, have {available}")]
    OrderBudget { needed: u8, available: u8 },

    #[error("valence mismatch: {0}")]
    ValenceMismatch(String),

    #[error("identity not applicable: {0}")]
    NotApplicable(String),

    #[error("{end} boundary condition violated: {detail}")]
    BoundaryCondition { end: String, detail: String },

    #[error("boundary fit inconclusive: {0}")]
    InconclusiveFit(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
