use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unsupported Gauss rule with {0} points (supported: 1..=10)")]
    UnsupportedQuadrature(usize),

    #[error("cell index {index} out of range for mesh with {cells} cells")]
    CellOutOfRange { index: usize, cells: usize },

    #[error("invalid flux parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported polynomial degree {0} for the coercivity threshold (supported: 1, 2)")]
    UnsupportedDegree(usize),

    #[error("weight exponent out of range in cell {cell}: |q psi| = {value:.3e} exceeds {limit}")]
    WeightOverflow { cell: usize, value: f64, limit: f64 },

    #[error("singular {what} in cell {cell}")]
    SingularLocalSystem { what: &'static str, cell: usize },

    #[error("Poisson problem has no Dirichlet boundary and no zero-mean gauge")]
    NoDirichletBoundary,

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("Poisson solve broke down: relative residual {residual:.3e}")]
    SolverBreakdown { residual: f64 },

    #[error("test interval corrupted in cell {cell} (axis {axis}, line {line}): a = {a}, b = {b}")]
    TestIntervalOrdering { cell: usize, axis: usize, line: usize, a: f64, b: f64 },

    #[error(
        "inadmissible cell {cell} (axis {axis}, line {line}): |gamma| <= {cap} leaves no point in ({a}, {b})"
    )]
    InadmissibleCell { cell: usize, axis: usize, line: usize, a: f64, b: f64, cap: f64 },

    #[error("nonpositive decomposition weight {weight:e} for gamma = {gamma} outside ({a}, {b})")]
    NonPositiveWeight { gamma: f64, a: f64, b: f64, weight: f64 },

    #[error("positivity lost: species {species} has weighted cell average {value:e} in cell {cell}")]
    NonPositiveAverage { species: usize, cell: usize, value: f64 },

    #[error("mesh ratio {mu:.6e} exceeds the positivity bound {mu0:.6e}")]
    CflViolation { mu: f64, mu0: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

impl Error {
    /// Failures that mean the discrete solution can no longer be trusted
    /// to stay positive, as opposed to bad input.
    pub fn is_numerical_fatal(&self) -> bool {
        matches!(
            self,
            Error::NonPositiveAverage { .. }
                | Error::InadmissibleCell { .. }
                | Error::TestIntervalOrdering { .. }
                | Error::NonPositiveWeight { .. }
                | Error::WeightOverflow { .. }
                | Error::CflViolation { .. }
                | Error::SolverBreakdown { .. }
                | Error::SingularLocalSystem { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
