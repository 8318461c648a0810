use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BfError {
    #[error("kappa = {kappa} is within the guard of the singular value 1/2")]
    SingularKappa { kappa: f64 },
    #[error("kappa = {kappa} is within the guard of the resonant value 1/{order}")]
    ResonantKappa { kappa: f64, order: u64 },
    #[error("kappa = {kappa} is not in the unstable region")]
    NotUnstable { kappa: f64 },
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("near-zero quadruple is not separated (gap ratio {ratio:.3} < {required})")]
    GapFailure { ratio: f64, required: f64 },
    #[error("eigenvalue {modulus:.3e} lies within 10% of the contour radius {radius:.3e}")]
    ContourTooTight { modulus: f64, radius: f64 },
    #[error("projector has numerical rank {rank}, expected {expected}")]
    RankFailure { rank: usize, expected: usize },
    #[error("structure violation at entries {entries:?}")]
    StructureViolation { entries: Vec<(usize, usize)> },
    #[error("G11 = {value:.3e} is too small for the first decoupling step")]
    DegenerateG { value: f64 },
    #[error("Sylvester system is singular (det = {det:.3e})")]
    SingularSystem { det: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, BfError>;
