use bogoliubov_core::lattice::Momentum;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, FockError>;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("n_max = {n_max} exceeds N = {particles}; the truncated space must stay inside the sector with at most N excitations")]
    NmaxExceedsN { n_max: usize, particles: u64 },

    #[error("basis dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("mode {0} is not part of the basis")]
    UnknownMode(Momentum),

    #[error("function is supported on mode {0}, which is not part of the basis")]
    SupportViolation(Momentum),

    #[error("coefficients are not symmetric under p -> -p at mode {0}")]
    AsymmetricCoefficients(Momentum),

    #[error("mode set is not closed under negation (missing -{0})")]
    NotNegationClosed(Momentum),

    #[error("operator dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("operator fails its {tag} check: residual {residual:.3e}")]
    TagViolation { tag: &'static str, residual: f64 },

    #[error("matrix exponential did not converge (1-norm {norm:.3e}, {squarings} squarings)")]
    ExpmNonConvergence { norm: f64, squarings: u32 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
