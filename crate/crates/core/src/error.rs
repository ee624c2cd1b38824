use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scattering length not converged: a0 varies by {spread:.3e} across the outer region (tolerance {tolerance:.1e}); refine the grid")]
    GridTooCoarse { spread: f64, tolerance: f64 },

    #[error("no sign change of the Neumann mismatch on [0, {upper:.6e}]; cannot bracket the ground state eigenvalue")]
    Bracketing { upper: f64 },

    #[error("radial solution is not positive at r = {radius:.6e}; solver landed on an excited branch")]
    WrongBranch { radius: f64 },

    #[error("diagonalization failure at |p| = {p_abs:.6e}: |G/F| = {ratio:.6e} is not < 1")]
    Diagonalization { p_abs: f64, ratio: f64 },

    #[error("mode sets differ: {0}")]
    ModeMismatch(String),

    #[error("covariance matrix is singular (det = {det:.3e}); the Gaussian limit density requires an invertible covariance")]
    SingularCovariance { det: f64 },

    #[error("covariance matrix has a non-negligible imaginary part ({imag:.3e}); only characteristic-function data is available")]
    ComplexCovariance { imag: f64 },

    #[error("characteristic function has not decayed at |s| = {s_max:.3e} (|phi| = {value:.3e} > {tolerance:.1e})")]
    InsufficientRange { s_max: f64, value: f64, tolerance: f64 },

    #[error("weighted Fourier transform not integrable on the grid: tail value {tail:.3e} at |s| = {s_max:.3e}")]
    NonIntegrable { s_max: f64, tail: f64 },

    #[error("interval [{alpha}, {beta}] is outside the density grid [{lo}, {hi}]")]
    OutsideGrid { alpha: f64, beta: f64, lo: f64, hi: f64 },

    #[error("gridded densities are limited to dimension <= 3 (got {0})")]
    Dimension(usize),

    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("cache format: {0}")]
    Json(#[from] serde_json::Error),
}
