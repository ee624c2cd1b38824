//! Per-mode Bogoliubov coefficients built from the Neumann solution.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::{ModeSet, Momentum};
use crate::scattering::ScatteringSolution;
use crate::{Error, Result};

/// `η_p = -ŵ_ℓ(|p|/N) / N²`.
pub fn eta(sol: &ScatteringSolution, particles: u64, p: Momentum) -> f64 {
    let n = particles as f64;
    -sol.w_hat(p.p_abs() / n) / (n * n)
}

/// `μ_p = ¼ log(p² / (p² + 16π a0))`.
pub fn mu(a0: f64, p: Momentum) -> f64 {
    mu_from_p_sq(a0, p.p_sq())
}

fn mu_from_p_sq(a0: f64, p_sq: f64) -> f64 {
    -0.25 * (16.0 * PI * a0 / p_sq).ln_1p()
}

/// `(F_p, G_p)` from `|p|²`, the transform `(V f_ℓ)^(|p|/N)` and `η_p`.
///
/// `F = p²(σ² + γ²) + V̂(σ + γ)²`, `G = 2p²σγ + V̂(σ + γ)²` with
/// `σ = sinh η`, `γ = cosh η`.
pub fn f_g_from(p_sq: f64, vf: f64, eta: f64) -> Result<(f64, f64)> {
    let e2 = (2.0 * eta).exp();
    let f = p_sq * (2.0 * eta).cosh() + vf * e2;
    let g = p_sq * (2.0 * eta).sinh() + vf * e2;
    if !(f > 0.0) {
        return Err(Error::InvalidInput(format!(
            "F = {f:.6e} is not positive at |p|^2 = {p_sq:.6e}"
        )));
    }
    Ok((f, g))
}

pub fn f_g(sol: &ScatteringSolution, particles: u64, p: Momentum, eta: f64) -> Result<(f64, f64)> {
    f_g_from(p.p_sq(), sol.vf_hat(p.p_abs() / particles as f64), eta)
}

/// `τ = ½ atanh(-G/F)` on the principal branch.
pub fn tau(f: f64, g: f64) -> Result<f64> {
    let ratio = -g / f;
    if !(ratio.abs() < 1.0) {
        return Err(Error::Diagonalization {
            p_abs: f64::NAN,
            ratio: ratio.abs(),
        });
    }
    Ok(0.5 * ratio.atanh())
}

/// `¼ log(p² / (p² + 2 (V f_ℓ)^(|p|/N)))`.
pub fn eta_plus_tau_closed(sol: &ScatteringSolution, particles: u64, p: Momentum) -> f64 {
    closed_from(p.p_sq(), sol.vf_hat(p.p_abs() / particles as f64))
}

fn closed_from(p_sq: f64, vf: f64) -> f64 {
    -0.25 * (2.0 * vf / p_sq).ln_1p()
}

/// All coefficients of one mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub n: [i32; 3],
    pub p_abs: f64,
    pub eta: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub f: f64,
    pub g: f64,
    pub tau: f64,
    pub mu: f64,
    pub eta_plus_tau_closed: f64,
}

impl CoefficientRow {
    fn compute(p_sq: f64, w_hat: f64, vf: f64, a0: f64, particles: u64) -> Result<Self> {
        let n = particles as f64;
        let eta = -w_hat / (n * n);
        let (f, g) = f_g_from(p_sq, vf, eta)?;
        let tau = tau(f, g).map_err(|e| match e {
            Error::Diagonalization { ratio, .. } => Error::Diagonalization {
                p_abs: p_sq.sqrt(),
                ratio,
            },
            other => other,
        })?;
        Ok(Self {
            n: [0; 3],
            p_abs: p_sq.sqrt(),
            eta,
            sigma: eta.sinh(),
            gamma: eta.cosh(),
            f,
            g,
            tau,
            mu: mu_from_p_sq(a0, p_sq),
            eta_plus_tau_closed: closed_from(p_sq, vf),
        })
    }
}

/// Maximum of a per-mode quantity within one dyadic shell `|p| ∈ [2^j, 2^{j+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellStat {
    pub j: i32,
    pub modes: usize,
    pub max: f64,
}

/// Ratio between the largest and smallest shell maxima.
pub fn shell_spread(stats: &[ShellStat]) -> f64 {
    let hi = stats.iter().map(|s| s.max).fold(f64::NEG_INFINITY, f64::max);
    let lo = stats.iter().map(|s| s.max).fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Coefficient table over a [`ModeSet`], in mode order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeCoefficients {
    pub particles: u64,
    pub rows: Vec<CoefficientRow>,
}

impl ModeCoefficients {
    /// Evaluates every mode; transforms are computed once per distinct `|n|²`
    /// and in parallel.
    pub fn compute(sol: &ScatteringSolution, modes: &ModeSet) -> Result<Self> {
        let particles = modes.particles();
        let n = particles as f64;
        let mut shells: Vec<i64> = modes.modes().iter().map(|m| m.n_sq()).collect();
        shells.sort_unstable();
        shells.dedup();
        let by_shell: BTreeMap<i64, CoefficientRow> = shells
            .par_iter()
            .map(|&q| {
                let p_sq = 4.0 * PI * PI * q as f64;
                let k = p_sq.sqrt() / n;
                let row = CoefficientRow::compute(p_sq, sol.w_hat(k), sol.vf_hat(k), sol.a0, particles)?;
                Ok((q, row))
            })
            .collect::<Result<_>>()?;
        let rows = modes
            .modes()
            .iter()
            .map(|m| CoefficientRow {
                n: m.n(),
                ..by_shell[&m.n_sq()]
            })
            .collect();
        Ok(Self { particles, rows })
    }

    pub fn rows(&self) -> &[CoefficientRow] {
        &self.rows
    }

    pub fn etas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.eta).collect()
    }

    pub fn mus(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mu).collect()
    }

    pub fn eta_plus_taus(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.eta + r.tau).collect()
    }

    /// `max_p |η_p + τ_p − μ_p|`.
    pub fn max_eta_tau_mu_gap(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.eta + r.tau - r.mu).abs())
            .fold(0.0, f64::max)
    }

    /// `max_p |closed form − (η_p + τ_p)|`.
    pub fn max_closed_form_gap(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.eta_plus_tau_closed - (r.eta + r.tau)).abs())
            .fold(0.0, f64::max)
    }

    /// Shell maxima of `quantity(row)`.
    pub fn shell_max(&self, modes: &ModeSet, quantity: impl Fn(&CoefficientRow) -> f64) -> Vec<ShellStat> {
        modes
            .dyadic_shells()
            .into_iter()
            .map(|(j, idx)| ShellStat {
                j,
                modes: idx.len(),
                max: idx.iter().map(|&i| quantity(&self.rows[i])).fold(0.0, f64::max),
            })
            .collect()
    }

    /// CSV with columns `n1,n2,n3,|p|,eta,tau,mu,F,G` in 17-digit scientific notation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n1,n2,n3,p_abs,eta,tau,mu,F,G\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.n[0], r.n[1], r.n[2], r.p_abs, r.eta, r.tau, r.mu, r.f, r.g
            );
        }
        out
    }
}
