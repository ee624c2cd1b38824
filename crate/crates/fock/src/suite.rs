//! The full verification suite over configurable mode sets and sweeps.

use bogoliubov_core::lattice::Momentum;
use bogoliubov_core::observables::NuVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::FockBasis;
use crate::checks::{
    check_ccr, check_excited_cf, check_vacuum_cf, check_weyl_relation, fit_commutator, fit_cubic_conjugation, fit_dp,
    fit_tnt, fit_weyl_growth, s_samples, synthetic_eta, triad, BoundReport, ExcitedForm, FitSettings, IdentityReport,
    Status, TriadSettings,
};
use crate::ops::{bogoliubov, residual_d};
use crate::state::FockVector;
use crate::{FockError, Result};

/// Parameters of [`run_suite`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
    /// Particle numbers of the bound sweeps.
    pub particle_sweep: Vec<u64>,
    pub max_drift: f64,
    /// Synthetic coefficients `η_p = −eta_scale / |n|²`.
    pub eta_scale: f64,
    /// `p` of the pair basis `{p, −p}`.
    pub pair_mode: Momentum,
    pub triad_low: Momentum,
    pub triad_high: Momentum,
    pub triad_n_max: usize,
    pub algebra_n_max: usize,
    pub algebra_particles: u64,
    pub weyl_n_max: usize,
    pub cf_n_max: usize,
    pub cf_particles: u64,
    pub cf_rings: usize,
    pub cf_angles: usize,
    pub dimension_cap: usize,
    pub algebra_tolerance: f64,
    pub weyl_tolerance: f64,
    pub cf_tolerance: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let m = |n| Momentum::new(n).expect("nonzero");
        Self {
            seed: 1,
            samples: 200,
            particle_sweep: vec![10, 20, 40, 80],
            max_drift: 2.0,
            eta_scale: 0.5,
            pair_mode: m([1, 0, 0]),
            triad_low: m([1, 0, 0]),
            triad_high: m([0, 2, 0]),
            triad_n_max: 4,
            algebra_n_max: 16,
            algebra_particles: 40,
            weyl_n_max: 30,
            cf_n_max: 20,
            cf_particles: 40,
            cf_rings: 4,
            cf_angles: 12,
            dimension_cap: crate::basis::DEFAULT_DIMENSION_CAP,
            algebra_tolerance: 1e-12,
            weyl_tolerance: 1e-8,
            cf_tolerance: 1e-6,
        }
    }
}

impl SuiteConfig {
    /// Rejects configurations whose bases cannot be built.
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(FockError::InvalidInput("samples must be positive".into()));
        }
        if self.particle_sweep.len() < 2 {
            return Err(FockError::InvalidInput("particle_sweep needs at least two values".into()));
        }
        for (n_max, particles) in [
            (self.algebra_n_max, self.algebra_particles),
            (self.cf_n_max, self.cf_particles),
        ] {
            if n_max as u64 > particles {
                return Err(FockError::NmaxExceedsN { n_max, particles });
            }
        }
        for &n in &self.particle_sweep {
            if self.triad_n_max as u64 > n {
                return Err(FockError::NmaxExceedsN {
                    n_max: self.triad_n_max,
                    particles: n,
                });
            }
        }
        if self.cf_n_max < 5 || self.weyl_n_max < 4 {
            return Err(FockError::InvalidInput("cf_n_max must be at least 5 and weyl_n_max at least 4".into()));
        }
        triad(self.triad_low, self.triad_high)?;
        Ok(())
    }

    fn fit(&self) -> FitSettings {
        FitSettings {
            seed: self.seed,
            samples: self.samples,
            sweep: self.particle_sweep.clone(),
            max_drift: self.max_drift,
            dimension_cap: self.dimension_cap,
        }
    }

    fn triad_settings(&self) -> TriadSettings {
        TriadSettings {
            low: self.triad_low,
            high: self.triad_high,
            n_max: self.triad_n_max,
            eta_scale: self.eta_scale,
        }
    }
}

/// Everything the suite computed, in a fixed order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub samples: usize,
    pub identities: Vec<IdentityReport>,
    pub bounds: Vec<BoundReport>,
    pub passed: bool,
}

fn nu(modes: &[Momentum], values: &[Complex64]) -> Result<NuVector> {
    NuVector::new(modes.to_vec(), values.to_vec()).map_err(|e| FockError::InvalidInput(e.to_string()))
}

/// `‖d_p Ω‖` computed as a matrix product and from the vacuum column of `d_p`.
pub fn check_residual_vacuum_column(basis: &FockBasis, p: Momentum, eta: &[f64], tolerance: f64) -> Result<IdentityReport> {
    let t = bogoliubov(basis, eta)?;
    let idx = basis.mode_index(p)?;
    let d = residual_d(basis, p, &t, eta[idx])?;
    let omega = FockVector::vacuum(basis).coeffs;
    let product = d.apply(&omega);
    let mut column = vec![Complex64::default(); basis.dim()];
    for (r, c, v) in d.entries() {
        if c == basis.vacuum_index() {
            column[r] += v;
        }
    }
    let deviation = product.iter().zip(&column).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(IdentityReport {
        name: "residual_vacuum_column".into(),
        statement: "d_p Ω as a matrix-vector product equals the vacuum column of d_p".into(),
        parameters: [
            ("n_max".to_string(), basis.n_max() as f64),
            ("particles".to_string(), basis.particles() as f64),
            ("eta".to_string(), eta[idx]),
        ]
        .into_iter()
        .collect(),
        deviation,
        tolerance,
        status: if deviation <= tolerance { Status::Pass } else { Status::Fail },
    })
}

/// Runs every identity and bound check.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let fit = cfg.fit();
    let pair = vec![cfg.pair_mode, cfg.pair_mode.negate()];
    let (triad_modes, _) = triad(cfg.triad_low, cfg.triad_high)?;
    let cap = cfg.dimension_cap;

    let algebra = FockBasis::build_with_cap(pair.clone(), cfg.algebra_n_max, cfg.algebra_particles, cap)?;
    let cf_basis = FockBasis::build_with_cap(pair.clone(), cfg.cf_n_max, cfg.cf_particles, cap)?;
    let weyl_basis = FockBasis::build_with_cap(pair.clone(), cfg.weyl_n_max, cfg.weyl_n_max as u64, cap)?;
    let single = FockBasis::build_with_cap(vec![cfg.pair_mode], cfg.cf_n_max, cfg.cf_particles, cap)?;
    let n_small = *cfg.particle_sweep.iter().min().expect("validated");
    let triad_basis = FockBasis::build_with_cap(triad_modes.clone(), cfg.triad_n_max, n_small, cap)?;

    let mut identities = Vec::new();
    for basis in [&algebra, &cf_basis, &weyl_basis, &triad_basis] {
        identities.push(check_ccr(basis, cfg.algebra_tolerance)?);
    }

    let i = Complex64::i();
    let c = |x: f64| Complex64::new(x, 0.0);
    let nu1 = nu(&pair, &[c(0.6), 0.3 * i])?;
    let nu2 = nu(&pair, &[c(0.2) - 0.4 * i, c(0.5)])?;
    identities.push(check_weyl_relation(&weyl_basis, &nu1, &nu2, cfg.weyl_n_max / 4, cfg.weyl_tolerance)?);

    let unit = vec![nu(&[cfg.pair_mode], &[c(1.0)])?];
    let s_unit = s_samples(&unit, cfg.cf_rings, cfg.cf_angles);
    identities.push(check_vacuum_cf(&single, &unit, &s_unit, cfg.cf_tolerance)?);
    let pair_nus = vec![nu1, nu2];
    let s_pair = s_samples(&pair_nus, cfg.cf_rings, cfg.cf_angles);
    identities.push(check_vacuum_cf(&cf_basis, &pair_nus, &s_pair, cfg.cf_tolerance)?);
    identities.push(check_excited_cf(&single, &unit, cfg.pair_mode, &s_unit, ExcitedForm::Minus, cfg.cf_tolerance)?);
    identities.push(check_excited_cf(
        &cf_basis,
        &pair_nus,
        cfg.pair_mode,
        &s_pair,
        ExcitedForm::Minus,
        cfg.cf_tolerance,
    )?);

    let pair_eta = synthetic_eta(&pair, cfg.eta_scale);
    identities.push(check_residual_vacuum_column(&algebra, cfg.pair_mode, &pair_eta, cfg.algebra_tolerance)?);

    let triad_cfg = cfg.triad_settings();
    let mut bounds = vec![
        fit_tnt(cfg.pair_mode, 1, cfg.eta_scale, &fit)?,
        fit_tnt(cfg.pair_mode, 2, cfg.eta_scale, &fit)?,
        fit_dp(cfg.pair_mode, cfg.eta_scale, &fit)?,
        fit_commutator(&triad_cfg, &fit)?,
    ];
    for kappa in [1.0, -1.0, 0.5, -0.5] {
        bounds.push(fit_cubic_conjugation(&triad_cfg, 1, kappa, &fit)?);
    }
    let h = [c(0.6), 0.8 * i];
    bounds.push(fit_weyl_growth(cfg.pair_mode, h, 1.0, 1, &fit)?);

    let passed = identities.iter().all(|r| r.status == Status::Pass) && bounds.iter().all(|b| b.status == Status::Pass);
    Ok(SuiteReport {
        seed: cfg.seed,
        samples: cfg.samples,
        identities,
        bounds,
        passed,
    })
}
