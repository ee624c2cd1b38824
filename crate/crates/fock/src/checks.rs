//! Numerical certification of operator identities and bounds, with
//! serializable reports.

use std::collections::BTreeMap;

use bogoliubov_core::lattice::Momentum;
use bogoliubov_core::limitlaw::{covariance, limit_char_fn};
use bogoliubov_core::observables::NuVector;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::FockBasis;
use crate::expm::expm_action;
use crate::operator::{c, FockOperator};
use crate::ops::{
    annihilator, bogoliubov, cubic_a, dgamma, field_op, field_op_coeffs, modified_annihilator, number_function,
    residual_d, smeared_annihilator, Coverage, Partition,
};
use crate::state::{inner, norm, task_seed, FockVector, RandomStates};
use crate::{FockError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The residual is above tolerance but still changes with the truncation.
    Inconclusive,
}

/// Residual of an identity that should hold to a fixed tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub statement: String,
    pub parameters: BTreeMap<String, f64>,
    pub deviation: f64,
    pub tolerance: f64,
    pub status: Status,
}

/// Fitted constant for one value of `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundFit {
    pub particles: u64,
    pub n_max: usize,
    pub dim: usize,
    pub constant: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Constants of an inequality fitted across an `N` sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub statement: String,
    pub modes: Vec<Momentum>,
    pub parameters: BTreeMap<String, f64>,
    pub fits: Vec<BoundFit>,
    /// `max C / min C` over the sweep.
    pub drift: f64,
    pub max_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<Coverage>,
    pub status: Status,
}

impl BoundReport {
    fn new(
        name: &str,
        statement: &str,
        modes: Vec<Momentum>,
        parameters: BTreeMap<String, f64>,
        fits: Vec<BoundFit>,
        max_drift: f64,
        coverage: Option<Coverage>,
    ) -> Self {
        let hi = fits.iter().map(|f| f.constant).fold(f64::NEG_INFINITY, f64::max);
        let lo = fits.iter().map(|f| f.constant).fold(f64::INFINITY, f64::min);
        let drift = if fits.is_empty() { f64::NAN } else { hi / lo };
        let ok = fits.iter().all(|f| f.constant.is_finite() && f.constant > 0.0) && drift < max_drift;
        Self {
            name: name.into(),
            statement: statement.into(),
            modes,
            parameters,
            fits,
            drift,
            max_drift,
            coverage,
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }
}

fn params(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
    items.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Maximum of `ratio(ξ)` over `samples` random states drawn from `seed`.
fn fit_max(dim: usize, samples: usize, seed: u64, ratio: impl Fn(&[Complex64]) -> f64 + Sync) -> f64 {
    let mut rng = RandomStates::new(seed, dim);
    let states: Vec<Vec<Complex64>> = (0..samples).map(|_| rng.next_state()).collect();
    states.par_iter().map(|x| ratio(x)).reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Same as [`fit_max`] for functions of a pair of independent states.
fn fit_max_pairs(
    dim: usize,
    samples: usize,
    seed: u64,
    ratio: impl Fn(&[Complex64], &[Complex64]) -> f64 + Sync,
) -> f64 {
    let mut rng = RandomStates::new(seed, dim);
    let pairs: Vec<(Vec<Complex64>, Vec<Complex64>)> =
        (0..samples).map(|_| (rng.next_state(), rng.next_state())).collect();
    pairs.par_iter().map(|(a, b)| ratio(a, b)).reduce(|| f64::NEG_INFINITY, f64::max)
}

fn pow_number(basis: &FockBasis, f: impl Fn(f64) -> f64) -> FockOperator {
    number_function(basis, f)
}

/// Canonical and modified commutation relations on the states with total
/// occupation `≤ n_max − 1`.
pub fn check_ccr(basis: &FockBasis, tolerance: f64) -> Result<IdentityReport> {
    let cols = basis.margin_mask(1);
    let rows = vec![true; basis.dim()];
    let n = basis.particles() as f64;
    let id = FockOperator::identity(basis.dim());
    let number = pow_number(basis, |x| x);
    let mut worst: f64 = 0.0;
    for &p in basis.modes() {
        let a_p = annihilator(basis, p)?;
        let b_p = modified_annihilator(basis, p)?;
        for &q in basis.modes() {
            let a_q = annihilator(basis, q)?;
            let b_q = modified_annihilator(basis, q)?;
            let delta = if p == q { 1.0 } else { 0.0 };
            let canonical = a_p.commutator(&a_q.adjoint())?.sub(&id.scale_real(delta))?;
            worst = worst.max(canonical.max_abs_on(&rows, &cols));
            let expected = id
                .sub(&number.scale_real(1.0 / n))?
                .scale_real(delta)
                .sub(&a_q.adjoint().matmul(&a_p)?.scale_real(1.0 / n))?;
            let modified = b_p.commutator(&b_q.adjoint())?.sub(&expected)?;
            worst = worst.max(modified.max_abs_on(&rows, &cols));
            worst = worst.max(b_p.commutator(&b_q)?.max_abs_on(&rows, &cols));
        }
    }
    Ok(IdentityReport {
        name: "commutation_relations".into(),
        statement: "[a_p, a*_q] = δ_pq; [b_p, b*_q] = δ_pq (1 − N₊/N) − a*_q a_p / N; [b_p, b_q] = 0".into(),
        parameters: params(&[
            ("modes", basis.n_modes() as f64),
            ("n_max", basis.n_max() as f64),
            ("particles", n),
            ("margin", basis.n_max().saturating_sub(1) as f64),
        ]),
        deviation: worst,
        tolerance,
        status: if worst <= tolerance { Status::Pass } else { Status::Fail },
    })
}

fn add_vectors(f: &NuVector, g: &NuVector) -> Result<NuVector> {
    if f.modes != g.modes {
        return Err(FockError::InvalidInput("vectors live on different modes".into()));
    }
    NuVector::new(f.modes.clone(), f.values.iter().zip(&g.values).map(|(a, b)| a + b).collect())
        .map_err(|e| FockError::InvalidInput(e.to_string()))
}

/// Weyl relation applied to every basis state with total occupation `≤ margin`.
pub fn check_weyl_relation(
    basis: &FockBasis,
    f: &NuVector,
    g: &NuVector,
    margin: usize,
    tolerance: f64,
) -> Result<IdentityReport> {
    let phi_f = field_op(basis, f, false)?;
    let phi_g = field_op(basis, g, false)?;
    let phi_fg = field_op(basis, &add_vectors(f, g)?, false)?;
    let fg = f.inner(g).map_err(|e| FockError::InvalidInput(e.to_string()))?;
    let phase = Complex64::from_polar(1.0, -fg.im);
    let columns: Vec<usize> = (0..basis.dim()).filter(|&i| basis.total(i) <= margin).collect();
    let worst = columns
        .par_iter()
        .map(|&j| -> Result<f64> {
            let mut e = vec![Complex64::default(); basis.dim()];
            e[j] = c(1.0);
            let lhs = expm_action(&phi_f, Complex64::i(), &expm_action(&phi_g, Complex64::i(), &e)?)?;
            let rhs = expm_action(&phi_fg, Complex64::i(), &e)?;
            Ok(lhs
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a - phase * b).norm())
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(IdentityReport {
        name: "weyl_relation".into(),
        statement: "e^{iφ_a(f)} e^{iφ_a(g)} = e^{−i Im⟨f,g⟩} e^{iφ_a(f+g)}".into(),
        parameters: params(&[
            ("n_max", basis.n_max() as f64),
            ("margin", margin as f64),
            ("norm_f", f.norm()),
            ("norm_g", g.norm()),
            ("im_inner_fg", fg.im),
        ]),
        deviation: worst,
        tolerance,
        status: if worst <= tolerance { Status::Pass } else { Status::Fail },
    })
}

/// Which closed form the one-excitation characteristic function is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcitedForm {
    /// `exp(−½ sΣs)(1 − |Σ_j s_j ν_j(p)|²)`, the Fock-space value.
    Minus,
    /// `exp(−½ sΣs)(1 + |Σ_j s_j ν_j(p)|²)`.
    Plus,
}

/// `⟨ψ₀, Π_j e^{i s_j φ_a(ν_j)} ψ₀⟩` with `ψ₀ = Ω`, or `a*_p Ω` when `excited` is set.
pub fn numeric_char_fn(
    basis: &FockBasis,
    fields: &[FockOperator],
    s: &[f64],
    excited: Option<Momentum>,
) -> Result<Complex64> {
    let psi0 = match excited {
        None => FockVector::vacuum(basis).coeffs,
        Some(p) => {
            let cre = annihilator(basis, p)?.adjoint();
            cre.apply(&FockVector::vacuum(basis).coeffs)
        }
    };
    let mut psi = psi0.clone();
    for (phi, &sj) in fields.iter().zip(s).rev() {
        if sj != 0.0 {
            psi = expm_action(phi, Complex64::new(0.0, sj), &psi)?;
        }
    }
    Ok(inner(&psi0, &psi))
}

fn analytic_char_fn(nus: &[NuVector], s: &[f64], excited: Option<(Momentum, ExcitedForm)>) -> Result<Complex64> {
    let sigma = covariance(nus).map_err(|e| FockError::InvalidInput(e.to_string()))?;
    let base = limit_char_fn(&sigma, s);
    Ok(match excited {
        None => base,
        Some((p, form)) => {
            let amp: Complex64 = nus
                .iter()
                .zip(s)
                .map(|(nu, &sj)| nu.get(p).unwrap_or_default() * sj)
                .sum();
            let sign = match form {
                ExcitedForm::Minus => -1.0,
                ExcitedForm::Plus => 1.0,
            };
            base * (1.0 + sign * amp.norm_sqr())
        }
    })
}

fn max_cf_deviation(
    basis: &FockBasis,
    nus: &[NuVector],
    s_list: &[Vec<f64>],
    excited: Option<(Momentum, ExcitedForm)>,
) -> Result<f64> {
    let fields: Vec<FockOperator> = nus.iter().map(|nu| field_op(basis, nu, false)).collect::<Result<_>>()?;
    let devs = s_list
        .par_iter()
        .map(|s| -> Result<f64> {
            let num = numeric_char_fn(basis, &fields, s, excited.map(|e| e.0))?;
            Ok((num - analytic_char_fn(nus, s, excited)?).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

fn cf_report(
    name: &str,
    statement: &str,
    basis: &FockBasis,
    nus: &[NuVector],
    s_list: &[Vec<f64>],
    excited: Option<(Momentum, ExcitedForm)>,
    tolerance: f64,
) -> Result<IdentityReport> {
    let deviation = max_cf_deviation(basis, nus, s_list, excited)?;
    let coarse_n_max = basis.n_max().saturating_sub(4);
    let coarse = FockBasis::build(basis.modes().to_vec(), coarse_n_max, basis.particles())?;
    let coarse_dev = max_cf_deviation(&coarse, nus, s_list, excited)?;
    let status = if deviation <= tolerance {
        Status::Pass
    } else if (deviation - coarse_dev).abs() <= tolerance {
        Status::Fail
    } else {
        Status::Inconclusive
    };
    let s_max = s_list
        .iter()
        .map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok(IdentityReport {
        name: name.into(),
        statement: statement.into(),
        parameters: params(&[
            ("n_max", basis.n_max() as f64),
            ("coarse_n_max", coarse_n_max as f64),
            ("coarse_deviation", coarse_dev),
            ("particles", basis.particles() as f64),
            ("k", nus.len() as f64),
            ("s_samples", s_list.len() as f64),
            ("s_norm_max", s_max),
        ]),
        deviation,
        tolerance,
        status,
    })
}

/// Vacuum characteristic function of products of Weyl operators.
pub fn check_vacuum_cf(basis: &FockBasis, nus: &[NuVector], s_list: &[Vec<f64>], tolerance: f64) -> Result<IdentityReport> {
    cf_report(
        "vacuum_characteristic_function",
        "⟨Ω, Π_j e^{i s_j φ_a(ν_j)} Ω⟩ = exp(−½ Σ_lj s_l s_j Σ_lj)",
        basis,
        nus,
        s_list,
        None,
        tolerance,
    )
}

/// One-excitation characteristic function against the chosen closed form.
pub fn check_excited_cf(
    basis: &FockBasis,
    nus: &[NuVector],
    p: Momentum,
    s_list: &[Vec<f64>],
    form: ExcitedForm,
    tolerance: f64,
) -> Result<IdentityReport> {
    basis.mode_index(p)?;
    let statement = match form {
        ExcitedForm::Minus => "⟨a*_p Ω, Π_j e^{i s_j φ_a(ν_j)} a*_p Ω⟩ = exp(−½ sΣs)(1 − |Σ_j s_j ν_j(p)|²)",
        ExcitedForm::Plus => "⟨a*_p Ω, Π_j e^{i s_j φ_a(ν_j)} a*_p Ω⟩ = exp(−½ sΣs)(1 + |Σ_j s_j ν_j(p)|²)",
    };
    let name = match form {
        ExcitedForm::Minus => "excited_characteristic_function",
        ExcitedForm::Plus => "excited_characteristic_function_plus_form",
    };
    cf_report(name, statement, basis, nus, s_list, Some((p, form)), tolerance)
}

/// Points `s` on concentric circles with `‖s‖ max_j ‖ν_j‖ ≤ 1` (k = 1: a symmetric segment).
pub fn s_samples(nus: &[NuVector], rings: usize, angles: usize) -> Vec<Vec<f64>> {
    let k = nus.len();
    let scale = 1.0 / nus.iter().map(|n| n.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let mut out = vec![vec![0.0; k]];
    for r in 1..=rings {
        let radius = scale * r as f64 / rings as f64;
        match k {
            1 => {
                out.push(vec![radius]);
                out.push(vec![-radius]);
            }
            _ => {
                for a in 0..angles {
                    let th = 2.0 * std::f64::consts::PI * a as f64 / angles as f64;
                    let mut s = vec![0.0; k];
                    s[0] = radius * th.cos();
                    s[1] = radius * th.sin();
                    out.push(s);
                }
            }
        }
    }
    out
}

/// Symmetric synthetic coefficients `η_p = −scale / |n|²`.
pub fn synthetic_eta(modes: &[Momentum], scale: f64) -> Vec<f64> {
    modes.iter().map(|m| -scale / m.n_sq() as f64).collect()
}

/// Bound-fitting parameters shared by all sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct FitSettings {
    pub seed: u64,
    pub samples: usize,
    pub sweep: Vec<u64>,
    pub max_drift: f64,
    pub dimension_cap: usize,
}

fn pair_modes(p: Momentum) -> Vec<Momentum> {
    vec![p, p.negate()]
}

/// `⟨Tξ, N₊^k Tξ⟩ ≤ C ⟨ξ, (N₊^k + 1) ξ⟩` on `{p, −p}` with `n_max = N`.
pub fn fit_tnt(p: Momentum, k: i32, eta_scale: f64, fit: &FitSettings) -> Result<BoundReport> {
    let modes = pair_modes(p);
    let eta = synthetic_eta(&modes, eta_scale);
    let fits = fit
        .sweep
        .iter()
        .map(|&n| -> Result<BoundFit> {
            let basis = FockBasis::build_with_cap(modes.clone(), n as usize, n, fit.dimension_cap)?;
            let t = bogoliubov(&basis, &eta)?;
            let lhs_op = pow_number(&basis, |x| x.powi(k));
            let rhs_op = pow_number(&basis, |x| x.powi(k) + 1.0);
            let seed = task_seed(fit.seed, &format!("tnt-k{k}-n{n}"));
            let constant = fit_max(basis.dim(), fit.samples, seed, |x| {
                let tx = t.apply(x);
                lhs_op.form(&tx, &tx).re / rhs_op.form(x, x).re
            });
            Ok(BoundFit {
                particles: n,
                n_max: basis.n_max(),
                dim: basis.dim(),
                constant,
                samples: fit.samples,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport::new(
        &format!("bogoliubov_number_growth_k{k}"),
        "T* N₊^k T ≤ C (N₊^k + 1)",
        modes,
        params(&[("k", k as f64), ("eta", eta[0])]),
        fits,
        fit.max_drift,
        None,
    ))
}

/// `N ‖d_p ξ‖ ≤ C (|η_p| ‖(N₊+1)^{3/2} ξ‖ + ‖b_p (N₊+1) ξ‖)` on `{p, −p}` with `n_max = N`.
pub fn fit_dp(p: Momentum, eta_scale: f64, fit: &FitSettings) -> Result<BoundReport> {
    let modes = pair_modes(p);
    let eta = synthetic_eta(&modes, eta_scale);
    let fits = fit
        .sweep
        .iter()
        .map(|&n| -> Result<BoundFit> {
            let basis = FockBasis::build_with_cap(modes.clone(), n as usize, n, fit.dimension_cap)?;
            let t = bogoliubov(&basis, &eta)?;
            let d = residual_d(&basis, p, &t, eta[0])?;
            let b = modified_annihilator(&basis, p)?;
            let n_half3 = pow_number(&basis, |x| (x + 1.0).powf(1.5));
            let n_plus = pow_number(&basis, |x| x + 1.0);
            let seed = task_seed(fit.seed, &format!("dp-n{n}"));
            let constant = fit_max(basis.dim(), fit.samples, seed, |x| {
                let lhs = n as f64 * norm(&d.apply(x));
                let rhs = eta[0].abs() * norm(&n_half3.apply(x)) + norm(&b.apply(&n_plus.apply(x)));
                lhs / rhs
            });
            Ok(BoundFit {
                particles: n,
                n_max: basis.n_max(),
                dim: basis.dim(),
                constant,
                samples: fit.samples,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport::new(
        "bogoliubov_residual",
        "‖d_p ξ‖ ≤ (C/N)(|η_p| ‖(N₊+1)^{3/2} ξ‖ + ‖b_p (N₊+1) ξ‖), d_p = T* b_p T − cosh(η_p) b_p − sinh(η_p) b*_{−p}",
        modes,
        params(&[("eta", eta[0])]),
        fits,
        fit.max_drift,
        None,
    ))
}

/// Six modes `±v, ±r, ±(r+v)` with `P_L = {±v}`.
pub fn triad(v: Momentum, r: Momentum) -> Result<(Vec<Momentum>, Partition)> {
    let rv = r
        .checked_add(v)
        .ok_or_else(|| FockError::InvalidInput("r + v must be nonzero".into()))?;
    let modes = vec![v, v.negate(), r, r.negate(), rv, rv.negate()];
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(FockError::InvalidInput(format!("triad modes are not distinct ({m})")));
        }
    }
    Ok((modes, Partition { low: vec![v, v.negate()] }))
}

/// Triad geometry and truncation for the cubic-generator bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct TriadSettings {
    pub low: Momentum,
    pub high: Momentum,
    pub n_max: usize,
    pub eta_scale: f64,
}

fn triad_setup(t: &TriadSettings, n: u64, cap: usize) -> Result<(FockBasis, FockOperator, Coverage)> {
    let (modes, part) = triad(t.low, t.high)?;
    let eta = synthetic_eta(&modes, t.eta_scale);
    let basis = FockBasis::build_with_cap(modes, t.n_max, n, cap)?;
    let (a, cov) = cubic_a(&basis, &eta, &part)?;
    Ok((basis, a, cov))
}

/// `√N |⟨ξ₁, [b(h), A] ξ₂⟩| ≤ C ‖h‖ ‖(N₊+1)^{1/2} ξ₁‖ ‖(N₊+1)^{1/2} ξ₂‖` with `h` uniform on the triad.
pub fn fit_commutator(t: &TriadSettings, fit: &FitSettings) -> Result<BoundReport> {
    let mut coverage = None;
    let mut modes_out = Vec::new();
    let fits = fit
        .sweep
        .iter()
        .map(|&n| -> Result<BoundFit> {
            let (basis, a, cov) = triad_setup(t, n, fit.dimension_cap)?;
            coverage.get_or_insert(cov);
            if modes_out.is_empty() {
                modes_out = basis.modes().to_vec();
            }
            let m = basis.n_modes();
            let h = vec![c(1.0 / (m as f64).sqrt()); m];
            let bh = smeared_annihilator(&basis, &h, true)?;
            let comm = bh.commutator(&a)?;
            let root = pow_number(&basis, |x| (x + 1.0).sqrt());
            let seed = task_seed(fit.seed, &format!("commutator-n{n}"));
            let constant = fit_max_pairs(basis.dim(), fit.samples, seed, |x1, x2| {
                let lhs = (n as f64).sqrt() * comm.form(x1, x2).norm();
                lhs / (norm(&root.apply(x1)) * norm(&root.apply(x2)))
            });
            Ok(BoundFit {
                particles: n,
                n_max: basis.n_max(),
                dim: basis.dim(),
                constant,
                samples: fit.samples,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport::new(
        "cubic_commutator",
        "|⟨ξ₁, [b(h), A] ξ₂⟩| ≤ (C‖h‖/√N) ‖(N₊+1)^{1/2} ξ₁‖ ‖(N₊+1)^{1/2} ξ₂‖",
        modes_out,
        params(&[("h_norm", 1.0), ("eta_scale", t.eta_scale)]),
        fits,
        fit.max_drift,
        coverage,
    ))
}

/// `⟨e^{−κA}ξ, N₊^k e^{−κA}ξ⟩ ≤ C ⟨ξ, (N₊^k + 1)^k ξ⟩` on the triad.
pub fn fit_cubic_conjugation(t: &TriadSettings, k: i32, kappa: f64, fit: &FitSettings) -> Result<BoundReport> {
    let mut coverage = None;
    let mut modes_out = Vec::new();
    let fits = fit
        .sweep
        .iter()
        .map(|&n| -> Result<BoundFit> {
            let (basis, a, cov) = triad_setup(t, n, fit.dimension_cap)?;
            coverage.get_or_insert(cov);
            if modes_out.is_empty() {
                modes_out = basis.modes().to_vec();
            }
            let lhs_op = pow_number(&basis, |x| x.powi(k));
            let rhs_op = pow_number(&basis, |x| (x.powi(k) + 1.0).powi(k));
            let seed = task_seed(fit.seed, &format!("cubic-k{k}-kappa{kappa}-n{n}"));
            let mut rng = RandomStates::new(seed, basis.dim());
            let states: Vec<Vec<Complex64>> = (0..fit.samples).map(|_| rng.next_state()).collect();
            let ratios = states
                .par_iter()
                .map(|x| -> Result<f64> {
                    let y = expm_action(&a, c(-kappa), x)?;
                    Ok(lhs_op.form(&y, &y).re / rhs_op.form(x, x).re)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(BoundFit {
                particles: n,
                n_max: basis.n_max(),
                dim: basis.dim(),
                constant: ratios.into_iter().fold(f64::NEG_INFINITY, f64::max),
                samples: fit.samples,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport::new(
        &format!("cubic_number_growth_k{k}_kappa{kappa}"),
        "e^{κA} N₊^k e^{−κA} ≤ C (N₊^k + 1)^k",
        modes_out,
        params(&[("k", k as f64), ("kappa", kappa), ("eta_scale", t.eta_scale)]),
        fits,
        fit.max_drift,
        coverage,
    ))
}

/// `⟨e^{iφ(h)}ξ, (N₊+α)^j e^{iφ(h)}ξ⟩ ≤ C ⟨ξ, (N₊+α+‖h‖²)^j ξ⟩` on `{p, −p}` with `n_max = N`.
pub fn fit_weyl_growth(p: Momentum, h: [Complex64; 2], alpha: f64, j: i32, fit: &FitSettings) -> Result<BoundReport> {
    let modes = pair_modes(p);
    let h_sq = h[0].norm_sqr() + h[1].norm_sqr();
    let fits = fit
        .sweep
        .iter()
        .map(|&n| -> Result<BoundFit> {
            let basis = FockBasis::build_with_cap(modes.clone(), n as usize, n, fit.dimension_cap)?;
            let phi = field_op_coeffs(&basis, &h, true)?;
            let lhs_op = pow_number(&basis, |x| (x + alpha).powi(j));
            let rhs_op = pow_number(&basis, |x| (x + alpha + h_sq).powi(j));
            let seed = task_seed(fit.seed, &format!("weyl-growth-j{j}-n{n}"));
            let mut rng = RandomStates::new(seed, basis.dim());
            let states: Vec<Vec<Complex64>> = (0..fit.samples).map(|_| rng.next_state()).collect();
            let ratios = states
                .par_iter()
                .map(|x| -> Result<f64> {
                    let y = expm_action(&phi, Complex64::i(), x)?;
                    Ok(lhs_op.form(&y, &y).re / rhs_op.form(x, x).re)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(BoundFit {
                particles: n,
                n_max: basis.n_max(),
                dim: basis.dim(),
                constant: ratios.into_iter().fold(f64::NEG_INFINITY, f64::max),
                samples: fit.samples,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport::new(
        &format!("weyl_number_growth_j{j}"),
        "e^{−iφ(h)} (N₊+α)^j e^{iφ(h)} ≤ C (N₊+α+‖h‖²)^j",
        modes,
        params(&[("alpha", alpha), ("j", j as f64), ("h_norm", h_sq.sqrt())]),
        fits,
        fit.max_drift,
        None,
    ))
}

/// `max ‖dΓ(A)ξ‖ / (‖A‖ ‖N₊ξ‖)` for a Hermitian one-particle matrix.
pub fn dgamma_ratio(basis: &FockBasis, a: &DMatrix<Complex64>, samples: usize, seed: u64) -> Result<f64> {
    let op = dgamma(basis, a)?;
    let a_norm = a.clone().symmetric_eigen().eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let number = pow_number(basis, |x| x);
    Ok(fit_max(basis.dim(), samples, seed, |x| {
        norm(&op.apply(x)) / (a_norm * norm(&number.apply(x)))
    }))
}

/// `max ‖b(h)ξ‖ / (‖h‖ ‖N₊^{1/2}ξ‖)`.
pub fn smeared_annihilator_ratio(basis: &FockBasis, h: &[Complex64], samples: usize, seed: u64) -> Result<f64> {
    let b = smeared_annihilator(basis, h, true)?;
    let h_norm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let root = pow_number(basis, |x| x.sqrt());
    Ok(fit_max(basis.dim(), samples, seed, |x| norm(&b.apply(x)) / (h_norm * norm(&root.apply(x)))))
}
