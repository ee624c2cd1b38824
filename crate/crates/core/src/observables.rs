//! Bounded one-particle observables reduced to the Fourier data of `q₀Oφ₀`,
//! and the dressed vectors built from them.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::lattice::{ModeSet, Momentum};
use crate::{Complex64, Error, Result};

/// Fourier data of a bounded observable `O` relative to the condensate `φ₀ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSpec {
    /// `⟨φ₀, Oφ₀⟩`.
    pub mean: Complex64,
    /// `(q₀Oφ₀)^(p)` on its finite support.
    fhat: BTreeMap<Momentum, Complex64>,
    /// Operator-norm bound `‖O‖`.
    pub norm_bound: f64,
}

impl ObservableSpec {
    /// Multiplication by `o(x) = Σ ô(n) e^{2πi n·x}`.
    ///
    /// The index set must be closed under `n ↦ -n` (zero coefficients are
    /// allowed). When `norm_bound` is `None`, `sup |o|` is estimated on a
    /// uniform grid of the unit cube.
    pub fn from_multiplier(coeffs: &[([i32; 3], Complex64)], norm_bound: Option<f64>) -> Result<Self> {
        let mut all: BTreeMap<[i32; 3], Complex64> = BTreeMap::new();
        for &(n, c) in coeffs {
            if all.insert(n, c).is_some() {
                return Err(Error::InvalidInput(format!("duplicate Fourier index {n:?}")));
            }
        }
        for n in all.keys() {
            let neg = [-n[0], -n[1], -n[2]];
            if !all.contains_key(&neg) {
                return Err(Error::InvalidInput(format!(
                    "Fourier support is not symmetric: {n:?} present but {neg:?} missing"
                )));
            }
        }
        let mean = all.get(&[0, 0, 0]).copied().unwrap_or_default();
        let norm_bound = match norm_bound {
            Some(b) if b >= 0.0 => b,
            Some(b) => return Err(Error::InvalidInput(format!("norm bound must be >= 0, got {b}"))),
            None => estimate_sup(&all),
        };
        let fhat = all
            .into_iter()
            .filter_map(|(n, c)| Momentum::new(n).map(|m| (m, c)))
            .collect();
        Ok(Self {
            mean,
            fhat,
            norm_bound,
        })
    }

    /// `o(x) = 2 cos(2π n₀·x)`.
    pub fn cos(n0: [i32; 3]) -> Result<Self> {
        if n0 == [0, 0, 0] {
            return Err(Error::InvalidInput("cos preset needs a nonzero wave vector".into()));
        }
        let one = Complex64::new(1.0, 0.0);
        Self::from_multiplier(&[(n0, one), ([-n0[0], -n0[1], -n0[2]], one)], Some(2.0))
    }

    /// `O = Σ_p o(p) |e_p⟩⟨e_p|`; only `o(0)` survives since `Oφ₀ = o(0)φ₀`.
    pub fn momentum_diagonal(o_zero: f64, norm_bound: f64) -> Self {
        Self {
            mean: Complex64::new(o_zero, 0.0),
            fhat: BTreeMap::new(),
            norm_bound,
        }
    }

    pub fn fhat(&self, p: Momentum) -> Complex64 {
        self.fhat.get(&p).copied().unwrap_or_default()
    }

    /// Fourier coefficient of the complex conjugate of `q₀Oφ₀`.
    pub fn fbarhat(&self, p: Momentum) -> Complex64 {
        self.fhat(p.negate()).conj()
    }

    pub fn support(&self) -> impl Iterator<Item = Momentum> + '_ {
        self.fhat.keys().copied()
    }

    /// `‖q₀Oφ₀‖₂`.
    pub fn fourier_norm(&self) -> f64 {
        self.fhat.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ℓ² norm of the Fourier data discarded when restricting to `modes`.
    pub fn truncation_tail(&self, modes: &ModeSet) -> f64 {
        self.fhat
            .iter()
            .filter(|(m, _)| !modes.contains(**m))
            .map(|(_, c)| c.norm_sqr())
            .fold(0.0, |acc, x| acc + x)
            .sqrt()
    }
}

fn estimate_sup(coeffs: &BTreeMap<[i32; 3], Complex64>) -> f64 {
    let reach = coeffs
        .keys()
        .flat_map(|n| n.iter().map(|c| c.unsigned_abs()))
        .max()
        .unwrap_or(0) as usize;
    let g = (8 * reach + 8).min(64);
    let mut sup: f64 = 0.0;
    for i in 0..g {
        for j in 0..g {
            for k in 0..g {
                let x = [i as f64 / g as f64, j as f64 / g as f64, k as f64 / g as f64];
                let v: Complex64 = coeffs
                    .iter()
                    .map(|(n, c)| {
                        let phase = 2.0 * PI * (n[0] as f64 * x[0] + n[1] as f64 * x[1] + n[2] as f64 * x[2]);
                        c * Complex64::from_polar(1.0, phase)
                    })
                    .sum();
                sup = sup.max(v.norm());
            }
        }
    }
    sup
}

/// A complex vector indexed by an explicit, ordered list of modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuVector {
    pub modes: Vec<Momentum>,
    pub values: Vec<Complex64>,
    pub norm_sq: f64,
}

impl NuVector {
    pub fn new(modes: Vec<Momentum>, values: Vec<Complex64>) -> Result<Self> {
        if modes.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} modes but {} values",
                modes.len(),
                values.len()
            )));
        }
        let norm_sq = values.iter().map(|c| c.norm_sqr()).sum();
        Ok(Self {
            modes,
            values,
            norm_sq,
        })
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    pub fn get(&self, p: Momentum) -> Option<Complex64> {
        self.modes.iter().position(|&m| m == p).map(|i| self.values[i])
    }

    fn check_same_modes(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch(format!(
                "vectors live on {} and {} modes with different ordering or content",
                self.modes.len(),
                other.modes.len()
            )));
        }
        Ok(())
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_modes(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum())
    }
}

/// `values(p) = f̂(p) cosh(angle_p) + f̄̂(p) sinh(angle_p)` on `modes`.
///
/// With the angle set to `μ`, `η` or `η + τ` this gives `ν`, `h` and `ν̃`.
pub fn dressed_vector(spec: &ObservableSpec, modes: &[Momentum], angle: &[f64]) -> Result<NuVector> {
    if modes.len() != angle.len() {
        return Err(Error::InvalidInput(format!(
            "angle has {} entries for {} modes",
            angle.len(),
            modes.len()
        )));
    }
    let values = modes
        .iter()
        .zip(angle)
        .map(|(&p, &a)| spec.fhat(p) * a.cosh() + spec.fbarhat(p) * a.sinh())
        .collect();
    NuVector::new(modes.to_vec(), values)
}

/// ℓ² distance between two vectors on the same modes.
pub fn vector_distance(v1: &NuVector, v2: &NuVector) -> Result<f64> {
    v1.check_same_modes(v2)?;
    Ok(v1
        .values
        .iter()
        .zip(&v2.values)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}
