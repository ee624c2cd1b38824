//! Covariance, characteristic functions, densities and distances of the
//! limiting Gaussian law.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::Momentum;
use crate::observables::NuVector;
use crate::quadrature::{cumulative_trapezoid, simpson, trapezoid};
use crate::{Complex64, Error, Result};

/// Relative eigenvalue threshold below which a covariance counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Gram-type matrix `Σ_ij = ⟨ν_i, ν_j⟩` for `i ≤ j` and `⟨ν_j, ν_i⟩` for
/// `j < i`; symmetric as written, with complex entries allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovMatrix {
    pub k: usize,
    /// Row-major entries.
    pub entries: Vec<Complex64>,
}

/// Builds `Σ` from vectors on a common mode list.
pub fn covariance(nus: &[NuVector]) -> Result<CovMatrix> {
    let k = nus.len();
    let mut entries = vec![Complex64::default(); k * k];
    for i in 0..k {
        for j in i..k {
            let v = nus[i].inner(&nus[j])?;
            entries[i * k + j] = v;
            entries[j * k + i] = v;
        }
    }
    Ok(CovMatrix { k, entries })
}

impl CovMatrix {
    pub fn new(k: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != k * k {
            return Err(Error::InvalidInput(format!(
                "{} entries for a {k}x{k} matrix",
                entries.len()
            )));
        }
        Ok(Self { k, entries })
    }

    pub fn from_real(k: usize, entries: &[f64]) -> Result<Self> {
        Self::new(k, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.k + j]
    }

    pub fn max_imag(&self) -> f64 {
        self.entries.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.max_imag() <= 1e-14 * self.max_abs().max(f64::MIN_POSITIVE)
    }

    fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.k, self.k, |i, j| self.get(i, j).re)
    }

    /// Eigenvalues of `Re Σ`, ascending.
    pub fn real_eigenvalues(&self) -> Vec<f64> {
        if self.k == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self.real_part().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `Re Σ ≥ 0` up to `tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.real_eigenvalues().first().is_none_or(|&e| e >= -tol)
    }

    pub fn det(&self) -> f64 {
        self.real_part().determinant()
    }

    /// Ratio of extreme eigenvalues of `Re Σ` (infinite when singular).
    pub fn condition_number(&self) -> f64 {
        let ev = self.real_eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
            _ => f64::INFINITY,
        }
    }

    pub fn is_singular(&self) -> bool {
        let ev = self.real_eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(&lo), Some(&hi)) => hi <= 0.0 || lo <= SINGULAR_RTOL * hi,
            _ => true,
        }
    }

    /// `(Σ^{-1}, det Σ)` for a real, invertible `Σ`.
    fn real_inverse(&self) -> Result<(DMatrix<f64>, f64)> {
        if !self.is_real() {
            return Err(Error::ComplexCovariance { imag: self.max_imag() });
        }
        let det = self.det();
        if self.is_singular() {
            return Err(Error::SingularCovariance { det });
        }
        let inv = self
            .real_part()
            .try_inverse()
            .ok_or(Error::SingularCovariance { det })?;
        Ok((inv, det))
    }

    /// `½ Σ_ij s_i s_j Σ_ij`.
    pub fn half_quadratic_form(&self, s: &[f64]) -> Complex64 {
        assert_eq!(s.len(), self.k, "s has wrong dimension");
        let mut acc = Complex64::default();
        for i in 0..self.k {
            for j in 0..self.k {
                acc += self.get(i, j) * (s[i] * s[j]);
            }
        }
        0.5 * acc
    }
}

/// `exp(-½ Σ_ij s_i s_j Σ_ij)`.
pub fn limit_char_fn(sigma: &CovMatrix, s: &[f64]) -> Complex64 {
    (-sigma.half_quadratic_form(s)).exp()
}

/// Characteristic function of the limit law in the one-excitation state
/// `a*_p Ω`: `exp(-½ sΣs) · (1 - |Σ_j s_j ν_j(p)|²)`.
pub fn excited_char_fn(sigma: &CovMatrix, nus: &[NuVector], p: Momentum, s: &[f64]) -> Result<Complex64> {
    if nus.len() != sigma.k || s.len() != sigma.k {
        return Err(Error::InvalidInput(format!(
            "covariance has dimension {} but got {} vectors and {} arguments",
            sigma.k,
            nus.len(),
            s.len()
        )));
    }
    let mut amp = Complex64::default();
    for (nu, &sj) in nus.iter().zip(s) {
        let v = nu
            .get(p)
            .ok_or_else(|| Error::ModeMismatch(format!("mode {p} is not among the vector modes")))?;
        amp += v * sj;
    }
    Ok(limit_char_fn(sigma, s) * (1.0 - amp.norm_sqr()))
}

/// Closed-form density of the one-excitation law for `k = 1`:
/// `ρ(λ) [1 + |ν(p)|² (λ² − σ²)/σ⁴]` with `ρ` the `N(0, σ²)` density.
pub fn excited_density_closed_form(variance: f64, nu_p_sq: f64, lambda: f64) -> f64 {
    let rho = (-0.5 * lambda * lambda / variance).exp() / (2.0 * PI * variance).sqrt();
    rho * (1.0 + nu_p_sq * (lambda * lambda - variance) / (variance * variance))
}

/// Uniform grid `lo + i (hi - lo)/intervals`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub intervals: usize,
}

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, intervals: usize) -> Result<Self> {
        if !(hi > lo) || intervals < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs lo < hi and >= 2 intervals (got [{lo}, {hi}], {intervals})"
            )));
        }
        Ok(Self { lo, hi, intervals })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.intervals as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + self.step() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.intervals).map(|i| self.point(i)).collect()
    }
}

/// Density sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Density1D {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    /// Imaginary parts, kept when the source characteristic function is not
    /// Hermitian; all zero otherwise.
    pub imag: Vec<f64>,
    /// `∫ ρ` over the grid.
    pub integral: f64,
}

impl Density1D {
    pub fn from_values(grid: UniformGrid, values: Vec<f64>) -> Self {
        let imag = vec![0.0; values.len()];
        Self::with_imag(grid, values, imag)
    }

    fn with_imag(grid: UniformGrid, values: Vec<f64>, imag: Vec<f64>) -> Self {
        let integral = simpson(&values, grid.step());
        Self {
            grid,
            values,
            imag,
            integral,
        }
    }

    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("densities live on different grids".into()));
        }
        Ok(())
    }

    fn cdf(&self) -> Vec<f64> {
        cumulative_trapezoid(&self.values, self.grid.step())
    }

    /// CSV with columns `lambda,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,re,im\n");
        for (i, (re, im)) in self.values.iter().zip(&self.imag).enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", self.grid.point(i), re, im);
        }
        out
    }
}

/// Gaussian density `exp(-½ λΣ⁻¹λ) / √((2π)^k det Σ)` at each point.
pub fn gaussian_density(sigma: &CovMatrix, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if sigma.k == 0 || sigma.k > 3 {
        return Err(Error::Dimension(sigma.k));
    }
    let (inv, det) = sigma.real_inverse()?;
    let norm = ((2.0 * PI).powi(sigma.k as i32) * det).sqrt();
    points
        .iter()
        .map(|x| {
            if x.len() != sigma.k {
                return Err(Error::InvalidInput(format!(
                    "point of dimension {} for a {}-dimensional law",
                    x.len(),
                    sigma.k
                )));
            }
            let mut q = 0.0;
            for i in 0..sigma.k {
                for j in 0..sigma.k {
                    q += x[i] * inv[(i, j)] * x[j];
                }
            }
            Ok((-0.5 * q).exp() / norm)
        })
        .collect()
}

/// One-dimensional Gaussian density on `grid`.
pub fn gaussian_density_1d(sigma: &CovMatrix, grid: UniformGrid) -> Result<Density1D> {
    if sigma.k != 1 {
        return Err(Error::Dimension(sigma.k));
    }
    let points: Vec<Vec<f64>> = grid.points().into_iter().map(|x| vec![x]).collect();
    Ok(Density1D::from_values(grid, gaussian_density(sigma, &points)?))
}

/// Symmetric `s`-range `[-s_max, s_max]` with `intervals` trapezoid cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SGrid {
    pub s_max: f64,
    pub intervals: usize,
}

/// Tail threshold for the characteristic function at the ends of the `s`-range.
pub const CHAR_FN_TAIL: f64 = 1e-10;

impl SGrid {
    /// Smallest power-of-two `s_max` in `[1, 4096]` at which `|φ(±s_max)|`
    /// falls below [`CHAR_FN_TAIL`].
    pub fn auto(char_fn: impl Fn(f64) -> Complex64, intervals: usize) -> Result<Self> {
        let mut s_max = 1.0;
        loop {
            let tail = char_fn(s_max).norm().max(char_fn(-s_max).norm());
            if tail < CHAR_FN_TAIL {
                return Ok(Self { s_max, intervals });
            }
            if s_max >= 4096.0 {
                return Err(Error::InsufficientRange {
                    s_max,
                    value: tail,
                    tolerance: CHAR_FN_TAIL,
                });
            }
            s_max *= 2.0;
        }
    }
}

/// `ρ(λ) = (2π)⁻¹ ∫ φ(s) e^{-isλ} ds` by the trapezoid rule on `s_grid`.
pub fn invert_char_fn(
    char_fn: impl Fn(f64) -> Complex64 + Sync,
    grid: UniformGrid,
    s_grid: SGrid,
) -> Result<Density1D> {
    let s_max = s_grid.s_max;
    let tail = char_fn(s_max).norm().max(char_fn(-s_max).norm());
    if !(tail < CHAR_FN_TAIL) {
        return Err(Error::InsufficientRange {
            s_max,
            value: tail,
            tolerance: CHAR_FN_TAIL,
        });
    }
    let hs = 2.0 * s_max / s_grid.intervals as f64;
    let s: Vec<f64> = (0..=s_grid.intervals).map(|i| -s_max + hs * i as f64).collect();
    let phi: Vec<Complex64> = s.iter().map(|&x| char_fn(x)).collect();
    let (re, im): (Vec<f64>, Vec<f64>) = grid
        .points()
        .par_iter()
        .map(|&lambda| {
            let terms: Vec<Complex64> = s
                .iter()
                .zip(&phi)
                .map(|(&x, &p)| p * Complex64::from_polar(1.0, -x * lambda))
                .collect();
            let re: Vec<f64> = terms.iter().map(|c| c.re).collect();
            let im: Vec<f64> = terms.iter().map(|c| c.im).collect();
            (trapezoid(&re, hs) / (2.0 * PI), trapezoid(&im, hs) / (2.0 * PI))
        })
        .unzip();
    Ok(Density1D::with_imag(grid, re, im))
}

/// `∫_α^β ρ`, Simpson on the interior nodes plus trapezoids on the partial end cells.
pub fn interval_probability(density: &Density1D, alpha: f64, beta: f64) -> Result<f64> {
    let g = density.grid;
    if !(alpha >= g.lo && beta <= g.hi && alpha <= beta) {
        return Err(Error::OutsideGrid {
            alpha,
            beta,
            lo: g.lo,
            hi: g.hi,
        });
    }
    let h = g.step();
    let at = |x: f64| -> f64 {
        let t = ((x - g.lo) / h).clamp(0.0, g.intervals as f64);
        let i = (t.floor() as usize).min(g.intervals - 1);
        let f = t - i as f64;
        density.values[i] * (1.0 - f) + density.values[i + 1] * f
    };
    let first = ((alpha - g.lo) / h).ceil() as usize;
    let last = (((beta - g.lo) / h).floor() as usize).min(g.intervals);
    if first > last {
        return Ok(0.5 * (at(alpha) + at(beta)) * (beta - alpha));
    }
    let (xa, xb) = (g.point(first), g.point(last));
    let inner = simpson(&density.values[first..=last], h);
    let left = 0.5 * (at(alpha) + density.values[first]) * (xa - alpha);
    let right = 0.5 * (density.values[last] + at(beta)) * (beta - xb);
    Ok(left + inner + right)
}

/// `sup_λ |F₁(λ) − F₂(λ)|` over the grid nodes.
pub fn kolmogorov_distance(d1: &Density1D, d2: &Density1D) -> Result<f64> {
    d1.check_grid(d2)?;
    Ok(d1
        .cdf()
        .iter()
        .zip(d2.cdf())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Fourier-side description of a test function `g(λ) = ∫ ĝ(s) e^{isλ} ds`.
pub enum TestFunction {
    /// `g ≡ c`, i.e. `ĝ = c δ₀`.
    Constant(Complex64),
    /// `ĝ` given pointwise, integrated by the trapezoid rule on `[-s_max, s_max]`.
    Transform {
        ghat: Box<dyn Fn(f64) -> Complex64 + Sync>,
        s_grid: SGrid,
    },
}

/// Result of [`expectation_of_products`], with the weighted `L¹` norms
/// `∫ (1 + |s|⁴) |ĝ_j(s)| ds` of the non-constant factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: Complex64,
    pub weighted_l1: Vec<f64>,
}

/// Relative size of `(1 + |s|⁴)|ĝ|` at the grid ends above which a transform
/// is treated as non-integrable.
pub const GHAT_TAIL_RTOL: f64 = 1e-10;

/// `∫ ĝ₁(s₁)…ĝ_k(s_k) exp(-½ Σ s_ℓ s_j Σ_ℓj) ds`.
///
/// Constant factors contribute their value with `s_j = 0`; at most three
/// non-constant factors are integrated numerically.
pub fn expectation_of_products(ghats: &[TestFunction], sigma: &CovMatrix) -> Result<Expectation> {
    if ghats.len() != sigma.k {
        return Err(Error::InvalidInput(format!(
            "{} test functions for a {}-dimensional law",
            ghats.len(),
            sigma.k
        )));
    }
    let mut scale = Complex64::new(1.0, 0.0);
    let mut axes: Vec<(usize, Vec<f64>, Vec<Complex64>, f64)> = Vec::new();
    let mut weighted_l1 = Vec::new();
    for (j, g) in ghats.iter().enumerate() {
        match g {
            TestFunction::Constant(c) => scale *= c,
            TestFunction::Transform { ghat, s_grid } => {
                let h = 2.0 * s_grid.s_max / s_grid.intervals as f64;
                let s: Vec<f64> = (0..=s_grid.intervals).map(|i| -s_grid.s_max + h * i as f64).collect();
                let vals: Vec<Complex64> = s.iter().map(|&x| ghat(x)).collect();
                let weighted: Vec<f64> = s
                    .iter()
                    .zip(&vals)
                    .map(|(x, v)| (1.0 + x.powi(4)) * v.norm())
                    .collect();
                let peak = weighted.iter().copied().fold(0.0, f64::max);
                let tail = weighted[0].max(*weighted.last().unwrap());
                if !tail.is_finite() || tail > GHAT_TAIL_RTOL * peak.max(f64::MIN_POSITIVE) {
                    return Err(Error::NonIntegrable {
                        s_max: s_grid.s_max,
                        tail,
                    });
                }
                weighted_l1.push(trapezoid(&weighted, h));
                axes.push((j, s, vals, h));
            }
        }
    }
    if axes.len() > 3 {
        return Err(Error::Dimension(axes.len()));
    }
    let mut s_full = vec![0.0; sigma.k];
    let value = scale * integrate_axes(&axes, 0, &mut s_full, sigma, Complex64::new(1.0, 0.0));
    Ok(Expectation { value, weighted_l1 })
}

fn integrate_axes(
    axes: &[(usize, Vec<f64>, Vec<Complex64>, f64)],
    depth: usize,
    s_full: &mut Vec<f64>,
    sigma: &CovMatrix,
    weight: Complex64,
) -> Complex64 {
    if depth == axes.len() {
        return weight * limit_char_fn(sigma, s_full);
    }
    let (j, s, vals, h) = &axes[depth];
    let n = s.len();
    let mut acc = Complex64::default();
    for i in 0..n {
        s_full[*j] = s[i];
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        acc += integrate_axes(axes, depth + 1, s_full, sigma, weight * vals[i]) * (w * h);
    }
    s_full[*j] = 0.0;
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn m(n: [i32; 3]) -> Momentum {
        Momentum::new(n).unwrap()
    }

    fn one_by_one(v: f64) -> CovMatrix {
        CovMatrix::from_real(1, &[v]).unwrap()
    }

    #[test]
    fn covariance_examples() {
        let modes = vec![m([1, 0, 0]), m([-1, 0, 0]), m([0, 1, 0]), m([0, -1, 0])];
        let a = NuVector::new(modes.clone(), vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let b = NuVector::new(modes.clone(), vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 1.0)]).unwrap();
        let s1 = covariance(std::slice::from_ref(&a)).unwrap();
        assert_eq!(s1.entries, vec![c(2.0, 0.0)]);
        let s2 = covariance(&[a.clone(), b]).unwrap();
        assert_eq!(s2.get(0, 1), c(0.0, 0.0));
        assert_eq!(s2.get(1, 1), c(5.0, 0.0));
        let same = covariance(&[a.clone(), a]).unwrap();
        assert!(same.is_singular());
        assert!(matches!(
            gaussian_density(&same, &[vec![0.0, 0.0]]),
            Err(Error::SingularCovariance { .. })
        ));
    }

    #[test]
    fn covariance_keeps_upper_triangle_convention() {
        let modes = vec![m([1, 0, 0])];
        let a = NuVector::new(modes.clone(), vec![c(1.0, 0.0)]).unwrap();
        let b = NuVector::new(modes, vec![c(0.0, 1.0)]).unwrap();
        let s = covariance(&[a, b]).unwrap();
        // <a, b> = i placed in both off-diagonal slots
        assert_eq!(s.get(0, 1), c(0.0, 1.0));
        assert_eq!(s.get(1, 0), c(0.0, 1.0));
        assert!(!s.is_real());
        assert!(matches!(
            gaussian_density(&s, &[vec![0.0, 0.0]]),
            Err(Error::ComplexCovariance { .. })
        ));
    }

    #[test]
    fn char_fn_examples() {
        assert_eq!(limit_char_fn(&one_by_one(1.0), &[0.0]), c(1.0, 0.0));
        assert_abs_diff_eq!(limit_char_fn(&one_by_one(1.0), &[1.0]).re, 0.606_530_659_712_633_4, epsilon = 1e-15);
        let id = CovMatrix::from_real(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(limit_char_fn(&id, &[1.0, 1.0]).re, 0.367_879_441_171_442_3, epsilon = 1e-15);
    }

    #[test]
    fn excited_char_fn_examples() {
        let modes = vec![m([1, 0, 0])];
        let nu = NuVector::new(modes, vec![c(0.5, 0.0)]).unwrap();
        let sigma = covariance(std::slice::from_ref(&nu)).unwrap();
        let p = m([1, 0, 0]);
        assert_eq!(excited_char_fn(&sigma, std::slice::from_ref(&nu), p, &[0.0]).unwrap(), c(1.0, 0.0));
        let v = excited_char_fn(&sigma, std::slice::from_ref(&nu), p, &[2.0]).unwrap();
        // e^{-½·4·¼}(1 − |2·½|²) = 0
        assert_abs_diff_eq!(v.norm(), 0.0, epsilon = 1e-15);
        let zero = NuVector::new(vec![p], vec![c(0.0, 0.0)]).unwrap();
        let s = one_by_one(0.8);
        assert_eq!(
            excited_char_fn(&s, &[zero], p, &[1.3]).unwrap(),
            limit_char_fn(&s, &[1.3])
        );
    }

    #[test]
    fn gaussian_density_examples() {
        let d = gaussian_density(&one_by_one(1.0), &[vec![0.0]]).unwrap();
        assert_abs_diff_eq!(d[0], 0.398_942_280_401_432_7, epsilon = 1e-15);
        let id = CovMatrix::from_real(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let d = gaussian_density(&id, &[vec![0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(d[0], 0.159_154_943_091_895_3, epsilon = 1e-15);
        let grid = UniformGrid::new(-8.0, 8.0, 1600).unwrap();
        let d = gaussian_density_1d(&one_by_one(1.0), grid).unwrap();
        assert_abs_diff_eq!(d.integral, 1.0, epsilon = 1e-8);
        let four = CovMatrix::from_real(4, &[1.0; 16]).unwrap();
        assert!(matches!(gaussian_density(&four, &[]), Err(Error::Dimension(4))));
    }

    #[test]
    fn inversion_recovers_gaussian() {
        let sigma = one_by_one(1.7);
        let grid = UniformGrid::new(-10.0, 10.0, 800).unwrap();
        let cf = |s: f64| limit_char_fn(&sigma, &[s]);
        let sg = SGrid::auto(cf, 4096).unwrap();
        let inv = invert_char_fn(cf, grid, sg).unwrap();
        let exact = gaussian_density_1d(&sigma, grid).unwrap();
        assert!(inv.sup_distance(&exact).unwrap() < 1e-10);
        assert!(inv.imag.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn undamped_char_fn_is_rejected() {
        let grid = UniformGrid::new(-1.0, 1.0, 10).unwrap();
        let one = |_s: f64| c(1.0, 0.0);
        assert!(matches!(SGrid::auto(one, 100), Err(Error::InsufficientRange { .. })));
        let sg = SGrid { s_max: 50.0, intervals: 100 };
        assert!(matches!(invert_char_fn(one, grid, sg), Err(Error::InsufficientRange { .. })));
    }

    #[test]
    fn excited_density_closed_form_matches_inversion() {
        let (var, c2) = (1.3, 0.4);
        let cf = |s: f64| c((-0.5 * var * s * s).exp() * (1.0 - c2 * s * s), 0.0);
        let grid = UniformGrid::new(-10.0, 10.0, 1000).unwrap();
        let inv = invert_char_fn(cf, grid, SGrid::auto(cf, 4096).unwrap()).unwrap();
        let closed: Vec<f64> = grid.points().iter().map(|&x| excited_density_closed_form(var, c2, x)).collect();
        let closed = Density1D::from_values(grid, closed);
        assert!(inv.sup_distance(&closed).unwrap() < 1e-10);
        assert_abs_diff_eq!(inv.integral, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn probabilities_and_distances() {
        let grid = UniformGrid::new(-10.0, 10.0, 4000).unwrap();
        let std = gaussian_density_1d(&one_by_one(1.0), grid).unwrap();
        // P(|Z| ≤ 1.96) = erf(1.96/√2)
        let p = interval_probability(&std, -1.96, 1.96).unwrap();
        assert_abs_diff_eq!(p, 0.950_004_209_703_559, epsilon = 1e-7);
        assert_eq!(kolmogorov_distance(&std, &std).unwrap(), 0.0);
        let wide = gaussian_density_1d(&one_by_one(1.21), grid).unwrap();
        // max |Φ(x) − Φ(x/1.1)| at x = 1.048015…
        assert_abs_diff_eq!(kolmogorov_distance(&std, &wide).unwrap(), 0.023_044_832_224_703_6, epsilon = 1e-6);
        assert!(matches!(
            interval_probability(&std, -11.0, 0.0),
            Err(Error::OutsideGrid { .. })
        ));
    }

    fn gaussian_ghat() -> TestFunction {
        TestFunction::Transform {
            ghat: Box::new(|s: f64| c((-0.5 * s * s).exp() / (2.0 * PI), 0.0)),
            s_grid: SGrid { s_max: 12.0, intervals: 2400 },
        }
    }

    #[test]
    fn expectation_examples() {
        let sigma = one_by_one(1.0);
        let e = expectation_of_products(&[TestFunction::Constant(c(2.5, 0.0))], &sigma).unwrap();
        assert_eq!(e.value, c(2.5, 0.0));
        let e = expectation_of_products(&[gaussian_ghat()], &sigma).unwrap();
        assert_abs_diff_eq!(e.value.re, 0.282_094_791_773_878_1, epsilon = 1e-12);
        assert_eq!(e.weighted_l1.len(), 1);
    }

    #[test]
    fn expectation_is_multilinear() {
        let sigma = CovMatrix::from_real(2, &[1.0, 0.3, 0.3, 0.7]).unwrap();
        let base = expectation_of_products(&[gaussian_ghat(), TestFunction::Constant(c(1.0, 0.0))], &sigma).unwrap();
        let scaled = expectation_of_products(&[gaussian_ghat(), TestFunction::Constant(c(0.0, -3.0))], &sigma).unwrap();
        assert_abs_diff_eq!((scaled.value - base.value * c(0.0, -3.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn slowly_decaying_transform_is_rejected() {
        let g = TestFunction::Transform {
            ghat: Box::new(|s: f64| c(1.0 / (1.0 + s * s), 0.0)),
            s_grid: SGrid { s_max: 20.0, intervals: 200 },
        };
        assert!(matches!(
            expectation_of_products(&[g], &one_by_one(1.0)),
            Err(Error::NonIntegrable { .. })
        ));
    }
}
