//! Radial scattering problems for a repulsive, compactly supported potential.
//!
//! With `u = r f` the operator `-Δ + V/2` reduces to `-u'' + (V/2) u`. Inside
//! the support the equation is advanced with a step propagator that freezes
//! the potential at the step midpoint and solves the constant-coefficient
//! problem exactly (second order in general, exact for piecewise-constant
//! potentials). Outside the support `V = 0` and the solution is written in
//! closed form, which keeps the Neumann matching well conditioned even for
//! very large balls.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::quadrature::simpson;
use crate::{Error, Result};

pub mod cache;

/// Spherically symmetric, non-negative potential with compact support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialPotential {
    /// `V(r) = height` for `r ≤ radius`, zero outside.
    SoftSphere { height: f64, radius: f64 },
    /// Linear interpolation of `values` on increasing `radii` starting at 0;
    /// zero beyond the last radius.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl RadialPotential {
    pub fn soft_sphere(height: f64, radius: f64) -> Result<Self> {
        if !(height >= 0.0 && height.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "soft sphere height must be finite and >= 0, got {height}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "soft sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self::SoftSphere { height, radius })
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::InvalidInput(
                "tabulated potential needs >= 2 radii and one value per radius".into(),
            ));
        }
        if radii[0] != 0.0 {
            return Err(Error::InvalidInput("tabulated radii must start at 0".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("tabulated radii must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(
                "tabulated potential values must be finite and >= 0".into(),
            ));
        }
        Ok(Self::Tabulated { radii, values })
    }

    pub fn zero() -> Self {
        Self::SoftSphere {
            height: 0.0,
            radius: 1.0,
        }
    }

    pub fn support_radius(&self) -> f64 {
        match self {
            Self::SoftSphere { radius, .. } => *radius,
            Self::Tabulated { radii, .. } => *radii.last().expect("validated"),
        }
    }

    /// Value at `r`; at the support edge this is the interior limit.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Self::SoftSphere { height, radius } => {
                if r <= *radius {
                    *height
                } else {
                    0.0
                }
            }
            Self::Tabulated { radii, values } => {
                let last = *radii.last().expect("validated");
                if r > last {
                    return 0.0;
                }
                if r <= 0.0 {
                    return values[0];
                }
                let j = radii.partition_point(|&x| x <= r).min(radii.len() - 1).max(1);
                let (r0, r1) = (radii[j - 1], radii[j]);
                let t = (r - r0) / (r1 - r0);
                values[j - 1] + t * (values[j] - values[j - 1])
            }
        }
    }

    pub fn max_value(&self) -> f64 {
        match self {
            Self::SoftSphere { height, .. } => *height,
            Self::Tabulated { values, .. } => values.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.max_value() == 0.0
    }

    /// `∫ V dx` over ℝ³.
    pub fn integral(&self) -> f64 {
        match self {
            Self::SoftSphere { height, radius } => 4.0 * PI / 3.0 * height * radius.powi(3),
            Self::Tabulated { radii, values } => {
                // exact for the piecewise-linear interpolant times r²
                let mut acc = 0.0;
                for j in 1..radii.len() {
                    let (a, b) = (radii[j - 1], radii[j]);
                    let (va, vb) = (values[j - 1], values[j]);
                    let slope = (vb - va) / (b - a);
                    let c0 = va - slope * a;
                    acc += c0 * (b.powi(3) - a.powi(3)) / 3.0 + slope * (b.powi(4) - a.powi(4)) / 4.0;
                }
                4.0 * PI * acc
            }
        }
    }

    /// Stable content hash used as a cache key.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("potential serializes");
        hex::encode(Sha256::digest(&json))
    }
}

/// Interval counts for the inner (`[0, R]`) and outer (`[R, D]`) grids.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub inner: usize,
    pub outer: usize,
    /// Absolute tolerance for the a0 consistency checks.
    pub tolerance: f64,
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self {
            inner: 1 << 14,
            outer: 1 << 14,
            tolerance: 1e-7,
        }
    }
}

impl RadialGrid {
    pub fn uniform(intervals: usize) -> Self {
        Self {
            inner: intervals,
            outer: intervals,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.inner < 2 || self.outer < 2 || !self.inner.is_multiple_of(2) || !self.outer.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "grid interval counts must be even and >= 2 (got inner={}, outer={})",
                self.inner, self.outer
            )));
        }
        Ok(())
    }
}

/// `cosh(√z)` and `sinh(√z)/√z`, continued analytically to `z < 0`.
fn ch_shc(z: f64) -> (f64, f64) {
    if z.abs() < 1e-4 {
        let c = 1.0 + z / 2.0 * (1.0 + z / 12.0 * (1.0 + z / 30.0));
        let s = 1.0 + z / 6.0 * (1.0 + z / 20.0 * (1.0 + z / 42.0));
        (c, s)
    } else if z > 0.0 {
        let k = z.sqrt();
        (k.cosh(), k.sinh() / k)
    } else {
        let k = (-z).sqrt();
        (k.cos(), k.sin() / k)
    }
}

/// `sin(t)/t`.
pub(crate) fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 * (1.0 - t2 / 20.0)
    } else {
        t.sin() / t
    }
}

/// `cos(t) - sin(t)/t` without cancellation at small `t`.
fn cos_minus_sinc(t: f64) -> f64 {
    if t.abs() < 0.1 {
        let t2 = t * t;
        t2 * (-1.0 / 3.0 + t2 * (1.0 / 30.0 + t2 * (-1.0 / 840.0 + t2 / 45360.0)))
    } else {
        t.cos() - t.sin() / t
    }
}

/// `u` and `u'` on the uniform inner grid for `-u'' + (V/2 - λ) u = 0`,
/// `u(0) = 0`, `u'(0) = 1`.
struct InnerSolution {
    h: f64,
    u: Vec<f64>,
    du: Vec<f64>,
}

impl InnerSolution {
    fn edge(&self) -> (f64, f64) {
        (*self.u.last().unwrap(), *self.du.last().unwrap())
    }
}

fn propagate_inner(v: &RadialPotential, lambda: f64, intervals: usize) -> InnerSolution {
    let radius = v.support_radius();
    let h = radius / intervals as f64;
    let mut u = Vec::with_capacity(intervals + 1);
    let mut du = Vec::with_capacity(intervals + 1);
    let (mut y, mut dy) = (0.0, 1.0);
    u.push(y);
    du.push(dy);
    for i in 0..intervals {
        let mid = (i as f64 + 0.5) * h;
        let q = 0.5 * v.value(mid) - lambda;
        let (c, shc) = ch_shc(q * h * h);
        let s = h * shc;
        let (ny, ndy) = (c * y + s * dy, q * s * y + c * dy);
        y = ny;
        dy = ndy;
        u.push(y);
        du.push(dy);
    }
    InnerSolution { h, u, du }
}

/// Zero-energy scattering length, `a0 = r - u(r)/u'(r)` beyond the support.
///
/// The value is extracted at every outer grid node up to `r_max` and must agree
/// to `grid.tolerance`; it is also compared against the same extraction on a
/// grid with half the inner resolution.
pub fn scattering_length(v: &RadialPotential, r_max: f64, grid: &RadialGrid) -> Result<f64> {
    grid.validate()?;
    let radius = v.support_radius();
    if !(r_max >= 2.0 * radius) {
        return Err(Error::InvalidInput(format!(
            "r_max = {r_max} must be at least twice the support radius {radius}"
        )));
    }
    if v.is_zero() {
        return Ok(0.0);
    }
    let extract = |intervals: usize| -> (f64, f64) {
        let inner = propagate_inner(v, 0.0, intervals);
        let (u_r, du_r) = inner.edge();
        let h = (r_max - radius) / grid.outer as f64;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y, dy) = (u_r, du_r);
        let mut a = radius - y / dy;
        for i in 1..=grid.outer {
            // V = 0: exact linear propagation
            y += h * dy;
            let r = radius + h * i as f64;
            a = r - y / dy;
            lo = lo.min(a);
            hi = hi.max(a);
        }
        (a, hi - lo)
    };
    let (a0, spread) = extract(grid.inner);
    if spread > grid.tolerance {
        return Err(Error::GridTooCoarse {
            spread,
            tolerance: grid.tolerance,
        });
    }
    let (coarse, _) = extract(grid.inner / 2);
    let drift = (a0 - coarse).abs();
    if drift > grid.tolerance {
        return Err(Error::GridTooCoarse {
            spread: drift,
            tolerance: grid.tolerance,
        });
    }
    Ok(a0)
}

/// Ground state of the Neumann problem on the ball `|x| ≤ Nℓ`, normalized so
/// that `f(Nℓ) = 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatteringSolution {
    pub potential: RadialPotential,
    pub particles: u64,
    pub ell: f64,
    pub domain_radius: f64,
    pub grid: RadialGrid,
    /// `f` on `r_i = i R / inner`, `i = 0..=inner`.
    pub inner_f: Vec<f64>,
    /// `f` on `r_i = R + i (D - R) / outer`, `i = 0..=outer`.
    pub outer_f: Vec<f64>,
    pub eigenvalue: f64,
    pub a0: f64,
    pub integral_vf: f64,
}

/// Neumann mismatch `D u'(D) - u(D)`, divided by `u'(R) > 0`.
fn neumann_mismatch(v: &RadialPotential, lambda: f64, domain: f64, intervals: usize) -> f64 {
    let inner = propagate_inner(v, lambda, intervals);
    let (u_r, du_r) = inner.edge();
    let radius = v.support_radius();
    let rho = u_r / du_r;
    let a_lambda = radius - rho;
    let x = domain - radius;
    let k = lambda.sqrt();
    let t = k * x;
    a_lambda * t.cos() + x * cos_minus_sinc(t) - x * sinc(t) * domain * lambda * rho
}

pub fn solve_neumann(
    v: &RadialPotential,
    particles: u64,
    ell: f64,
    grid: &RadialGrid,
) -> Result<ScatteringSolution> {
    grid.validate()?;
    if !(ell > 0.0 && ell < 0.5) {
        return Err(Error::InvalidInput(format!("ell must lie in (0, 1/2), got {ell}")));
    }
    if particles == 0 {
        return Err(Error::InvalidInput("particle number must be positive".into()));
    }
    let radius = v.support_radius();
    let domain = particles as f64 * ell;
    if !(domain > radius) {
        return Err(Error::InvalidInput(format!(
            "N ell = {domain} must exceed the support radius {radius}"
        )));
    }
    let a0 = scattering_length(v, 2.0 * radius, grid)?;

    let lambda = if v.is_zero() {
        0.0
    } else {
        let g0 = neumann_mismatch(v, 0.0, domain, grid.inner);
        if g0 <= 0.0 {
            0.0
        } else {
            // constant trial function bounds the ground state from above
            let ball = 4.0 * PI / 3.0 * domain.powi(3);
            let upper = (0.5 * v.max_value()).min(0.5 * v.integral() / ball);
            let g_upper = neumann_mismatch(v, upper, domain, grid.inner);
            if g_upper > 0.0 {
                return Err(Error::Bracketing { upper });
            }
            let (mut lo, mut hi) = (0.0, upper);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if neumann_mismatch(v, mid, domain, grid.inner) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            0.5 * (lo + hi)
        }
    };

    let inner = propagate_inner(v, lambda, grid.inner);
    let (u_r, du_r) = inner.edge();
    let k = lambda.sqrt();
    let x_span = domain - radius;
    let h_out = x_span / grid.outer as f64;
    let outer_u: Vec<f64> = (0..=grid.outer)
        .map(|i| {
            let x = h_out * i as f64;
            u_r * (k * x).cos() + du_r * x * sinc(k * x)
        })
        .collect();
    let norm = outer_u[grid.outer] / domain;

    let inner_f: Vec<f64> = inner
        .u
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            if i == 0 {
                inner.du[0] / norm
            } else {
                u / (inner.h * i as f64 * norm)
            }
        })
        .collect();
    let outer_f: Vec<f64> = outer_u
        .iter()
        .enumerate()
        .map(|(i, &u)| u / ((radius + h_out * i as f64) * norm))
        .collect();

    for (i, &f) in inner_f.iter().enumerate().skip(1) {
        if !(f > 0.0) {
            return Err(Error::WrongBranch { radius: inner.h * i as f64 });
        }
    }
    for (i, &f) in outer_f.iter().enumerate() {
        if !(f > 0.0) {
            return Err(Error::WrongBranch { radius: radius + h_out * i as f64 });
        }
    }

    let mut sol = ScatteringSolution {
        potential: v.clone(),
        particles,
        ell,
        domain_radius: domain,
        grid: *grid,
        inner_f,
        outer_f,
        eigenvalue: lambda,
        a0,
        integral_vf: 0.0,
    };
    sol.integral_vf = sol.vf_hat(0.0);
    Ok(sol)
}

/// `∫ V f_ℓ dx` together with its deviation `|∫ V f_ℓ - 8π a0|`.
pub fn integral_vf(sol: &ScatteringSolution) -> (f64, f64) {
    (sol.integral_vf, (sol.integral_vf - 8.0 * PI * sol.a0).abs())
}

impl ScatteringSolution {
    pub fn support_radius(&self) -> f64 {
        self.potential.support_radius()
    }

    pub fn inner_step(&self) -> f64 {
        self.support_radius() / self.grid.inner as f64
    }

    pub fn outer_step(&self) -> f64 {
        (self.domain_radius - self.support_radius()) / self.grid.outer as f64
    }

    pub fn inner_radii(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.inner_step();
        (0..=self.grid.inner).map(move |i| h * i as f64)
    }

    pub fn outer_radii(&self) -> impl Iterator<Item = f64> + '_ {
        let (r0, h) = (self.support_radius(), self.outer_step());
        (0..=self.grid.outer).map(move |i| r0 + h * i as f64)
    }

    /// Signed `∫ V f_ℓ dx - 8π a0`.
    pub fn vf_deviation(&self) -> f64 {
        self.integral_vf - 8.0 * PI * self.a0
    }

    /// `ŵ_ℓ(k) = ∫ (1 - f_ℓ(x)) e^{-ik·x} dx` with `w_ℓ` extended by zero
    /// outside the ball.
    pub fn w_hat(&self, k: f64) -> f64 {
        let inner: Vec<f64> = self
            .inner_radii()
            .zip(&self.inner_f)
            .map(|(r, f)| (1.0 - f) * r * r * sinc(k * r))
            .collect();
        let outer: Vec<f64> = self
            .outer_radii()
            .zip(&self.outer_f)
            .map(|(r, f)| (1.0 - f) * r * r * sinc(k * r))
            .collect();
        4.0 * PI * (simpson(&inner, self.inner_step()) + simpson(&outer, self.outer_step()))
    }

    /// `(V f_ℓ)^(k)`; at `k = 0` this is `∫ V f_ℓ dx`.
    pub fn vf_hat(&self, k: f64) -> f64 {
        let vals: Vec<f64> = self
            .inner_radii()
            .zip(&self.inner_f)
            .map(|(r, f)| self.potential.value(r) * f * r * r * sinc(k * r))
            .collect();
        4.0 * PI * simpson(&vals, self.inner_step())
    }

    /// `∫_{|x| ≤ D} f_ℓ(x) e^{-ik·x} dx`.
    pub fn f_ball_hat(&self, k: f64) -> f64 {
        let inner: Vec<f64> = self
            .inner_radii()
            .zip(&self.inner_f)
            .map(|(r, f)| f * r * r * sinc(k * r))
            .collect();
        let outer: Vec<f64> = self
            .outer_radii()
            .zip(&self.outer_f)
            .map(|(r, f)| f * r * r * sinc(k * r))
            .collect();
        4.0 * PI * (simpson(&inner, self.inner_step()) + simpson(&outer, self.outer_step()))
    }

    /// `f_ℓ(r)` by linear interpolation on the stored grids.
    pub fn f_at(&self, r: f64) -> f64 {
        let radius = self.support_radius();
        let (r0, h, vals) = if r <= radius {
            (0.0, self.inner_step(), &self.inner_f)
        } else {
            (radius, self.outer_step(), &self.outer_f)
        };
        let t = ((r - r0) / h).clamp(0.0, (vals.len() - 1) as f64);
        let i = (t.floor() as usize).min(vals.len() - 2);
        let frac = t - i as f64;
        vals[i] * (1.0 - frac) + vals[i + 1] * frac
    }
}

/// Free-function forms mirroring the method API.
pub fn w_hat(sol: &ScatteringSolution, k: f64) -> f64 {
    sol.w_hat(k)
}

pub fn vf_hat(sol: &ScatteringSolution, k: f64) -> f64 {
    sol.vf_hat(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A0_SOFT: f64 = 0.037_882_842_739_990_24;

    fn soft() -> RadialPotential {
        RadialPotential::soft_sphere(2.0, 0.5).unwrap()
    }

    #[test]
    fn zero_potential_has_zero_length() {
        let a = scattering_length(&RadialPotential::zero(), 2.0, &RadialGrid::default()).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn soft_sphere_matches_closed_form() {
        let a = scattering_length(&soft(), 1.0, &RadialGrid::default()).unwrap();
        assert!((a - A0_SOFT).abs() < 1e-12, "{a}");
    }

    #[test]
    fn weak_coupling_is_close_to_born() {
        let v = RadialPotential::soft_sphere(0.01, 1.0).unwrap();
        let a = scattering_length(&v, 2.0, &RadialGrid::default()).unwrap();
        // 1 - tanh(k)/k with k = sqrt(0.005), from 30-digit arithmetic
        assert!((a - 0.001_663_340_065_724_290_6).abs() < 1e-11, "{a}");
        let born = v.integral() / (8.0 * PI);
        assert!(((a - born) / born).abs() < 5e-3);
    }

    #[test]
    fn r_max_must_cover_twice_the_support() {
        assert!(matches!(
            scattering_length(&soft(), 0.9, &RadialGrid::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn odd_grid_rejected() {
        let grid = RadialGrid { inner: 7, ..RadialGrid::default() };
        assert!(scattering_length(&soft(), 1.0, &grid).is_err());
    }

    #[test]
    fn tabulated_interpolation() {
        let v = RadialPotential::tabulated(vec![0.0, 1.0, 2.0], vec![2.0, 1.0, 0.0]).unwrap();
        assert_eq!(v.value(0.5), 1.5);
        assert_eq!(v.value(1.0), 1.0);
        assert_eq!(v.value(2.5), 0.0);
        // ∫ V dx for V = 2 - r on [0, 2]: 4π (2·8/3 - 16/4)
        assert!((v.integral() - 4.0 * PI * (16.0 / 3.0 - 4.0)).abs() < 1e-12);
        assert!(RadialPotential::tabulated(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(RadialPotential::tabulated(vec![0.5, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn zero_potential_neumann_is_trivial() {
        let sol = solve_neumann(&RadialPotential::zero(), 10, 0.49, &RadialGrid::uniform(256)).unwrap();
        assert_eq!(sol.eigenvalue, 0.0);
        assert!(sol.inner_f.iter().chain(&sol.outer_f).all(|&f| (f - 1.0).abs() < 1e-14));
        let (ivf, dev) = integral_vf(&sol);
        assert_eq!(ivf, 0.0);
        assert_eq!(dev, 0.0);
        assert!(sol.w_hat(0.0).abs() < 1e-12);
        assert!(sol.w_hat(3.0).abs() < 1e-12);
        assert_eq!(sol.vf_hat(1.0), 0.0);
    }

    #[test]
    fn neumann_integral_near_8_pi_a0() {
        let sol = solve_neumann(&soft(), 100, 0.5 - 1e-9, &RadialGrid::default()).unwrap();
        // N ell = 50
        let target = 8.0 * PI * A0_SOFT;
        let (ivf, dev) = integral_vf(&sol);
        assert!(((ivf - target) / target).abs() < 0.03);
        assert!(dev > 0.0);
        assert!(sol.vf_deviation() > 0.0);
        assert_eq!(sol.vf_hat(0.0), sol.integral_vf);
    }

    #[test]
    fn f_is_normalized_positive_and_increasing_outside() {
        let sol = solve_neumann(&soft(), 200, 0.49, &RadialGrid::uniform(2048)).unwrap();
        assert!((sol.outer_f.last().unwrap() - 1.0).abs() < 1e-14);
        assert!(sol.inner_f.iter().all(|&f| f > 0.0));
        assert!(sol.outer_f.windows(2).all(|w| w[1] > w[0]));
        assert!(sol.eigenvalue > 0.0);
    }

    #[test]
    fn bad_ell_and_small_ball_rejected() {
        assert!(solve_neumann(&soft(), 100, 0.5, &RadialGrid::default()).is_err());
        assert!(solve_neumann(&soft(), 1, 0.3, &RadialGrid::default()).is_err());
    }

    #[test]
    fn sinc_helpers_are_continuous() {
        for &t in &[1e-5f64, 0.05, 0.0999, 0.1001, 0.5] {
            let direct = t.cos() - t.sin() / t;
            assert!((cos_minus_sinc(t) - direct).abs() < 1e-14);
        }
        assert!((sinc(1e-4 * 0.999) - (1e-4f64 * 0.999).sin() / (1e-4 * 0.999)).abs() < 1e-16);
        let (c, s) = ch_shc(-4.0);
        assert!((c - 2f64.cos()).abs() < 1e-15 && (s - 2f64.sin() / 2.0).abs() < 1e-15);
        let (c, s) = ch_shc(0.99e-4);
        let k = 0.99e-4f64.sqrt();
        assert!((c - k.cosh()).abs() < 1e-15 && (s - k.sinh() / k).abs() < 1e-15);
    }
}
