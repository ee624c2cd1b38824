//! Creation, annihilation and derived operators on a [`FockBasis`].

use bogoliubov_core::lattice::Momentum;
use bogoliubov_core::observables::NuVector;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::FockBasis;
use crate::expm::{expm_action, expm_blocks, expm_dense, ExpmStats};
use crate::operator::{c, FockOperator, Tags};
use crate::{FockError, Result};

/// `a_p`.
pub fn annihilator(basis: &FockBasis, p: Momentum) -> Result<FockOperator> {
    let j = basis.mode_index(p)?;
    Ok(lowering(basis, j, |_| 1.0))
}

/// `a*_p`.
pub fn creator(basis: &FockBasis, p: Momentum) -> Result<FockOperator> {
    Ok(annihilator(basis, p)?.adjoint())
}

/// `b_p = √((N − 𝒩₊)/N) a_p`.
pub fn modified_annihilator(basis: &FockBasis, p: Momentum) -> Result<FockOperator> {
    let j = basis.mode_index(p)?;
    let n = basis.particles() as f64;
    Ok(lowering(basis, j, |target_total| ((n - target_total as f64) / n).max(0.0).sqrt()))
}

/// `b*_p = a*_p √((N − 𝒩₊)/N)`.
pub fn modified_creator(basis: &FockBasis, p: Momentum) -> Result<FockOperator> {
    Ok(modified_annihilator(basis, p)?.adjoint())
}

/// Lowering operator in mode `j` with an extra factor depending on the total
/// occupation of the target state.
fn lowering(basis: &FockBasis, j: usize, factor: impl Fn(usize) -> f64) -> FockOperator {
    let mut t = Vec::new();
    let mut occ = vec![0u16; basis.n_modes()];
    for i in 0..basis.dim() {
        let s = basis.state(i);
        if s[j] == 0 {
            continue;
        }
        occ.copy_from_slice(s);
        occ[j] -= 1;
        let target = basis.index_of(&occ).expect("lowered state is in the basis");
        let v = (s[j] as f64).sqrt() * factor(basis.total(i) - 1);
        if v != 0.0 {
            t.push((target, i, c(v)));
        }
    }
    FockOperator::from_triplets(basis.dim(), t)
}

/// `𝒩₊`.
pub fn number_op(basis: &FockBasis) -> FockOperator {
    let diag: Vec<Complex64> = (0..basis.dim()).map(|i| c(basis.total(i) as f64)).collect();
    let mut op = FockOperator::diagonal(&diag);
    op.tags.hermitian = true;
    op
}

/// `f(𝒩₊)` as a diagonal operator.
pub fn number_function(basis: &FockBasis, f: impl Fn(f64) -> f64) -> FockOperator {
    let diag: Vec<Complex64> = (0..basis.dim()).map(|i| c(f(basis.total(i) as f64))).collect();
    FockOperator::diagonal(&diag)
}

/// `dΓ(A) = Σ_ij A_ij a*_i a_j` for an `m×m` one-particle matrix in mode order.
pub fn dgamma(basis: &FockBasis, a: &DMatrix<Complex64>) -> Result<FockOperator> {
    let m = basis.n_modes();
    if a.nrows() != m || a.ncols() != m {
        return Err(FockError::DimensionMismatch(a.nrows(), m));
    }
    let ann: Vec<FockOperator> = basis.modes().iter().map(|&p| annihilator(basis, p)).collect::<Result<_>>()?;
    let mut out = FockOperator::zero(basis.dim());
    for i in 0..m {
        let cre = ann[i].adjoint();
        for j in 0..m {
            if a[(i, j)] != Complex64::default() {
                out = out.add(&cre.matmul(&ann[j])?.scale(a[(i, j)]))?;
            }
        }
    }
    Ok(out)
}

/// Coefficients of `h` in basis mode order; entries outside the basis must vanish.
pub fn mode_coefficients(basis: &FockBasis, h: &NuVector) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::default(); basis.n_modes()];
    for (&p, &v) in h.modes.iter().zip(&h.values) {
        match basis.mode_index(p) {
            Ok(j) => out[j] += v,
            Err(_) if v == Complex64::default() => {}
            Err(_) => return Err(FockError::SupportViolation(p)),
        }
    }
    Ok(out)
}

/// `b(h) = Σ_p conj(h_p) b_p` (or `a(h)` when `modified` is false).
pub fn smeared_annihilator(basis: &FockBasis, h: &[Complex64], modified: bool) -> Result<FockOperator> {
    let mut out = FockOperator::zero(basis.dim());
    for (&p, &hp) in basis.modes().iter().zip(h) {
        if hp == Complex64::default() {
            continue;
        }
        let a = if modified {
            modified_annihilator(basis, p)?
        } else {
            annihilator(basis, p)?
        };
        out = out.add(&a.scale(hp.conj()))?;
    }
    Ok(out)
}

/// `φ(h) = b(h) + b*(h)`, or `φ_a(h) = a(h) + a*(h)` when `modified` is false.
pub fn field_op(basis: &FockBasis, h: &NuVector, modified: bool) -> Result<FockOperator> {
    let coeffs = mode_coefficients(basis, h)?;
    field_op_coeffs(basis, &coeffs, modified)
}

pub fn field_op_coeffs(basis: &FockBasis, h: &[Complex64], modified: bool) -> Result<FockOperator> {
    let b = smeared_annihilator(basis, h, modified)?;
    b.add(&b.adjoint())?.with_tags(Tags {
        hermitian: true,
        ..Tags::default()
    })
}

/// `e^{i s φ(h)}` as a dense-exponentiated unitary.
pub fn weyl(basis: &FockBasis, h: &NuVector, s: f64, modified: bool) -> Result<(FockOperator, ExpmStats)> {
    let phi = field_op(basis, h, modified)?;
    let (e, stats) = expm_dense(&(phi.to_dense() * Complex64::new(0.0, s)))?;
    let u = FockOperator::from_dense(&e).with_tags(Tags {
        unitary: true,
        ..Tags::default()
    })?;
    Ok((u, stats))
}

/// `e^{i s φ} v` without forming the exponential.
pub fn weyl_apply(phi: &FockOperator, s: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    expm_action(phi, Complex64::new(0.0, s), v)
}

fn check_symmetric(basis: &FockBasis, coeffs: &[f64]) -> Result<Vec<usize>> {
    if coeffs.len() != basis.n_modes() {
        return Err(FockError::DimensionMismatch(coeffs.len(), basis.n_modes()));
    }
    let neg = basis.negation_map()?;
    for (j, &k) in neg.iter().enumerate() {
        if coeffs[j] != coeffs[k] {
            return Err(FockError::AsymmetricCoefficients(basis.modes()[j]));
        }
    }
    Ok(neg)
}

/// `½ Σ_p η_p (b*_p b*_{−p} − b_{−p} b_p)` (with `a` operators when `modified` is false).
pub fn pair_generator(basis: &FockBasis, coeffs: &[f64], modified: bool) -> Result<FockOperator> {
    let neg = check_symmetric(basis, coeffs)?;
    let ann: Vec<FockOperator> = basis
        .modes()
        .iter()
        .map(|&p| {
            if modified {
                modified_annihilator(basis, p)
            } else {
                annihilator(basis, p)
            }
        })
        .collect::<Result<_>>()?;
    let mut create = FockOperator::zero(basis.dim());
    for (j, &eta) in coeffs.iter().enumerate() {
        if eta == 0.0 {
            continue;
        }
        let pair = ann[j].adjoint().matmul(&ann[neg[j]].adjoint())?;
        create = create.add(&pair.scale_real(0.5 * eta))?;
    }
    create.sub(&create.adjoint())?.with_tags(Tags {
        antihermitian: true,
        ..Tags::default()
    })
}

/// `T = exp[½ Σ_p η_p (b*_p b*_{−p} − b_{−p} b_p)]`.
pub fn bogoliubov(basis: &FockBasis, coeffs: &[f64]) -> Result<FockOperator> {
    bogoliubov_with(basis, coeffs, true)
}

pub fn bogoliubov_with(basis: &FockBasis, coeffs: &[f64], modified: bool) -> Result<FockOperator> {
    let g = pair_generator(basis, coeffs, modified)?;
    let (t, _) = expm_blocks(&g, c(1.0))?;
    t.with_tags(Tags {
        unitary: true,
        ..Tags::default()
    })
}

/// `d_p = T* b_p T − cosh(η_p) b_p − sinh(η_p) b*_{−p}`.
pub fn residual_d(basis: &FockBasis, p: Momentum, t: &FockOperator, eta_p: f64) -> Result<FockOperator> {
    let b = modified_annihilator(basis, p)?;
    let b_neg_star = modified_creator(basis, p.negate())?;
    let conj = t.adjoint().matmul(&b)?.matmul(t)?;
    conj.sub(&b.scale_real(eta_p.cosh()))?
        .sub(&b_neg_star.scale_real(eta_p.sinh()))
}

/// Explicit low-momentum set used by the cubic generator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    pub low: Vec<Momentum>,
}

impl Partition {
    /// `P_L = {p : |p|² ≤ N}` restricted to the basis modes.
    pub fn from_predicate(basis: &FockBasis) -> Self {
        let low = basis
            .modes()
            .iter()
            .copied()
            .filter(|&m| bogoliubov_core::lattice::is_low(m, basis.particles()))
            .collect();
        Self { low }
    }

    pub fn is_low(&self, m: Momentum) -> bool {
        self.low.contains(&m)
    }
}

/// Which `(r, v)` pairs of the cubic generator fit in the truncated mode set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coverage {
    pub total_pairs: usize,
    pub kept_pairs: usize,
    pub dropped: Vec<(Momentum, Momentum)>,
    /// `P_L` or `P_H` empty; the generator is zero.
    pub degenerate: bool,
}

impl Coverage {
    pub fn dropped_fraction(&self) -> f64 {
        if self.total_pairs == 0 {
            0.0
        } else {
            (self.total_pairs - self.kept_pairs) as f64 / self.total_pairs as f64
        }
    }
}

/// `A = N^{-1/2} Σ_{r∈P_H, v∈P_L} η_r [sinh(η_v) b*_{r+v} b*_{−r} b*_{−v}
/// + cosh(η_v) b*_{r+v} b*_{−r} b_v − h.c.]`.
///
/// Pairs with `r + v` outside the basis modes are dropped.
pub fn cubic_a(basis: &FockBasis, eta: &[f64], partition: &Partition) -> Result<(FockOperator, Coverage)> {
    if eta.len() != basis.n_modes() {
        return Err(FockError::DimensionMismatch(eta.len(), basis.n_modes()));
    }
    let neg = basis.negation_map()?;
    for &m in &partition.low {
        basis.mode_index(m)?;
    }
    let modes = basis.modes();
    let low: Vec<usize> = (0..modes.len()).filter(|&i| partition.is_low(modes[i])).collect();
    let high: Vec<usize> = (0..modes.len()).filter(|&i| !partition.is_low(modes[i])).collect();
    let mut coverage = Coverage {
        total_pairs: low.len() * high.len(),
        kept_pairs: 0,
        dropped: Vec::new(),
        degenerate: low.is_empty() || high.is_empty(),
    };
    let zero = FockOperator::zero(basis.dim()).with_tags(Tags {
        antihermitian: true,
        ..Tags::default()
    })?;
    if coverage.degenerate {
        return Ok((zero, coverage));
    }
    let b: Vec<FockOperator> = modes
        .iter()
        .map(|&p| modified_annihilator(basis, p))
        .collect::<Result<_>>()?;
    let bs: Vec<FockOperator> = b.iter().map(|x| x.adjoint()).collect();
    let mut sum = FockOperator::zero(basis.dim());
    for &r in &high {
        for &v in &low {
            let rv = modes[r].checked_add(modes[v]);
            let Some(rv_idx) = rv.and_then(|m| basis.mode_index(m).ok()) else {
                coverage.dropped.push((modes[r], modes[v]));
                continue;
            };
            coverage.kept_pairs += 1;
            if eta[r] == 0.0 {
                continue;
            }
            let head = bs[rv_idx].matmul(&bs[neg[r]])?;
            let cubic = head.matmul(&bs[neg[v]])?.scale_real(eta[v].sinh());
            let mixed = head.matmul(&b[v])?.scale_real(eta[v].cosh());
            sum = sum.add(&cubic.add(&mixed)?.scale_real(eta[r]))?;
        }
    }
    let a = sum
        .sub(&sum.adjoint())?
        .scale_real(1.0 / (basis.particles() as f64).sqrt())
        .with_tags(Tags {
            antihermitian: true,
            ..Tags::default()
        })?;
    Ok((a, coverage))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: [i32; 3]) -> Momentum {
        Momentum::new(n).unwrap()
    }

    fn pair_basis(n_max: usize, particles: u64) -> FockBasis {
        FockBasis::build(vec![m([1, 0, 0]), m([-1, 0, 0])], n_max, particles).unwrap()
    }

    fn unit(dim: usize, i: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::default(); dim];
        v[i] = c(1.0);
        v
    }

    #[test]
    fn ladder_examples() {
        let basis = pair_basis(4, 10);
        let p = m([1, 0, 0]);
        let a = annihilator(&basis, p).unwrap();
        let ad = creator(&basis, p).unwrap();
        let omega = unit(basis.dim(), 0);
        assert!(a.apply(&omega).iter().all(|z| z.norm() == 0.0));
        let back = a.apply(&ad.apply(&omega));
        assert_eq!(back, omega);
        let one = basis.index_of(&[1, 0]).unwrap();
        let two = basis.index_of(&[2, 0]).unwrap();
        assert!((ad.get(two, one).re - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(annihilator(&basis, m([0, 1, 0])), Err(FockError::UnknownMode(_))));
    }

    #[test]
    fn modified_commutator_expectations() {
        let basis = pair_basis(4, 10);
        let (p, q) = (m([1, 0, 0]), m([-1, 0, 0]));
        let b = modified_annihilator(&basis, p).unwrap();
        let comm = b.commutator(&b.adjoint()).unwrap();
        let omega = unit(basis.dim(), 0);
        assert!((comm.form(&omega, &omega).re - 1.0).abs() < 1e-15);
        let one_p = unit(basis.dim(), basis.index_of(&[1, 0]).unwrap());
        assert!((comm.form(&one_p, &one_p).re - 0.8).abs() < 1e-15);
        let one_q = unit(basis.dim(), basis.index_of(&[0, 1]).unwrap());
        assert!((comm.form(&one_q, &one_q).re - 0.9).abs() < 1e-15);
        let _ = q;
    }

    #[test]
    fn dgamma_of_identity_is_number_operator() {
        let basis = pair_basis(5, 5);
        let id = DMatrix::<Complex64>::identity(2, 2);
        let d = dgamma(&basis, &id).unwrap();
        let diff = d.sub(&number_op(&basis)).unwrap().max_abs();
        assert!(diff < 1e-14, "{diff}");
        assert!(matches!(
            dgamma(&basis, &DMatrix::identity(3, 3)),
            Err(FockError::DimensionMismatch(3, 2))
        ));
    }

    #[test]
    fn field_examples() {
        let basis = pair_basis(6, 6);
        let modes = vec![m([1, 0, 0]), m([-1, 0, 0])];
        let zero = NuVector::new(modes.clone(), vec![c(0.0), c(0.0)]).unwrap();
        assert_eq!(field_op(&basis, &zero, false).unwrap().nnz(), 0);
        let h = NuVector::new(modes, vec![Complex64::new(0.3, 0.4), c(-1.2)]).unwrap();
        let phi = field_op(&basis, &h, false).unwrap();
        let omega = unit(basis.dim(), 0);
        let v = phi.apply(&phi.apply(&omega));
        assert!((v[0].re - h.norm_sq).abs() < 1e-14);
        let outside = NuVector::new(vec![m([0, 0, 1])], vec![c(1.0)]).unwrap();
        assert!(matches!(field_op(&basis, &outside, true), Err(FockError::SupportViolation(_))));
    }

    #[test]
    fn weyl_at_zero_is_identity() {
        let basis = pair_basis(5, 5);
        let h = NuVector::new(vec![m([1, 0, 0])], vec![c(0.7)]).unwrap();
        let (w, _) = weyl(&basis, &h, 0.0, true).unwrap();
        assert_eq!(w.to_dense(), FockOperator::identity(basis.dim()).to_dense());
    }

    #[test]
    fn bogoliubov_with_zero_coefficients_is_identity() {
        let basis = pair_basis(6, 6);
        let t = bogoliubov(&basis, &[0.0, 0.0]).unwrap();
        assert_eq!(t.to_dense(), FockOperator::identity(basis.dim()).to_dense());
        assert!(matches!(
            bogoliubov(&basis, &[0.1, 0.2]),
            Err(FockError::AsymmetricCoefficients(_))
        ));
        let d = residual_d(&basis, m([1, 0, 0]), &t, 0.0).unwrap();
        assert!(d.max_abs() < 1e-15);
    }

    #[test]
    fn standard_bogoliubov_vacuum_occupation() {
        let eta = -0.3f64;
        let basis = pair_basis(60, 60);
        let t = bogoliubov_with(&basis, &[eta, eta], false).unwrap();
        let omega = unit(basis.dim(), 0);
        let psi = t.apply(&omega);
        let occ = number_op(&basis).form(&psi, &psi).re;
        assert!((occ - 2.0 * eta.sinh().powi(2)).abs() < 1e-12, "{occ}");
    }

    #[test]
    fn cubic_generator_on_triad() {
        let modes = vec![m([1, 0, 0]), m([-1, 0, 0]), m([0, 2, 0]), m([0, -2, 0]), m([1, 2, 0]), m([-1, -2, 0])];
        let basis = FockBasis::build(modes.clone(), 3, 20).unwrap();
        let part = Partition { low: vec![m([1, 0, 0]), m([-1, 0, 0])] };
        let eta: Vec<f64> = modes.iter().map(|p| -0.5 / p.n_sq() as f64).collect();
        let (a, cov) = cubic_a(&basis, &eta, &part).unwrap();
        assert!(a.antihermitian_residual() < 1e-12);
        assert!(a.nnz() > 0);
        assert_eq!((cov.total_pairs, cov.kept_pairs), (8, 4));
        assert!((cov.dropped_fraction() - 0.5).abs() < 1e-15);
        let (z, _) = cubic_a(&basis, &[0.0; 6], &part).unwrap();
        assert_eq!(z.nnz(), 0);
        let empty = Partition { low: vec![] };
        let (_, cov) = cubic_a(&basis, &eta, &empty).unwrap();
        assert!(cov.degenerate);
    }
}
