//! Matrix exponentials: dense Padé scaling-and-squaring, block-wise
//! exponentials of sparse generators, and Taylor-based action on vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::operator::FockOperator;
use crate::{FockError, Result};

/// Diagnostics of a scaling-and-squaring run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExpmStats {
    pub norm1: f64,
    pub squarings: u32,
}

const THETA_13: f64 = 5.371_920_351_148_152;
const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const MAX_SQUARINGS: u32 = 60;

fn norm1_dense(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` by the degree-13 Padé approximant with scaling and squaring.
pub fn expm_dense(a: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, ExpmStats)> {
    let n = a.nrows();
    let norm = norm1_dense(a);
    if !norm.is_finite() {
        return Err(FockError::ExpmNonConvergence { norm, squarings: 0 });
    }
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    if squarings > MAX_SQUARINGS {
        return Err(FockError::ExpmNonConvergence { norm, squarings });
    }
    let a = a * Complex64::new(0.5f64.powi(squarings as i32), 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let b = |k: usize| Complex64::new(PADE_13[k], 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or(FockError::ExpmNonConvergence { norm, squarings })?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(FockError::ExpmNonConvergence { norm, squarings });
    }
    Ok((r, ExpmStats { norm1: norm, squarings }))
}

/// `exp(t·g)` for a sparse generator, exponentiating each connected block of
/// the sparsity graph densely. Returns the largest block diagnostics.
pub fn expm_blocks(g: &FockOperator, t: Complex64) -> Result<(FockOperator, ExpmStats)> {
    let mut triplets = Vec::new();
    let mut worst = ExpmStats::default();
    let mut local = vec![usize::MAX; g.dim()];
    let dense_g = BlockSource::new(g);
    for block in g.blocks() {
        for (k, &i) in block.iter().enumerate() {
            local[i] = k;
        }
        let m = block.len();
        let mut sub = DMatrix::<Complex64>::zeros(m, m);
        for &i in &block {
            for (c, v) in dense_g.row(i) {
                sub[(local[i], local[c])] = t * v;
            }
        }
        let (e, stats) = expm_dense(&sub)?;
        if stats.norm1 >= worst.norm1 {
            worst = stats;
        }
        for (ri, &r) in block.iter().enumerate() {
            for (ci, &c) in block.iter().enumerate() {
                let v = e[(ri, ci)];
                if v != Complex64::default() {
                    triplets.push((r, c, v));
                }
            }
        }
    }
    Ok((FockOperator::from_triplets(g.dim(), triplets), worst))
}

struct BlockSource {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl BlockSource {
    fn new(g: &FockOperator) -> Self {
        let mut rows = vec![Vec::new(); g.dim()];
        for (r, c, v) in g.entries() {
            rows[r].push((c, v));
        }
        Self { rows }
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.rows[r].iter().copied()
    }
}

/// `exp(t·g) v` by a truncated Taylor series on `⌈|t|‖g‖₁⌉` substeps.
pub fn expm_action(g: &FockOperator, t: Complex64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let norm = g.norm1() * t.norm();
    if !norm.is_finite() {
        return Err(FockError::ExpmNonConvergence { norm, squarings: 0 });
    }
    let steps = norm.ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut x = v.to_vec();
    for _ in 0..steps {
        let mut term = x.clone();
        let mut converged = false;
        for k in 1..=80 {
            term = g.apply(&term);
            let f = dt / k as f64;
            term.iter_mut().for_each(|z| *z *= f);
            let mut t_inf: f64 = 0.0;
            let mut x_inf: f64 = 0.0;
            for (xi, ti) in x.iter_mut().zip(&term) {
                *xi += ti;
                t_inf = t_inf.max(ti.norm());
                x_inf = x_inf.max(xi.norm());
            }
            if t_inf <= 1e-18 * x_inf.max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(FockError::ExpmNonConvergence {
                norm,
                squarings: steps as u32,
            });
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::c;

    fn diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn exponential_of_rotation_generator() {
        // exp(θ [[0, -1], [1, 0]]) is a rotation by θ
        for theta in [0.1, 1.0, 7.5, 40.0] {
            let a = DMatrix::from_row_slice(2, 2, &[c(0.0), c(-theta), c(theta), c(0.0)]);
            let (e, stats) = expm_dense(&a).unwrap();
            let exact = DMatrix::from_row_slice(
                2,
                2,
                &[c(theta.cos()), c(-theta.sin()), c(theta.sin()), c(theta.cos())],
            );
            assert!(diff(&e, &exact) < 1e-12, "theta {theta}");
            assert_eq!(stats.squarings > 0, theta > THETA_13);
        }
    }

    #[test]
    fn nilpotent_exponential_is_polynomial() {
        let a = DMatrix::from_row_slice(3, 3, &[c(0.0), c(2.0), c(0.0), c(0.0), c(0.0), c(3.0), c(0.0), c(0.0), c(0.0)]);
        let (e, _) = expm_dense(&a).unwrap();
        let exact = DMatrix::from_row_slice(3, 3, &[c(1.0), c(2.0), c(3.0), c(0.0), c(1.0), c(3.0), c(0.0), c(0.0), c(1.0)]);
        assert!(diff(&e, &exact) < 1e-14);
    }

    #[test]
    fn non_finite_input_is_reported() {
        let a = DMatrix::from_element(2, 2, c(f64::NAN));
        assert!(matches!(expm_dense(&a), Err(FockError::ExpmNonConvergence { .. })));
    }

    #[test]
    fn block_and_action_agree_with_dense() {
        let g = FockOperator::from_triplets(
            4,
            vec![(0, 1, c(0.7)), (1, 0, c(-0.7)), (2, 3, Complex64::new(0.0, 1.3)), (3, 2, Complex64::new(0.0, 1.3)), (3, 3, c(0.2))],
        );
        let t = Complex64::new(0.0, 2.0);
        let (blocks, _) = expm_blocks(&g, t).unwrap();
        let (dense, _) = expm_dense(&(g.to_dense() * t)).unwrap();
        assert!(diff(&blocks.to_dense(), &dense) < 1e-13);
        let v = vec![c(1.0), Complex64::new(0.0, -1.0), c(0.5), c(2.0)];
        let act = expm_action(&g, t, &v).unwrap();
        let exact = &dense * nalgebra::DVector::from_vec(v);
        for (a, b) in act.iter().zip(exact.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
