//! Vectors in a truncated Fock space and reproducible random states.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::FockBasis;

/// Coefficients of a Fock-space vector in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub coeffs: Vec<Complex64>,
}

impl FockVector {
    pub fn vacuum(basis: &FockBasis) -> Self {
        let mut coeffs = vec![Complex64::default(); basis.dim()];
        coeffs[basis.vacuum_index()] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn basis_state(basis: &FockBasis, occupation: &[u16]) -> Option<Self> {
        let i = basis.index_of(occupation)?;
        let mut coeffs = vec![Complex64::default(); basis.dim()];
        coeffs[i] = Complex64::new(1.0, 0.0);
        Some(Self { coeffs })
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coeffs)
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        inner(&self.coeffs, &other.coeffs)
    }
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨x, y⟩`, antilinear in `x`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Seed for one task, derived from the run seed and a stable label.
pub fn task_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with the run seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes().chain(seed.to_le_bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Normalized vectors with i.i.d. standard complex Gaussian coefficients.
pub struct RandomStates {
    rng: ChaCha8Rng,
    dim: usize,
}

impl RandomStates {
    pub fn new(seed: u64, dim: usize) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dim,
        }
    }

    pub fn next_state(&mut self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = (0..self.dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut self.rng);
                let im: f64 = StandardNormal.sample(&mut self.rng);
                Complex64::new(re, im)
            })
            .collect();
        let n = norm(&v);
        v.iter_mut().for_each(|z| *z /= n);
        v
    }
}
