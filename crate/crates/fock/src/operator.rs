//! Sparse complex matrices on a Fock basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{FockError, Result};

/// Structural properties an operator is known to have.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tags {
    pub hermitian: bool,
    pub antihermitian: bool,
    pub unitary: bool,
}

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

/// Compressed-sparse-row complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
    pub tags: Tags,
}

impl FockOperator {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                rows.push(r);
                last = Some((r, c));
            }
        }
        let mut keep_idx = Vec::with_capacity(indices.len());
        let mut keep_val = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(values) {
            if v != Complex64::default() {
                indptr[r + 1] += 1;
                keep_idx.push(c);
                keep_val.push(v);
            }
        }
        for i in 0..dim {
            indptr[i + 1] += indptr[i];
        }
        Self {
            dim,
            indptr,
            indices: keep_idx,
            values: keep_val,
            tags: Tags::default(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new())
    }

    pub fn identity(dim: usize) -> Self {
        let mut id = Self::diagonal(&vec![Complex64::new(1.0, 0.0); dim]);
        id.tags = Tags {
            hermitian: true,
            antihermitian: false,
            unitary: true,
        };
        id
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        let n = m.nrows();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v != Complex64::default() {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.values[self.indptr[r] + k],
            Err(_) => Complex64::default(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (c, r, v.conj())).collect());
        out.tags = self.tags;
        out
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(FockError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    /// `α·self + β·other`.
    pub fn lincomb(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        self.check_dim(other)?;
        let t = self
            .entries()
            .map(|(r, c, v)| (r, c, alpha * v))
            .chain(other.entries().map(|(r, c, v)| (r, c, beta * v)))
            .collect();
        Ok(Self::from_triplets(self.dim, t))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lincomb(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lincomb(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (r, c, alpha * v)).collect())
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        self.scale(Complex64::new(alpha, 0.0))
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut acc = vec![Complex64::default(); n];
        let mut marker = vec![usize::MAX; n];
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..n {
            let mut cols: Vec<usize> = Vec::new();
            for k in self.indptr[r]..self.indptr[r + 1] {
                let (mid, a) = (self.indices[k], self.values[k]);
                for kk in other.indptr[mid]..other.indptr[mid + 1] {
                    let c = other.indices[kk];
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = Complex64::default();
                        cols.push(c);
                    }
                    acc[c] += a * other.values[kk];
                }
            }
            cols.sort_unstable();
            for c in cols {
                if acc[c] != Complex64::default() {
                    indices.push(c);
                    values.push(acc[c]);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            dim: n,
            indptr,
            indices,
            values,
            tags: Tags::default(),
        })
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// `self · v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector has wrong dimension");
        (0..self.dim)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|k| self.values[k] * v[self.indices[k]])
                    .sum()
            })
            .collect()
    }

    /// `⟨x, self·y⟩`, antilinear in `x`.
    pub fn form(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let my = self.apply(y);
        x.iter().zip(&my).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut cols = vec![0.0; self.dim];
        for (_, c, v) in self.entries() {
            cols[c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|self_rc|` with `rows[r] && cols[c]`.
    pub fn max_abs_on(&self, rows: &[bool], cols: &[bool]) -> f64 {
        self.entries()
            .filter(|&(r, c, _)| rows[r] && cols[c])
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.sub(&self.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    pub fn antihermitian_residual(&self) -> f64 {
        self.add(&self.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    /// `max |U†U − I|`.
    pub fn unitary_residual(&self) -> f64 {
        let id = Self::identity(self.dim);
        self.adjoint()
            .matmul(self)
            .and_then(|p| p.sub(&id))
            .map(|d| d.max_abs())
            .unwrap_or(f64::INFINITY)
    }

    /// Attaches tags after verifying them numerically.
    pub fn with_tags(mut self, tags: Tags) -> Result<Self> {
        let scale = self.max_abs().max(1.0);
        if tags.hermitian {
            let r = self.hermitian_residual();
            if r > HERMITIAN_TOL * scale {
                return Err(FockError::TagViolation { tag: "hermitian", residual: r });
            }
        }
        if tags.antihermitian {
            let r = self.antihermitian_residual();
            if r > HERMITIAN_TOL * scale {
                return Err(FockError::TagViolation {
                    tag: "antihermitian",
                    residual: r,
                });
            }
        }
        if tags.unitary {
            let r = self.unitary_residual();
            if r > UNITARY_TOL {
                return Err(FockError::TagViolation { tag: "unitary", residual: r });
            }
        }
        self.tags = tags;
        Ok(self)
    }

    /// Connected components of the (symmetrized) sparsity graph, each sorted.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.dim).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (r, c, _) in self.entries() {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..self.dim {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        groups.into_values().collect()
    }
}

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FockOperator {
        FockOperator::from_triplets(
            3,
            vec![
                (0, 1, Complex64::new(1.0, 2.0)),
                (2, 2, c(3.0)),
                (0, 1, c(1.0)),
                (1, 0, c(0.0)),
            ],
        )
    }

    #[test]
    fn triplets_merge_and_drop_zeros() {
        let a = sample();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 1), Complex64::new(2.0, 2.0));
        assert_eq!(a.get(1, 0), c(0.0));
    }

    #[test]
    fn matmul_matches_dense() {
        let a = sample();
        let b = a.adjoint().add(&FockOperator::identity(3)).unwrap();
        let sparse = a.matmul(&b).unwrap().to_dense();
        let dense = a.to_dense() * b.to_dense();
        assert!((sparse - dense).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn tags_are_verified() {
        let h = sample().add(&sample().adjoint()).unwrap();
        assert!(h.clone().with_tags(Tags { hermitian: true, ..Tags::default() }).is_ok());
        assert!(sample().with_tags(Tags { hermitian: true, ..Tags::default() }).is_err());
        assert!(FockOperator::identity(4).unitary_residual() == 0.0);
    }

    #[test]
    fn blocks_are_components() {
        let a = FockOperator::from_triplets(5, vec![(0, 3, c(1.0)), (4, 1, c(1.0))]);
        assert_eq!(a.blocks(), vec![vec![0, 3], vec![1, 4], vec![2]]);
    }
}
