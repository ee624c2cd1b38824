//! Occupation-number basis with a cap on the total occupation.

use std::collections::HashMap;

use bogoliubov_core::lattice::Momentum;

use crate::{FockError, Result};

/// Default upper bound on the basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

/// All occupation vectors `(n_1, …, n_m)` with `Σ n_i ≤ n_max`, ordered by
/// total occupation and then lexicographically (descending in the first mode).
#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: Vec<Momentum>,
    n_max: usize,
    particles: u64,
    occupations: Vec<u16>,
    totals: Vec<usize>,
    index: HashMap<Vec<u16>, usize>,
}

/// `C(n + m, m)` as a float, for dimension estimates before enumeration.
pub fn estimated_dimension(modes: usize, n_max: usize) -> f64 {
    (1..=modes).fold(1.0, |acc, i| acc * (n_max + i) as f64 / i as f64)
}

impl FockBasis {
    pub fn build(modes: Vec<Momentum>, n_max: usize, particles: u64) -> Result<Self> {
        Self::build_with_cap(modes, n_max, particles, DEFAULT_DIMENSION_CAP)
    }

    pub fn build_with_cap(modes: Vec<Momentum>, n_max: usize, particles: u64, cap: usize) -> Result<Self> {
        if n_max as u64 > particles {
            return Err(FockError::NmaxExceedsN { n_max, particles });
        }
        if n_max > u16::MAX as usize {
            return Err(FockError::InvalidInput(format!("n_max = {n_max} is too large")));
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(FockError::InvalidInput(format!("mode {m} listed twice")));
            }
        }
        let est = estimated_dimension(modes.len(), n_max);
        if est > cap as f64 {
            return Err(FockError::DimensionCap {
                dim: est.min(usize::MAX as f64) as usize,
                cap,
            });
        }
        let m = modes.len();
        let mut occupations = Vec::with_capacity(est as usize * m);
        let mut totals = Vec::with_capacity(est as usize);
        let mut current = vec![0u16; m];
        for total in 0..=n_max {
            compositions(&mut current, 0, total, &mut |occ| {
                occupations.extend_from_slice(occ);
                totals.push(total);
            });
        }
        let index = (0..totals.len())
            .map(|i| (occupations[i * m..(i + 1) * m].to_vec(), i))
            .collect();
        Ok(Self {
            modes,
            n_max,
            particles,
            occupations,
            totals,
            index,
        })
    }

    pub fn modes(&self) -> &[Momentum] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn particles(&self) -> u64 {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.totals.len()
    }

    pub fn state(&self, i: usize) -> &[u16] {
        let m = self.modes.len();
        &self.occupations[i * m..(i + 1) * m]
    }

    pub fn total(&self, i: usize) -> usize {
        self.totals[i]
    }

    pub fn index_of(&self, occupation: &[u16]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn vacuum_index(&self) -> usize {
        0
    }

    pub fn mode_index(&self, p: Momentum) -> Result<usize> {
        self.modes
            .iter()
            .position(|&m| m == p)
            .ok_or(FockError::UnknownMode(p))
    }

    /// Mask of states with total occupation `≤ n_max − d`, where identities
    /// of degree `d` are unaffected by the truncation.
    pub fn margin_mask(&self, d: usize) -> Vec<bool> {
        let cap = self.n_max.saturating_sub(d);
        let ok = d <= self.n_max;
        self.totals.iter().map(|&t| ok && t <= cap).collect()
    }

    /// Index of `-p` for each mode, if the mode list is closed under negation.
    pub fn negation_map(&self) -> Result<Vec<usize>> {
        self.modes
            .iter()
            .map(|m| {
                self.modes
                    .iter()
                    .position(|&q| q == m.negate())
                    .ok_or(FockError::NotNegationClosed(*m))
            })
            .collect()
    }
}

fn compositions(current: &mut [u16], pos: usize, remaining: usize, emit: &mut impl FnMut(&[u16])) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u16;
        emit(current);
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            emit(current);
        }
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k as u16;
        compositions(current, pos + 1, remaining - k, emit);
    }
    current[pos] = 0;
}
