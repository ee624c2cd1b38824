//! Momentum lattice `Λ*₊ = 2πℤ³ \ {0}` truncated to a cube, with the
//! low/high momentum split used by the cubic transformation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A nonzero lattice momentum `p = 2π n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[i32; 3]", into = "[i32; 3]")]
pub struct Momentum([i32; 3]);

impl Momentum {
    /// Returns `None` for the zero vector, which is the condensate mode and
    /// not part of the excitation lattice.
    pub fn new(n: [i32; 3]) -> Option<Self> {
        (n != [0, 0, 0]).then_some(Self(n))
    }

    pub fn n(&self) -> [i32; 3] {
        self.0
    }

    pub fn n_sq(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    /// `|p|² = 4π²|n|²`.
    pub fn p_sq(&self) -> f64 {
        4.0 * PI * PI * self.n_sq() as f64
    }

    pub fn p_abs(&self) -> f64 {
        self.p_sq().sqrt()
    }

    pub fn sup_norm(&self) -> i32 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn negate(self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }

    /// `self + other`, or `None` when the sum is the zero mode.
    pub fn checked_add(self, other: Self) -> Option<Self> {
        Self::new([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }
}

/// Free-function form of [`Momentum::negate`].
pub fn negate(m: Momentum) -> Momentum {
    m.negate()
}

impl TryFrom<[i32; 3]> for Momentum {
    type Error = String;

    fn try_from(n: [i32; 3]) -> Result<Self, Self::Error> {
        Momentum::new(n).ok_or_else(|| "the zero momentum is not an excitation mode".to_string())
    }
}

impl From<Momentum> for [i32; 3] {
    fn from(m: Momentum) -> Self {
        m.0
    }
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// All modes with `0 < |n|_∞ ≤ cutoff`, ordered lexicographically in `n`,
/// together with the split `P_L = {|p| ≤ √N}` and its complement `P_H`.
#[derive(Clone, Debug)]
pub struct ModeSet {
    modes: Vec<Momentum>,
    index: HashMap<Momentum, usize>,
    cutoff: u32,
    particles: u64,
    low: Vec<usize>,
    high: Vec<usize>,
}

impl ModeSet {
    pub fn build(cutoff: u32, particles: u64) -> Self {
        assert!(cutoff >= 1, "cutoff must be positive");
        assert!(particles >= 1, "particle number must be positive");
        let c = cutoff as i32;
        let mut modes = Vec::with_capacity(((2 * c + 1).pow(3) - 1) as usize);
        // nested loops in this order already give lexicographic order
        for n1 in -c..=c {
            for n2 in -c..=c {
                for n3 in -c..=c {
                    if let Some(m) = Momentum::new([n1, n2, n3]) {
                        modes.push(m);
                    }
                }
            }
        }
        Self::from_modes(modes, cutoff, particles)
    }

    fn from_modes(modes: Vec<Momentum>, cutoff: u32, particles: u64) -> Self {
        let index = modes.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let (low, high) = (0..modes.len()).partition(|&i| is_low(modes[i], particles));
        Self {
            modes,
            index,
            cutoff,
            particles,
            low,
            high,
        }
    }

    pub fn modes(&self) -> &[Momentum] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn particles(&self) -> u64 {
        self.particles
    }

    pub fn index_of(&self, m: Momentum) -> Option<usize> {
        self.index.get(&m).copied()
    }

    pub fn contains(&self, m: Momentum) -> bool {
        self.index.contains_key(&m)
    }

    pub fn low_set(&self) -> &[usize] {
        &self.low
    }

    pub fn high_set(&self) -> &[usize] {
        &self.high
    }

    /// Index of `-p` for every mode, in mode order.
    pub fn negation_map(&self) -> Vec<usize> {
        self.modes
            .iter()
            .map(|m| self.index[&m.negate()])
            .collect()
    }

    /// Groups mode indices into dyadic shells `|p| ∈ [2^j, 2^{j+1})`,
    /// returned as `(j, indices)` in increasing `j`.
    pub fn dyadic_shells(&self) -> Vec<(i32, Vec<usize>)> {
        let mut shells: std::collections::BTreeMap<i32, Vec<usize>> = Default::default();
        for (i, m) in self.modes.iter().enumerate() {
            let j = m.p_abs().log2().floor() as i32;
            shells.entry(j).or_default().push(i);
        }
        shells.into_iter().collect()
    }
}

/// Low-momentum predicate `4π²|n|² ≤ N`.
pub fn is_low(m: Momentum, particles: u64) -> bool {
    m.p_sq() <= particles as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_has_26_modes_and_no_low_modes() {
        let set = ModeSet::build(1, 1);
        assert_eq!(set.len(), 26);
        assert!(set.low_set().is_empty());
        assert_eq!(set.high_set().len(), 26);
    }

    #[test]
    fn unit_vectors_are_the_low_modes_at_n40() {
        let set = ModeSet::build(2, 40);
        let low: Vec<_> = set.low_set().iter().map(|&i| set.modes()[i].n_sq()).collect();
        assert_eq!(low.len(), 6);
        assert!(low.iter().all(|&q| q == 1));
    }

    #[test]
    fn closed_under_negation() {
        let set = ModeSet::build(1, 1);
        for &m in set.modes() {
            assert!(set.contains(m.negate()));
        }
        let neg = set.negation_map();
        for (i, &j) in neg.iter().enumerate() {
            assert_eq!(neg[j], i);
        }
    }

    #[test]
    fn negate_examples() {
        let m = Momentum::new([1, 0, 0]).unwrap();
        assert_eq!(negate(m).n(), [-1, 0, 0]);
        let m = Momentum::new([1, -2, 3]).unwrap();
        assert_eq!(negate(m).n(), [-1, 2, -3]);
        assert_eq!(negate(negate(m)), m);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(Momentum::new([0, 0, 0]).is_none());
        let parsed: Result<Momentum, _> = serde_json::from_str("[0,0,0]");
        assert!(parsed.is_err());
    }

    #[test]
    fn ordering_is_lexicographic_and_deterministic() {
        let a = ModeSet::build(2, 100);
        let b = ModeSet::build(2, 100);
        assert_eq!(a.modes(), b.modes());
        assert!(a.modes().windows(2).all(|w| w[0].n() < w[1].n()));
        assert_eq!(a.len(), 124);
    }

    #[test]
    fn partition_matches_predicate() {
        let set = ModeSet::build(3, 500);
        for (i, &m) in set.modes().iter().enumerate() {
            let low = set.low_set().contains(&i);
            assert_eq!(low, 4.0 * PI * PI * m.n_sq() as f64 <= 500.0);
            assert_ne!(low, set.high_set().contains(&i));
        }
    }

    #[test]
    fn dyadic_shells_cover_all_modes() {
        let set = ModeSet::build(8, 1000);
        let shells = set.dyadic_shells();
        let total: usize = shells.iter().map(|(_, v)| v.len()).sum();
        assert_eq!(total, set.len());
        assert_eq!(shells.first().unwrap().0, 2); // |p| = 2π ∈ [4, 8)
    }
}
