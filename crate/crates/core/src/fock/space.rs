// SPDX-License-Identifier: Apache-2.0

//! Occupation-number basis of `m` bosonic modes with at most `cap` particles.

use std::collections::HashMap;
use std::ops::Range;

use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Truncated bosonic Fock space `F^{≤cap}` over `m` modes.
///
/// Basis states are ordered by particle number, then lexicographically
/// descending in the occupation vector, so each number sector is a
/// contiguous index range.
#[derive(Clone, Debug)]
pub struct FockSpace {
    modes: usize,
    cap: usize,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    sector_starts: Vec<usize>,
}

/// `C(n, k)` as `u64`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

fn push_compositions(total: usize, modes: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if modes == 1 {
        prefix.push(total as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first as u8);
        push_compositions(total - first, modes - 1, prefix, out);
        prefix.pop();
    }
}

impl FockSpace {
    pub fn new(modes: usize, cap: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::validation("Fock space needs at least one mode"));
        }
        if cap > 64 {
            return Err(Error::validation("particle cap above 64 is not supported"));
        }
        let mut states = Vec::new();
        let mut sector_starts = Vec::with_capacity(cap + 2);
        for n in 0..=cap {
            sector_starts.push(states.len());
            push_compositions(n, modes, &mut Vec::with_capacity(modes), &mut states);
        }
        sector_starts.push(states.len());
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self {
            modes,
            cap,
            states,
            index,
            sector_starts,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// `Σ_{k ≤ cap} C(k+m−1, m−1)`.
    pub fn expected_dim(modes: usize, cap: usize) -> u64 {
        (0..=cap).map(|k| binomial(k + modes - 1, modes - 1)).sum()
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn particles(&self, i: usize) -> usize {
        self.states[i].iter().map(|&n| n as usize).sum()
    }

    /// Index range of the `n`-particle sector.
    pub fn sector(&self, n: usize) -> Range<usize> {
        if n > self.cap {
            return 0..0;
        }
        self.sector_starts[n]..self.sector_starts[n + 1]
    }

    pub fn vacuum(&self) -> usize {
        0
    }

    pub fn zeros<T: Real>(&self) -> FockVector<T> {
        FockVector {
            coeffs: vec![Complex::zero(); self.dim()],
        }
    }

    /// Basis vector `|occ⟩`.
    pub fn basis_vector<T: Real>(&self, occ: &[u8]) -> Result<FockVector<T>> {
        let i = self
            .index_of(occ)
            .ok_or_else(|| Error::validation(format!("occupation {occ:?} is not in the space")))?;
        let mut v = self.zeros();
        v.coeffs[i] = Complex::new(T::one(), T::zero());
        Ok(v)
    }
}

/// Coefficient vector over the basis of a [`FockSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector<T> {
    pub coeffs: Vec<C<T>>,
}

impl<T: Real> FockVector<T> {
    pub fn new(coeffs: Vec<C<T>>) -> Self {
        Self { coeffs }
    }

    pub fn norm(&self) -> T {
        Float::sqrt(self.coeffs.iter().map(|z| z.norm_sqr()).sum::<T>())
    }

    pub fn inner(&self, other: &Self) -> C<T> {
        inner(&self.coeffs, &other.coeffs)
    }

    /// `‖P_n v‖²` for each sector `n ≤ cap`.
    pub fn sector_weights(&self, space: &FockSpace) -> Vec<T> {
        (0..=space.cap())
            .map(|n| {
                self.coeffs[space.sector(n)]
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// Component in the `n`-particle sector, embedded in the full space.
    pub fn sector_part(&self, space: &FockSpace, n: usize) -> Self {
        let mut out = vec![Complex::zero(); self.coeffs.len()];
        for i in space.sector(n) {
            out[i] = self.coeffs[i];
        }
        Self { coeffs: out }
    }

    /// Largest amplitude in sectors with more than `m` particles.
    pub fn amplitude_above(&self, space: &FockSpace, m: usize) -> T {
        let start = if m >= space.cap() {
            space.dim()
        } else {
            space.sector(m).end
        };
        self.coeffs[start..]
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), Float::max)
    }

    pub fn distance(&self, other: &Self) -> T {
        Float::sqrt(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (*a - *b).norm_sqr())
                .sum::<T>(),
        )
    }
}

pub(crate) fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter()
        .zip(b)
        .fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * *y)
}
