// SPDX-License-Identifier: Apache-2.0

//! Sparse operators on a [`FockSpace`] built from normal-ordered monomials.
//!
//! A monomial `c · a*_{p₁}…a*_{pᵢ} a_{q₁}…a_{qⱼ}` is applied exactly to each
//! basis state; anything raised above the particle cap is dropped. Because
//! every operator is assembled from normal-ordered products rather than from
//! products of truncated matrices, truncation never leaks into matrix
//! elements below the cap.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{Float, Zero};
use rayon::prelude::*;

use super::space::{FockSpace, FockVector};
use crate::error::{Error, Result};
use crate::scalar::{LinalgReal, Real, C};

/// `coeff · a*_{create[0]} … a*_{create[k]} a_{annihilate[0]} … a_{annihilate[l]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial<T> {
    pub coeff: C<T>,
    pub create: Vec<usize>,
    pub annihilate: Vec<usize>,
}

impl<T: Real> Monomial<T> {
    pub fn new(coeff: C<T>, create: &[usize], annihilate: &[usize]) -> Self {
        Self {
            coeff,
            create: create.to_vec(),
            annihilate: annihilate.to_vec(),
        }
    }

    /// Particle-number change.
    pub fn shift(&self) -> isize {
        self.create.len() as isize - self.annihilate.len() as isize
    }

    /// Applies the monomial to `|occ⟩`; `None` if the result vanishes or exceeds `cap`.
    fn apply(&self, occ: &[u8], cap: usize, scratch: &mut Vec<u8>) -> Option<T> {
        scratch.clear();
        scratch.extend_from_slice(occ);
        let mut amp = T::one();
        for &q in self.annihilate.iter().rev() {
            let n = scratch[q];
            if n == 0 {
                return None;
            }
            amp = amp * Float::sqrt(T::from_usize_lossy(n as usize));
            scratch[q] = n - 1;
        }
        for &p in self.create.iter().rev() {
            let n = scratch[p] + 1;
            amp = amp * Float::sqrt(T::from_usize_lossy(n as usize));
            scratch[p] = n;
        }
        let total: usize = scratch.iter().map(|&n| n as usize).sum();
        (total <= cap).then_some(amp)
    }
}

/// Compressed-sparse-row complex matrix acting on a Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix<T> {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C<T>>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indptr: vec![0; dim + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![T::one(); dim])
    }

    pub fn diagonal(d: &[T]) -> Self {
        Self {
            dim: d.len(),
            indptr: (0..=d.len()).collect(),
            indices: (0..d.len()).collect(),
            values: d.iter().map(|x| Complex::new(*x, T::zero())).collect(),
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed in input order.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C<T>)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                let top = values.len() - 1;
                values[top] = values[top] + v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        Self {
            dim,
            indptr,
            indices,
            values,
        }
    }

    /// `Σ_terms right(n_in) · left(n_out) · monomial` on `space`.
    pub fn assemble(
        space: &FockSpace,
        terms: &[Monomial<T>],
        left: impl Fn(usize) -> T + Sync,
        right: impl Fn(usize) -> T + Sync,
    ) -> Self {
        let cap = space.cap();
        let triplets: Vec<(usize, usize, C<T>)> = (0..space.dim())
            .into_par_iter()
            .flat_map_iter(|col| {
                let occ = space.state(col);
                let n_in = space.particles(col);
                let r = right(n_in);
                let mut scratch = Vec::with_capacity(occ.len());
                let mut out = Vec::new();
                if r == T::zero() {
                    return out.into_iter();
                }
                for t in terms {
                    if t.coeff.is_zero() {
                        continue;
                    }
                    if let Some(amp) = t.apply(occ, cap, &mut scratch) {
                        let row = space.index_of(&scratch).expect("state within cap");
                        let n_out = (n_in as isize + t.shift()) as usize;
                        let f = left(n_out) * r * amp;
                        if f != T::zero() {
                            out.push((row, col, t.coeff * f));
                        }
                    }
                }
                out.into_iter()
            })
            .collect();
        Self::from_triplets(space.dim(), triplets)
    }

    pub fn from_terms(space: &FockSpace, terms: &[Monomial<T>]) -> Self {
        Self::assemble(space, terms, |_| T::one(), |_| T::one())
    }

    pub fn from_dense(m: &DMatrix<C<T>>) -> Self
    where
        T: LinalgReal,
    {
        let mut trip = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if !v.is_zero() {
                    trip.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), trip)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> C<T> {
        let row = self.indptr[r]..self.indptr[r + 1];
        match self.indices[row.clone()].binary_search(&c) {
            Ok(k) => self.values[row.start + k],
            Err(_) => Complex::zero(),
        }
    }

    /// `(row, col, value)` for every stored entry, rows ascending.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C<T>)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn apply(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut y = vec![Complex::zero(); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[C<T>], y: &mut [C<T>]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex::zero();
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc = acc + self.values[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    pub fn apply_vec(&self, v: &FockVector<T>) -> FockVector<T> {
        FockVector::new(self.apply(&v.coeffs))
    }

    pub fn adjoint(&self) -> Self {
        let trip = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, trip)
    }

    pub fn scale(&self, c: C<T>) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v = *v * c;
        }
        out
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: C<T>, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let trip = self
            .entries()
            .chain(other.entries().map(|(r, col, v)| (r, col, v * c)))
            .collect();
        Self::from_triplets(self.dim, trip)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(Complex::new(T::one(), T::zero()), other)
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let mut trip = Vec::new();
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let mid = self.indices[k];
                let a = self.values[k];
                for j in other.indptr[mid]..other.indptr[mid + 1] {
                    trip.push((r, other.indices[j], a * other.values[j]));
                }
            }
        }
        Self::from_triplets(self.dim, trip)
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other)
            .add_scaled(Complex::new(-T::one(), T::zero()), &other.matmul(self))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(T::zero(), Float::max)
    }

    /// `max |self − other|` entrywise.
    pub fn max_diff(&self, other: &Self) -> T {
        self.add_scaled(Complex::new(-T::one(), T::zero()), other)
            .max_abs()
    }

    /// `max |A − A*|`.
    pub fn hermiticity_residual(&self) -> T {
        self.max_diff(&self.adjoint())
    }

    pub fn require_hermitian(&self, what: &str, tol: T) -> Result<()> {
        let r = self.hermiticity_residual();
        if r > tol {
            return Err(Error::validation(format!(
                "{what} is not Hermitian: max |A − A*| = {:.3e}",
                r.to_f64_lossy()
            )));
        }
        Ok(())
    }

    /// `P A P` for the projection onto states whose index satisfies `keep`.
    pub fn compress(&self, keep: impl Fn(usize) -> bool) -> Self {
        let trip = self
            .entries()
            .filter(|(r, c, _)| keep(*r) && keep(*c))
            .collect();
        Self::from_triplets(self.dim, trip)
    }

    pub fn to_dense(&self) -> DMatrix<C<T>>
    where
        T: LinalgReal,
    {
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex::zero());
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// Coordinate-list text: a `# dim nnz` header, then one `row col re im`
    /// line per stored entry (0-based, rows ascending, columns ascending within a row).
    pub fn to_coo_text(&self) -> String {
        let mut s = format!("# {} {}\n", self.dim, self.nnz());
        for (r, c, v) in self.entries() {
            let _ = writeln!(
                s,
                "{} {} {:.17e} {:.17e}",
                r,
                c,
                v.re.to_f64_lossy(),
                v.im.to_f64_lossy()
            );
        }
        s
    }

    pub fn from_coo_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty operator dump".into()))?;
        let dims: Vec<usize> = header
            .trim_start_matches('#')
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::Format("bad operator dump header".into()))
            })
            .collect::<Result<_>>()?;
        if dims.len() != 2 {
            return Err(Error::Format(
                "operator dump header must be `# dim nnz`".into(),
            ));
        }
        let mut trip = Vec::with_capacity(dims[1]);
        for l in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            let bad = || Error::Format(format!("bad operator dump line `{l}`"));
            if f.len() != 4 {
                return Err(bad());
            }
            let r: usize = f[0].parse().map_err(|_| bad())?;
            let c: usize = f[1].parse().map_err(|_| bad())?;
            let re: f64 = f[2].parse().map_err(|_| bad())?;
            let im: f64 = f[3].parse().map_err(|_| bad())?;
            if r >= dims[0] || c >= dims[0] {
                return Err(bad());
            }
            trip.push((r, c, Complex::new(T::lit(re), T::lit(im))));
        }
        Ok(Self::from_triplets(dims[0], trip))
    }
}

/// `a*_mode`.
pub fn build_creation<T: Real>(space: &FockSpace, mode: usize) -> Result<OperatorMatrix<T>> {
    check_mode(space, mode)?;
    Ok(OperatorMatrix::from_terms(
        space,
        &[Monomial::new(
            Complex::new(T::one(), T::zero()),
            &[mode],
            &[],
        )],
    ))
}

/// `a_mode`.
pub fn build_annihilation<T: Real>(space: &FockSpace, mode: usize) -> Result<OperatorMatrix<T>> {
    check_mode(space, mode)?;
    Ok(OperatorMatrix::from_terms(
        space,
        &[Monomial::new(
            Complex::new(T::one(), T::zero()),
            &[],
            &[mode],
        )],
    ))
}

fn check_mode(space: &FockSpace, mode: usize) -> Result<()> {
    if mode >= space.modes() {
        return Err(Error::validation(format!(
            "mode {mode} out of range for {} modes",
            space.modes()
        )));
    }
    Ok(())
}

/// `𝒩 = Σ a*_p a_p`.
pub fn number_operator<T: Real>(space: &FockSpace) -> OperatorMatrix<T> {
    let d: Vec<T> = (0..space.dim())
        .map(|i| T::from_usize_lossy(space.particles(i)))
        .collect();
    OperatorMatrix::diagonal(&d)
}

/// `a(f) = Σ conj(f_p) a_p`.
pub fn annihilation_of<T: Real>(f: &[C<T>]) -> Vec<Monomial<T>> {
    f.iter()
        .enumerate()
        .map(|(p, c)| Monomial::new(c.conj(), &[], &[p]))
        .collect()
}

/// `a*(f) = Σ f_p a*_p`.
pub fn creation_of<T: Real>(f: &[C<T>]) -> Vec<Monomial<T>> {
    f.iter()
        .enumerate()
        .map(|(p, c)| Monomial::new(*c, &[p], &[]))
        .collect()
}

/// `dΓ(A) = Σ A_{pq} a*_p a_q` for a row-major `m×m` matrix.
pub fn second_quantize<T: Real>(a: &[C<T>], modes: usize) -> Vec<Monomial<T>> {
    let mut out = Vec::with_capacity(modes * modes);
    for p in 0..modes {
        for q in 0..modes {
            out.push(Monomial::new(a[p * modes + q], &[p], &[q]));
        }
    }
    out
}
