// SPDX-License-Identifier: Apache-2.0

//! Periodic grids, continuum-normalized 3D Fourier transforms, spectral
//! derivatives and Fourier-multiplier convolution.
//!
//! Conventions. Positions are `x_j = -L/2 + j·dx`, `j = 0..n`. The forward
//! transform is `f̂(k) = dx³ Σ_x f(x) e^{-ik·(x - x_0)}` and the inverse is
//! `f(x) = L⁻³ Σ_k f̂(k) e^{ik·(x - x_0)}`, so a multiplier table holding the
//! continuum transform `ŵ(k)` sampled at grid wavenumbers implements the
//! periodised convolution `w ∗ f` with no extra factors. Frequency-space
//! arrays use the standard FFT ordering along each axis.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Float, Zero};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Cubic periodic box `[-L/2, L/2)³` sampled with `n` points per axis.
#[derive(Clone, Copy, PartialEq)]
pub struct Grid3<T> {
    n: usize,
    length: T,
}

impl<T: fmt::Debug> fmt::Debug for Grid3<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid3(n={}, L={:?})", self.n, self.length)
    }
}

impl<T: Real> Grid3<T> {
    pub fn new(n: usize, length: T) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::validation(format!(
                "grid size n must be even and >= 4, got {n}"
            )));
        }
        if !n.is_power_of_two() {
            return Err(Error::validation(format!(
                "grid size n must be a power of two, got {n}"
            )));
        }
        if !(length > T::zero()) || !Float::is_finite(length) {
            return Err(Error::validation(format!(
                "box length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { n, length })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> T {
        self.length
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dx(&self) -> T {
        self.length / T::from_usize_lossy(self.n)
    }

    /// Wavenumber spacing `2π/L`.
    #[inline]
    pub fn dk(&self) -> T {
        T::TAU() / self.length
    }

    #[inline]
    pub fn volume(&self) -> T {
        self.length * self.length * self.length
    }

    /// Volume element `dx³`.
    #[inline]
    pub fn cell_volume(&self) -> T {
        let dx = self.dx();
        dx * dx * dx
    }

    /// Flat index, `x` fastest.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n * (iy + self.n * iz)
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    /// Signed integer mode number of FFT slot `j`.
    #[inline]
    pub fn mode_number(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// FFT slot holding signed mode `m` (taken modulo `n`).
    #[inline]
    pub fn slot_of_mode(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    /// Wavenumbers of one axis in FFT order.
    pub fn axis_wavenumbers(&self) -> Vec<T> {
        let dk = self.dk();
        (0..self.n)
            .map(|j| dk * T::from_i64(self.mode_number(j)).unwrap())
            .collect()
    }

    /// Wavenumbers of one axis sorted increasingly, `(2π/L)·{-n/2, …, n/2-1}`.
    pub fn centered_wavenumbers(&self) -> Vec<T> {
        let dk = self.dk();
        let half = (self.n / 2) as i64;
        (-half..half)
            .map(|m| dk * T::from_i64(m).unwrap())
            .collect()
    }

    /// Positions of one axis.
    pub fn axis_positions(&self) -> Vec<T> {
        let dx = self.dx();
        let half = self.length / T::lit(2.0);
        (0..self.n)
            .map(|j| -half + dx * T::from_usize_lossy(j))
            .collect()
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [T; 3] {
        let [ix, iy, iz] = self.unravel(idx);
        let dx = self.dx();
        let half = self.length / T::lit(2.0);
        [
            -half + dx * T::from_usize_lossy(ix),
            -half + dx * T::from_usize_lossy(iy),
            -half + dx * T::from_usize_lossy(iz),
        ]
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> [T; 3] {
        let [ix, iy, iz] = self.unravel(idx);
        let dk = self.dk();
        [
            dk * T::from_i64(self.mode_number(ix)).unwrap(),
            dk * T::from_i64(self.mode_number(iy)).unwrap(),
            dk * T::from_i64(self.mode_number(iz)).unwrap(),
        ]
    }

    #[inline]
    pub fn k_squared(&self, idx: usize) -> T {
        let [a, b, c] = self.wavevector(idx);
        a * a + b * b + c * c
    }

    /// Flat frequency index of `-k` for the slot `idx`.
    #[inline]
    pub fn negated(&self, idx: usize) -> usize {
        let [ix, iy, iz] = self.unravel(idx);
        let n = self.n;
        self.index((n - ix) % n, (n - iy) % n, (n - iz) % n)
    }
}

/// Which representation a [`Field`]'s samples are in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Position,
    Frequency,
}

/// Complex scalar field on a [`Grid3`].
#[derive(Clone, Debug)]
pub struct Field<T> {
    pub grid: Grid3<T>,
    pub values: Vec<C<T>>,
    pub space: Space,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: Grid3<T>, space: Space) -> Self {
        Self {
            grid,
            values: vec![Complex::zero(); grid.len()],
            space,
        }
    }

    pub fn from_values(grid: Grid3<T>, values: Vec<C<T>>, space: Space) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::usage(format!(
                "field has {} samples but grid holds {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            space,
        })
    }

    /// Samples `f(x, y, z)` at the grid points.
    pub fn from_fn(grid: Grid3<T>, f: impl Fn([T; 3]) -> C<T>) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self {
            grid,
            values,
            space: Space::Position,
        }
    }

    fn require(&self, space: Space, op: &str) -> Result<()> {
        if self.space != space {
            return Err(Error::usage(format!(
                "{op} expects a {space:?}-space field, got {:?}",
                self.space
            )));
        }
        Ok(())
    }

    /// `∫|f|²`, using the quadrature weight appropriate to the field's space.
    pub fn norm_sqr(&self) -> T {
        let s: T = self.values.iter().map(|z| z.norm_sqr()).sum();
        match self.space {
            Space::Position => s * self.grid.cell_volume(),
            Space::Frequency => s / self.grid.volume(),
        }
    }

    pub fn norm(&self) -> T {
        Float::sqrt(self.norm_sqr())
    }

    /// `⟨self, other⟩ = ∫ conj(self)·other` (both fields in the same space).
    pub fn inner(&self, other: &Field<T>) -> Result<C<T>> {
        check_same_grid(&self.grid, &other.grid)?;
        if self.space != other.space {
            return Err(Error::usage("inner product of fields in different spaces"));
        }
        let s: C<T> = self
            .values
            .iter()
            .zip(&other.values)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b);
        let w = match self.space {
            Space::Position => self.grid.cell_volume(),
            Space::Frequency => T::one() / self.grid.volume(),
        };
        Ok(s * w)
    }

    /// `‖self - other‖` in the field's own weighting.
    pub fn distance(&self, other: &Field<T>) -> Result<T> {
        check_same_grid(&self.grid, &other.grid)?;
        if self.space != other.space {
            return Err(Error::usage("distance between fields in different spaces"));
        }
        let s: T = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let w = match self.space {
            Space::Position => self.grid.cell_volume(),
            Space::Frequency => T::one() / self.grid.volume(),
        };
        Ok(Float::sqrt(s * w))
    }

    pub fn scale(&mut self, c: C<T>) {
        for v in &mut self.values {
            *v = *v * c;
        }
    }

    /// Pointwise `|f|²` as a complex field with zero imaginary part.
    pub fn density(&self) -> Result<Field<T>> {
        self.require(Space::Position, "density")?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .map(|z| Complex::new(z.norm_sqr(), T::zero()))
                .collect(),
            space: Space::Position,
        })
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), Float::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| Float::is_finite(z.re) && Float::is_finite(z.im))
    }
}

pub(crate) fn check_same_grid<T: Real>(a: &Grid3<T>, b: &Grid3<T>) -> Result<()> {
    if a != b {
        return Err(Error::usage(format!("grid mismatch: {a:?} vs {b:?}")));
    }
    Ok(())
}

/// Real Fourier multiplier tabulated at the wavevectors of a grid (FFT order).
#[derive(Clone, Debug)]
pub struct MultiplierTable<T> {
    pub grid: Grid3<T>,
    pub values: Vec<T>,
}

impl<T: Real> MultiplierTable<T> {
    pub fn from_fn(grid: Grid3<T>, f: impl Fn([T; 3]) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.wavevector(i))).collect();
        Self { grid, values }
    }

    /// Parallel tabulation; the result is independent of scheduling.
    pub fn from_fn_par(grid: Grid3<T>, f: impl Fn([T; 3]) -> T + Sync) -> Self {
        use rayon::prelude::*;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.wavevector(i)))
            .collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid3<T>, c: T) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: Grid3<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::usage("multiplier table size does not match grid"));
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn at_zero(&self) -> T {
        self.values[0]
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .map(|v| Float::abs(*v))
            .fold(T::zero(), Float::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), Float::min)
    }

    pub fn max(&self) -> T {
        self.values
            .iter()
            .copied()
            .fold(T::neg_infinity(), Float::max)
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: T, other: &MultiplierTable<T>) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| *a + c * *b)
                .collect(),
        })
    }

    /// Pointwise product, e.g. to apply a dealiasing mask.
    pub fn product(&self, other: &MultiplierTable<T>) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| *a * *b)
                .collect(),
        })
    }

    /// Two-thirds-rule mask: zero every mode with `|m_j| > n/3` on some axis.
    pub fn two_thirds_mask(grid: Grid3<T>) -> Self {
        let cutoff = grid.n() as i64 / 3;
        let values = (0..grid.len())
            .map(|i| {
                let [a, b, c] = grid.unravel(i);
                let keep = [a, b, c]
                    .iter()
                    .all(|&j| grid.mode_number(j).abs() <= cutoff);
                if keep {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect();
        Self { grid, values }
    }
}

/// Reusable 3D transform plan; immutable and shareable across threads.
#[derive(Clone)]
pub struct FourierPlan<T: Real> {
    grid: Grid3<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    k_squared: Arc<Vec<T>>,
}

impl<T: Real> fmt::Debug for FourierPlan<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierPlan")
            .field("grid", &self.grid)
            .finish()
    }
}

impl<T: Real> FourierPlan<T> {
    pub fn new(grid: Grid3<T>) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        let k_squared = (0..grid.len()).map(|i| grid.k_squared(i)).collect();
        Self {
            grid,
            forward,
            inverse,
            k_squared: Arc::new(k_squared),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid3<T> {
        &self.grid
    }

    /// `|k|²` per frequency slot.
    #[inline]
    pub fn k_squared(&self) -> &[T] {
        &self.k_squared
    }

    fn transform_in_place(&self, data: &mut [C<T>], fft: &Arc<dyn Fft<T>>) {
        let n = self.grid.n();
        // x lines are contiguous
        fft.process(data);
        let mut lines = vec![Complex::zero(); data.len()];
        // y lines
        for iz in 0..n {
            for ix in 0..n {
                let base = (iz * n + ix) * n;
                for iy in 0..n {
                    lines[base + iy] = data[ix + n * (iy + n * iz)];
                }
            }
        }
        fft.process(&mut lines);
        for iz in 0..n {
            for ix in 0..n {
                let base = (iz * n + ix) * n;
                for iy in 0..n {
                    data[ix + n * (iy + n * iz)] = lines[base + iy];
                }
            }
        }
        // z lines
        for iy in 0..n {
            for ix in 0..n {
                let base = (iy * n + ix) * n;
                for iz in 0..n {
                    lines[base + iz] = data[ix + n * (iy + n * iz)];
                }
            }
        }
        fft.process(&mut lines);
        for iy in 0..n {
            for ix in 0..n {
                let base = (iy * n + ix) * n;
                for iz in 0..n {
                    data[ix + n * (iy + n * iz)] = lines[base + iz];
                }
            }
        }
    }

    /// Forward transform in place on raw position samples (no space bookkeeping).
    pub(crate) fn forward_raw(&self, data: &mut [C<T>]) {
        self.transform_in_place(data, &self.forward);
        let w = self.grid.cell_volume();
        for v in data.iter_mut() {
            *v = *v * w;
        }
    }

    pub(crate) fn inverse_raw(&self, data: &mut [C<T>]) {
        self.transform_in_place(data, &self.inverse);
        let w = T::one() / self.grid.volume();
        for v in data.iter_mut() {
            *v = *v * w;
        }
    }

    fn check(&self, f: &Field<T>) -> Result<()> {
        check_same_grid(&self.grid, &f.grid)
    }

    pub fn forward(&self, f: &Field<T>) -> Result<Field<T>> {
        self.check(f)?;
        f.require(Space::Position, "fft_forward")?;
        let mut values = f.values.clone();
        self.forward_raw(&mut values);
        Ok(Field {
            grid: f.grid,
            values,
            space: Space::Frequency,
        })
    }

    pub fn inverse(&self, f: &Field<T>) -> Result<Field<T>> {
        self.check(f)?;
        f.require(Space::Frequency, "fft_inverse")?;
        let mut values = f.values.clone();
        self.inverse_raw(&mut values);
        Ok(Field {
            grid: f.grid,
            values,
            space: Space::Position,
        })
    }

    /// Applies a frequency-space multiplier given as a per-slot closure, returning a
    /// field in the same space as the input.
    fn apply_multiplier(&self, f: &Field<T>, m: impl Fn(usize) -> T) -> Result<Field<T>> {
        self.check(f)?;
        let mut values = f.values.clone();
        if f.space == Space::Position {
            self.forward_raw(&mut values);
        }
        for (i, v) in values.iter_mut().enumerate() {
            *v = *v * m(i);
        }
        if f.space == Space::Position {
            self.inverse_raw(&mut values);
        }
        Ok(Field {
            grid: f.grid,
            values,
            space: f.space,
        })
    }

    /// Spectral Laplacian, multiplier `-|k|²`.
    pub fn laplacian(&self, f: &Field<T>) -> Result<Field<T>> {
        let ks = &self.k_squared;
        self.apply_multiplier(f, |i| -ks[i])
    }

    /// `F⁻¹(m · F f)`.
    pub fn convolve(&self, f: &Field<T>, m: &MultiplierTable<T>) -> Result<Field<T>> {
        check_same_grid(&self.grid, &m.grid)?;
        self.apply_multiplier(f, |i| m.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid3<f64>, seed: u64) -> Field<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Field::from_values(grid, values, Space::Position).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid3::new(6, 1.0).is_err());
        assert!(Grid3::new(2, 1.0).is_err());
        assert!(Grid3::new(7, 1.0).is_err());
        assert!(Grid3::new(8, 0.0).is_err());
        assert!(Grid3::new(8, -1.0).is_err());
        assert!(Grid3::new(8, 2.0).is_ok());
    }

    #[test]
    fn wavenumbers_contain_zero_once() {
        let g = Grid3::new(8, 4.0).unwrap();
        let k = g.axis_wavenumbers();
        assert_eq!(k.iter().filter(|&&v| v == 0.0).count(), 1);
        let mut sorted = k.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sorted, g.centered_wavenumbers());
        assert_eq!(sorted[0], -4.0 * g.dk());
        assert_eq!(sorted[7], 3.0 * g.dk());
    }

    #[test]
    fn constant_maps_to_delta() {
        let g = Grid3::new(8, 3.0).unwrap();
        let plan = FourierPlan::new(g);
        let c = Complex::new(0.7, -0.2);
        let f = Field::from_fn(g, |_| c);
        let fh = plan.forward(&f).unwrap();
        let expected = c * g.volume();
        assert!((fh.values[0] - expected).norm() < 1e-12);
        for v in &fh.values[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_single_coefficient() {
        let g = Grid3::new(8, 5.0).unwrap();
        let plan = FourierPlan::new(g);
        let k = g.dk();
        let f = Field::from_fn(g, |x| crate::scalar::cis(k * x[0]));
        let fh = plan.forward(&f).unwrap();
        let target = g.index(1, 0, 0);
        for (i, v) in fh.values.iter().enumerate() {
            if i == target {
                assert!((v.norm() - g.volume()).abs() < 1e-10);
            } else {
                assert!(v.norm() < 1e-10, "slot {i}: {v}");
            }
        }
    }

    #[test]
    fn wrong_space_is_usage_error() {
        let g = Grid3::new(4, 1.0).unwrap();
        let plan = FourierPlan::new(g);
        let f = Field::zeros(g, Space::Frequency);
        assert!(matches!(plan.forward(&f), Err(Error::Usage(_))));
        let p = Field::zeros(g, Space::Position);
        assert!(matches!(plan.inverse(&p), Err(Error::Usage(_))));
    }

    #[test]
    fn grid_mismatch_is_usage_error() {
        let g = Grid3::new(4, 1.0).unwrap();
        let h = Grid3::new(4, 2.0).unwrap();
        let plan = FourierPlan::new(g);
        let m = MultiplierTable::constant(h, 1.0);
        let f = Field::zeros(g, Space::Position);
        assert!(matches!(plan.convolve(&f, &m), Err(Error::Usage(_))));
    }

    #[test]
    fn laplacian_eigenfunctions() {
        let g = Grid3::new(16, 6.0).unwrap();
        let plan = FourierPlan::new(g);
        let k = g.dk();
        let f = Field::from_fn(g, |x| crate::scalar::cis(k * x[0]));
        let lf = plan.laplacian(&f).unwrap();
        for (a, b) in lf.values.iter().zip(&f.values) {
            assert!((a + b * (k * k)).norm() < 1e-12);
        }
        let s = Field::from_fn(g, |x| Complex::new((k * x[1]).sin(), 0.0));
        let ls = plan.laplacian(&s).unwrap();
        for (a, b) in ls.values.iter().zip(&s.values) {
            assert!((a + b * (k * k)).norm() < 1e-12);
        }
        let c = Field::from_fn(g, |_| Complex::new(2.5, 1.0));
        assert!(plan.laplacian(&c).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn laplacian_of_real_field_is_real() {
        let g = Grid3::new(16, 4.0).unwrap();
        let plan = FourierPlan::new(g);
        let mut f = random_field(g, 3);
        for v in &mut f.values {
            v.im = 0.0;
        }
        let lf = plan.laplacian(&f).unwrap();
        let scale = lf.max_abs();
        assert!(lf.values.iter().all(|z| z.im.abs() <= 1e-12 * scale));
    }

    #[test]
    fn unit_multiplier_is_identity() {
        let g = Grid3::new(8, 2.0).unwrap();
        let plan = FourierPlan::new(g);
        let f = random_field(g, 11);
        let out = plan
            .convolve(&f, &MultiplierTable::constant(g, 1.0))
            .unwrap();
        assert!(out.distance(&f).unwrap() < 1e-12 * f.norm());
    }

    #[test]
    fn gaussian_convolution_matches_closed_form() {
        // w: normalized Gaussian of variance s², f: Gaussian of variance v;
        // w ∗ f = (v/(v+s²))^{3/2} exp(-|x|²/(2(v+s²))).
        let g = Grid3::new(64, 20.0).unwrap();
        let plan = FourierPlan::new(g);
        let (s2, v) = (0.5f64, 1.5f64);
        let f = Field::from_fn(g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            Complex::new((-r2 / (2.0 * v)).exp(), 0.0)
        });
        let w_hat = MultiplierTable::from_fn(g, |k| {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            (-s2 * k2 / 2.0).exp()
        });
        let out = plan.convolve(&f, &w_hat).unwrap();
        let pref = (v / (v + s2)).powf(1.5);
        let mut worst = 0.0f64;
        for i in 0..g.len() {
            let x = g.position(i);
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            let exact = pref * (-r2 / (2.0 * (v + s2))).exp();
            worst = worst.max((out.values[i] - Complex::new(exact, 0.0)).norm());
        }
        assert!(worst < 1e-8, "max error {worst}");
    }

    #[test]
    fn dealias_mask_keeps_low_modes() {
        let g = Grid3::new(8, 1.0).unwrap();
        let m = MultiplierTable::two_thirds_mask(g);
        assert_eq!(m.at_zero(), 1.0);
        assert_eq!(m.values[g.index(2, 0, 0)], 1.0);
        assert_eq!(m.values[g.index(3, 0, 0)], 0.0);
        assert_eq!(m.values[g.index(4, 0, 0)], 0.0);
    }

    #[test]
    fn f32_round_trip() {
        let g = Grid3::<f32>::new(8, 2.0).unwrap();
        let plan = FourierPlan::new(g);
        let f = Field::from_fn(g, |x| Complex::new(x[0].cos(), x[1] * x[2]));
        let back = plan.inverse(&plan.forward(&f).unwrap()).unwrap();
        assert!(back.distance(&f).unwrap() < 1e-5 * f.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn round_trip_and_parseval(seed in any::<u64>(), which in 0usize..3) {
            let n = [8usize, 16, 32][which];
            let g = Grid3::new(n, 3.7).unwrap();
            let plan = FourierPlan::new(g);
            let f = random_field(g, seed);
            let fh = plan.forward(&f).unwrap();
            let back = plan.inverse(&fh).unwrap();
            prop_assert!(back.distance(&f).unwrap() <= 1e-12 * f.norm());
            let rel = (fh.norm_sqr() - f.norm_sqr()).abs() / f.norm_sqr();
            prop_assert!(rel <= 1e-12, "parseval rel {}", rel);
        }

        #[test]
        fn convolution_is_linear(seed in any::<u64>(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
            let g = Grid3::new(8, 2.0).unwrap();
            let plan = FourierPlan::new(g);
            let f = random_field(g, seed);
            let h = random_field(g, seed.wrapping_add(1));
            let m = MultiplierTable::from_fn(g, |k| 1.0 / (1.0 + k[0] * k[0]) - 0.3 * k[2].cos());
            let mut combo = f.clone();
            for (c, (a, b)) in combo.values.iter_mut().zip(f.values.iter().zip(&h.values)) {
                *c = a * alpha + b * beta;
            }
            let lhs = plan.convolve(&combo, &m).unwrap();
            let cf = plan.convolve(&f, &m).unwrap();
            let ch = plan.convolve(&h, &m).unwrap();
            let mut rhs = cf.clone();
            for (r, (a, b)) in rhs.values.iter_mut().zip(cf.values.iter().zip(&ch.values)) {
                *r = a * alpha + b * beta;
            }
            prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-12 * (1.0 + combo.norm()));
        }
    }
}
