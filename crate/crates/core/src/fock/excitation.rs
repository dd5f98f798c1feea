// SPDX-License-Identifier: Apache-2.0

//! The excitation map `U_N` from the `N`-particle sector onto the Fock space
//! of excitations orthogonal to a condensate vector `u`, its adjoint, and its
//! time derivative along a moving `u`.
//!
//! With `a(u)` the annihilator of the condensate mode and
//! `Γ_k(Q) = Π_{j=1..k}(1 − 𝒩_u/j)` the projection of the `k`-sector onto
//! states with no particle in `u`,
//!
//! `U_N Ψ = ⊕_k Γ_k(Q) a(u)^{N−k} Ψ / √((N−k)!)`,
//! `U_N* Φ = Σ_k a*(u)^{N−k} Γ_k(Q) φ_k / √((N−k)!)`.

use num_complex::Complex;
use num_traits::{Float, Zero};

use super::operator::{annihilation_of, creation_of, second_quantize, OperatorMatrix};
use super::space::{FockSpace, FockVector};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Largest admissible `|‖u‖ − 1|`.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// `U_N` for a fixed condensate vector on a given Fock space (`cap ≥ N`).
#[derive(Clone, Debug)]
pub struct ExcitationMap<'a, T> {
    space: &'a FockSpace,
    particles: usize,
    u: Vec<C<T>>,
    a_u: OperatorMatrix<T>,
    ad_u: OperatorMatrix<T>,
    n_u: OperatorMatrix<T>,
}

fn rank_one<T: Real>(x: &[C<T>], y: &[C<T>]) -> Vec<C<T>> {
    let m = x.len();
    let mut out = vec![Complex::zero(); m * m];
    for p in 0..m {
        for q in 0..m {
            out[p * m + q] = x[p] * y[q].conj();
        }
    }
    out
}

fn sqrt_factorial<T: Real>(n: usize) -> T {
    let f: T = (1..=n)
        .map(T::from_usize_lossy)
        .fold(T::one(), |a, b| a * b);
    Float::sqrt(f)
}

fn axpy<T: Real>(y: &mut [C<T>], c: C<T>, x: &[C<T>]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a = *a + *b * c;
    }
}

pub(crate) fn check_normalized<T: Real>(u: &[C<T>]) -> Result<()> {
    let n = Float::sqrt(u.iter().map(|z| z.norm_sqr()).sum::<T>()).to_f64_lossy();
    if !((n - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(Error::validation(format!(
            "condensate vector must be normalized, got ‖u‖ = {n:.15}"
        )));
    }
    Ok(())
}

impl<'a, T: Real> ExcitationMap<'a, T> {
    pub fn new(space: &'a FockSpace, particles: usize, u: &[C<T>]) -> Result<Self> {
        if u.len() != space.modes() {
            return Err(Error::validation(format!(
                "condensate vector has {} entries for {} modes",
                u.len(),
                space.modes()
            )));
        }
        if particles > space.cap() {
            return Err(Error::validation(format!(
                "N = {particles} exceeds the Fock cap {}",
                space.cap()
            )));
        }
        check_normalized(u)?;
        Ok(Self {
            space,
            particles,
            u: u.to_vec(),
            a_u: OperatorMatrix::from_terms(space, &annihilation_of(u)),
            ad_u: OperatorMatrix::from_terms(space, &creation_of(u)),
            n_u: OperatorMatrix::from_terms(space, &second_quantize(&rank_one(u, u), u.len())),
        })
    }

    pub fn space(&self) -> &FockSpace {
        self.space
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn condensate(&self) -> &[C<T>] {
        &self.u
    }

    /// `a(u)` on the whole space.
    pub fn annihilator(&self) -> &OperatorMatrix<T> {
        &self.a_u
    }

    /// `Γ_k(Q) x`.
    fn gamma(&self, k: usize, mut x: Vec<C<T>>) -> Vec<C<T>> {
        for j in 1..=k {
            let nx = self.n_u.apply(&x);
            let c = Complex::new(-T::one() / T::from_usize_lossy(j), T::zero());
            axpy(&mut x, c, &nx);
        }
        x
    }

    fn require_sector(&self, psi: &FockVector<T>) -> Result<()> {
        if psi.coeffs.len() != self.space.dim() {
            return Err(Error::validation(
                "state does not belong to this Fock space",
            ));
        }
        let total = psi.norm();
        let inside = psi.sector_part(self.space, self.particles).norm();
        let outside = Float::sqrt(Float::max(total * total - inside * inside, T::zero()));
        if outside > T::lit(1e-10) * Float::max(total, T::one()) {
            return Err(Error::validation(format!(
                "state has weight {:.3e} outside the N = {} sector",
                outside.to_f64_lossy(),
                self.particles
            )));
        }
        Ok(())
    }

    /// `U_N ψ` for `ψ` in the `N`-particle sector.
    pub fn apply(&self, psi: &FockVector<T>) -> Result<FockVector<T>> {
        self.require_sector(psi)?;
        Ok(FockVector::new(self.apply_raw(
            &psi.sector_part(self.space, self.particles).coeffs,
        )))
    }

    /// `U_N` on an arbitrary vector (components outside the `N` sector are ignored).
    pub(crate) fn apply_raw(&self, x: &[C<T>]) -> Vec<C<T>> {
        let n = self.particles;
        let mut cur = vec![Complex::zero(); x.len()];
        for i in self.space.sector(n) {
            cur[i] = x[i];
        }
        let mut out = vec![Complex::zero(); x.len()];
        for j in 0..=n {
            let phi = self.gamma(n - j, cur.clone());
            axpy(
                &mut out,
                Complex::new(T::one() / sqrt_factorial::<T>(j), T::zero()),
                &phi,
            );
            if j < n {
                cur = self.a_u.apply(&cur);
            }
        }
        out
    }

    /// `U_N* Φ`, an `N`-particle state. Sectors above `N` are ignored.
    pub fn inverse(&self, phi: &FockVector<T>) -> Result<FockVector<T>> {
        if phi.coeffs.len() != self.space.dim() {
            return Err(Error::validation(
                "state does not belong to this Fock space",
            ));
        }
        Ok(FockVector::new(self.inverse_raw(&phi.coeffs)))
    }

    pub(crate) fn inverse_raw(&self, x: &[C<T>]) -> Vec<C<T>> {
        let n = self.particles;
        let mut out = vec![Complex::zero(); x.len()];
        for k in 0..=n {
            let mut part = vec![Complex::zero(); x.len()];
            for i in self.space.sector(k) {
                part[i] = x[i];
            }
            let mut y = self.gamma(k, part);
            for _ in k..n {
                y = self.ad_u.apply(&y);
            }
            axpy(
                &mut out,
                Complex::new(T::one() / sqrt_factorial::<T>(n - k), T::zero()),
                &y,
            );
        }
        out
    }

    /// `(d/dt U_N) x` when the condensate moves with velocity `u_dot`.
    pub fn derivative(&self, u_dot: &[C<T>], x: &[C<T>]) -> Vec<C<T>> {
        let n = self.particles;
        let m = self.u.len();
        let a_dot = OperatorMatrix::from_terms(self.space, &annihilation_of(u_dot));
        let mut nd = rank_one(u_dot, &self.u);
        for (a, b) in nd.iter_mut().zip(rank_one(&self.u, u_dot)) {
            *a = *a + b;
        }
        let n_dot = OperatorMatrix::from_terms(self.space, &second_quantize(&nd, m));

        let mut powers = Vec::with_capacity(n + 1);
        let mut cur = vec![Complex::zero(); x.len()];
        for i in self.space.sector(n) {
            cur[i] = x[i];
        }
        powers.push(cur);
        for j in 0..n {
            let next = self.a_u.apply(&powers[j]);
            powers.push(next);
        }

        let mut out = vec![Complex::zero(); x.len()];
        for j in 0..=n {
            let k = n - j;
            let w = Complex::new(T::one() / sqrt_factorial::<T>(j), T::zero());
            // d/dt Γ_k acting on a(u)^j x
            for i in 1..=k {
                let mut y = powers[j].clone();
                for l in (1..=k).rev() {
                    let ny = if l == i {
                        n_dot.apply(&y)
                    } else {
                        self.n_u.apply(&y)
                    };
                    let c = Complex::new(-T::one() / T::from_usize_lossy(l), T::zero());
                    if l == i {
                        y = ny.into_iter().map(|z| z * c).collect();
                    } else {
                        axpy(&mut y, c, &ny);
                    }
                }
                axpy(&mut out, w, &y);
            }
            // Γ_k d/dt a(u)^j
            for i in 0..j {
                let mut y = a_dot.apply(&powers[j - 1 - i]);
                for _ in 0..i {
                    y = self.a_u.apply(&y);
                }
                axpy(&mut out, w, &self.gamma(k, y));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operator::creation_of;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(v: &[(f64, f64)]) -> Vec<C<f64>> {
        let n = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
        v.iter().map(|(a, b)| Complex::new(a / n, b / n)).collect()
    }

    fn random_sector(space: &FockSpace, n: usize, rng: &mut ChaCha8Rng) -> FockVector<f64> {
        let mut v = space.zeros::<f64>();
        for i in space.sector(n) {
            v.coeffs[i] = Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let s = v.norm();
        v.coeffs.iter_mut().for_each(|z| *z /= s);
        v
    }

    fn power_state(space: &FockSpace, f: &[C<f64>], n: usize) -> FockVector<f64> {
        let ad = OperatorMatrix::from_terms(space, &creation_of(f));
        let mut v = space.zeros::<f64>().coeffs;
        v[space.vacuum()] = Complex::new(1.0 / sqrt_factorial::<f64>(n), 0.0);
        for _ in 0..n {
            v = ad.apply(&v);
        }
        FockVector::new(v)
    }

    #[test]
    fn pure_condensate_maps_to_vacuum() {
        let space = FockSpace::new(3, 4).unwrap();
        let u = unit(&[(0.3, 0.2), (1.0, 0.0), (-0.4, 0.5)]);
        let map = ExcitationMap::new(&space, 4, &u).unwrap();
        let psi = power_state(&space, &u, 4);
        assert!((psi.norm() - 1.0).abs() < 1e-13);
        let phi = map.apply(&psi).unwrap();
        assert!((phi.coeffs[0].norm() - 1.0).abs() < 1e-12);
        assert!(phi.coeffs[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn single_excitation_lands_in_first_sector() {
        let space = FockSpace::new(3, 3).unwrap();
        let u = unit(&[(1.0, 0.0), (0.5, 0.5), (0.0, -0.3)]);
        // v ⊥ u
        let raw = [
            Complex::new(0.2, -0.1),
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.7),
        ];
        let ov: C<f64> = u.iter().zip(&raw).map(|(a, b)| a.conj() * b).sum();
        let v: Vec<C<f64>> = raw.iter().zip(&u).map(|(r, a)| r - a * ov).collect();
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<C<f64>> = v.iter().map(|z| z / vn).collect();
        // a*(u)^2 a*(v) Ω / √2
        let mut psi = space.zeros::<f64>().coeffs;
        psi[0] = Complex::new(1.0, 0.0);
        psi = OperatorMatrix::from_terms(&space, &creation_of(&v)).apply(&psi);
        let adu = OperatorMatrix::from_terms(&space, &creation_of(&u));
        psi = adu.apply(&adu.apply(&psi));
        psi.iter_mut().for_each(|z| *z /= 2f64.sqrt());
        let phi = ExcitationMap::new(&space, 3, &u)
            .unwrap()
            .apply(&FockVector::new(psi))
            .unwrap();
        let w = phi.sector_weights(&space);
        assert!((w[1] - 1.0).abs() < 1e-12, "{w:?}");
        for p in 0..3 {
            let idx = space.index_of(&{
                let mut o = [0u8; 3];
                o[p] = 1;
                o
            });
            assert!((phi.coeffs[idx.unwrap()] - v[p]).norm() < 1e-12);
        }
    }

    #[test]
    fn unitary_and_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, n) in [(2usize, 3usize), (3, 3), (4, 4), (5, 4), (3, 6)] {
            let space = FockSpace::new(m, n).unwrap();
            let u = unit(
                &(0..m)
                    .map(|_| (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect::<Vec<_>>(),
            );
            let map = ExcitationMap::new(&space, n, &u).unwrap();
            for _ in 0..3 {
                let psi = random_sector(&space, n, &mut rng);
                let phi = map.apply(&psi).unwrap();
                assert!((phi.norm() - 1.0).abs() < 1e-12);
                // the image has no particle in u
                let au = map.annihilator().apply(&phi.coeffs);
                assert!(au.iter().all(|z| z.norm() < 1e-12));
                let back = map.inverse(&phi).unwrap();
                assert!(back.distance(&psi) < 1e-12);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let space = FockSpace::new(3, 3).unwrap();
        let u0 = unit(&[(0.3, 0.2), (1.0, 0.0), (-0.4, 0.5)]);
        let dir = [
            Complex::new(0.1, 0.3),
            Complex::new(-0.2, 0.0),
            Complex::new(0.05, -0.1),
        ];
        // tangent to the unit sphere
        let ov: C<f64> = u0.iter().zip(&dir).map(|(a, b)| a.conj() * b).sum();
        let du: Vec<C<f64>> = dir
            .iter()
            .zip(&u0)
            .map(|(d, a)| d - a * Complex::new(ov.re, 0.0))
            .collect();
        let at = |s: f64| -> Vec<C<f64>> {
            let v: Vec<C<f64>> = u0.iter().zip(&du).map(|(a, b)| a + b * s).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter().map(|z| z / n).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_sector(&space, 3, &mut rng);
        let h = 1e-4;
        let plus = ExcitationMap::new(&space, 3, &at(h))
            .unwrap()
            .apply_raw(&psi.coeffs);
        let minus = ExcitationMap::new(&space, 3, &at(-h))
            .unwrap()
            .apply_raw(&psi.coeffs);
        let exact = ExcitationMap::new(&space, 3, &u0)
            .unwrap()
            .derivative(&du, &psi.coeffs);
        for i in 0..space.dim() {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            assert!((fd - exact[i]).norm() < 1e-6, "{i}: {fd} vs {}", exact[i]);
        }
    }

    #[test]
    fn refuses_bad_input() {
        let space = FockSpace::new(2, 3).unwrap();
        let bad = [Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)];
        assert!(ExcitationMap::new(&space, 3, &bad).is_err());
        let u = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        assert!(ExcitationMap::new(&space, 4, &u).is_err());
        let map = ExcitationMap::new(&space, 3, &u).unwrap();
        let v = space.basis_vector::<f64>(&[1, 0]).unwrap();
        assert!(map.apply(&v).is_err());
    }
}
