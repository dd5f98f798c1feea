// SPDX-License-Identifier: Apache-2.0

//! Plane-wave modes on a 1D torus, their pair-interaction tensor, and the
//! mode-space mean-field objects built from a condensate vector `u`.

use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// `m` plane waves `e^{i k_p x}/√ℓ` on a torus of length `ℓ`, with
/// `V_{pq,rs} = ⟨φ_p ⊗ φ_q, w φ_r ⊗ φ_s⟩`.
#[derive(Clone, Debug)]
pub struct ModeBasis<T> {
    modes: usize,
    ell: T,
    /// Integer labels `p` with `k_p = 2πp/ℓ`, centred on zero.
    labels: Vec<i64>,
    kinetic: Vec<T>,
    v: Vec<C<T>>,
}

impl<T: Real> ModeBasis<T> {
    /// Momentum-conserving interaction `V_{pq,rs} = ŵ(k_p − k_r)/ℓ · δ_{p+q, r+s}`
    /// from an even pair-potential transform `ŵ`.
    pub fn torus(modes: usize, ell: T, w_hat: impl Fn(T) -> T) -> Result<Self> {
        if modes == 0 {
            return Err(Error::validation("mode basis needs at least one mode"));
        }
        if !(ell > T::zero()) || !Float::is_finite(ell) {
            return Err(Error::validation(format!(
                "torus length must be positive, got {ell}"
            )));
        }
        let labels: Vec<i64> = (0..modes as i64).map(|j| j - (modes as i64) / 2).collect();
        let dk = T::TAU() / ell;
        let ks: Vec<T> = labels
            .iter()
            .map(|&p| dk * T::from_i64(p).unwrap())
            .collect();
        let kinetic = ks.iter().map(|k| *k * *k).collect();
        let m = modes;
        let mut v = vec![Complex::zero(); m * m * m * m];
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        if labels[p] + labels[q] == labels[r] + labels[s] {
                            v[((p * m + q) * m + r) * m + s] =
                                Complex::new(w_hat(ks[p] - ks[r]) / ell, T::zero());
                        }
                    }
                }
            }
        }
        Self::from_parts(ell, labels, kinetic, v)
    }

    /// Free bosons: `V = 0`.
    pub fn free(modes: usize, ell: T) -> Result<Self> {
        Self::torus(modes, ell, |_| T::zero())
    }

    /// Arbitrary one-body energies and interaction tensor, checked for
    /// Hermitian and bosonic symmetry.
    pub fn from_parts(ell: T, labels: Vec<i64>, kinetic: Vec<T>, v: Vec<C<T>>) -> Result<Self> {
        let m = kinetic.len();
        if labels.len() != m || v.len() != m * m * m * m {
            return Err(Error::validation(
                "mode basis arrays have inconsistent sizes",
            ));
        }
        let basis = Self {
            modes: m,
            ell,
            labels,
            kinetic,
            v,
        };
        let (herm, boson) = basis.symmetry_residuals();
        let tol = T::lit(1e-12) * Float::max(basis.v_max(), T::one());
        if herm > tol {
            return Err(Error::validation(format!(
                "interaction tensor is not Hermitian-symmetric (residual {:.3e})",
                herm.to_f64_lossy()
            )));
        }
        if boson > tol {
            return Err(Error::validation(format!(
                "interaction tensor is not boson-symmetric (residual {:.3e})",
                boson.to_f64_lossy()
            )));
        }
        Ok(basis)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn ell(&self) -> T {
        self.ell
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    /// `ε_p = k_p²`.
    pub fn kinetic(&self) -> &[T] {
        &self.kinetic
    }

    #[inline]
    pub fn v(&self, p: usize, q: usize, r: usize, s: usize) -> C<T> {
        let m = self.modes;
        self.v[((p * m + q) * m + r) * m + s]
    }

    pub fn v_max(&self) -> T {
        self.v.iter().map(|z| z.norm()).fold(T::zero(), Float::max)
    }

    pub fn is_free(&self) -> bool {
        self.v.iter().all(|z| z.is_zero())
    }

    /// `(max |V_{pq,rs} − conj V_{rs,pq}|, max |V_{pq,rs} − V_{qp,sr}|)`.
    pub fn symmetry_residuals(&self) -> (T, T) {
        let m = self.modes;
        let mut herm = T::zero();
        let mut boson = T::zero();
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        let x = self.v(p, q, r, s);
                        herm = Float::max(herm, (x - self.v(r, s, p, q).conj()).norm());
                        boson = Float::max(boson, (x - self.v(q, p, s, r)).norm());
                    }
                }
            }
        }
        (herm, boson)
    }

    /// Normalized mode vector from raw amplitudes.
    pub fn normalized(&self, amps: &[C<T>]) -> Result<Vec<C<T>>> {
        if amps.len() != self.modes {
            return Err(Error::validation(
                "condensate vector has the wrong number of modes",
            ));
        }
        let n = Float::sqrt(amps.iter().map(|z| z.norm_sqr()).sum::<T>());
        if !(n > T::zero()) {
            return Err(Error::validation("condensate vector vanishes"));
        }
        Ok(amps.iter().map(|z| *z / n).collect())
    }

    /// Mean-field potential `W[u]_{pr} = Σ_{qs} V_{pq,rs} ū_q u_s` (the mode matrix of `w∗|u|²`).
    pub fn mean_field(&self, u: &[C<T>]) -> Vec<C<T>> {
        let m = self.modes;
        let mut w = vec![Complex::zero(); m * m];
        for p in 0..m {
            for r in 0..m {
                let mut acc = Complex::zero();
                for q in 0..m {
                    for s in 0..m {
                        acc = acc + self.v(p, q, r, s) * u[q].conj() * u[s];
                    }
                }
                w[p * m + r] = acc;
            }
        }
        w
    }

    /// Exchange operator `K̃₁_{pr} = Σ_{qs} V_{pq,sr} ū_q u_s`.
    pub fn exchange(&self, u: &[C<T>]) -> Vec<C<T>> {
        let m = self.modes;
        let mut k = vec![Complex::zero(); m * m];
        for p in 0..m {
            for r in 0..m {
                let mut acc = Complex::zero();
                for q in 0..m {
                    for s in 0..m {
                        acc = acc + self.v(p, q, s, r) * u[q].conj() * u[s];
                    }
                }
                k[p * m + r] = acc;
            }
        }
        k
    }

    /// Pair function `K̃₂[p,q] = Σ_{rs} V_{pq,rs} u_r u_s`.
    pub fn pair_function(&self, u: &[C<T>]) -> Vec<C<T>> {
        let m = self.modes;
        let mut k = vec![Complex::zero(); m * m];
        for p in 0..m {
            for q in 0..m {
                let mut acc = Complex::zero();
                for r in 0..m {
                    for s in 0..m {
                        acc = acc + self.v(p, q, r, s) * u[r] * u[s];
                    }
                }
                k[p * m + q] = acc;
            }
        }
        k
    }

    /// `μ = ½⟨u, W[u] u⟩`.
    pub fn chemical_potential(&self, u: &[C<T>]) -> T {
        let w = self.mean_field(u);
        (quadratic_form(&w, u) / T::lit(2.0)).re
    }

    /// Hartree one-body operator `ε + W[u] − μ`.
    pub fn hartree_operator(&self, u: &[C<T>]) -> Vec<C<T>> {
        let m = self.modes;
        let mut h = self.mean_field(u);
        let mu = (quadratic_form(&h, u) / T::lit(2.0)).re;
        for p in 0..m {
            h[p * m + p] = h[p * m + p] + Complex::new(self.kinetic[p] - mu, T::zero());
        }
        h
    }

    /// `u̇ = −i(ε + W[u] − μ)u`.
    pub fn hartree_rhs(&self, u: &[C<T>]) -> Vec<C<T>> {
        let h = self.hartree_operator(u);
        let hu = matvec(&h, u);
        hu.into_iter().map(|z| Complex::new(z.im, -z.re)).collect()
    }

    /// One classical RK4 step of the mode-space Hartree equation.
    pub fn hartree_step(&self, u: &[C<T>], dt: T) -> Vec<C<T>> {
        let axpy = |a: &[C<T>], c: T, b: &[C<T>]| -> Vec<C<T>> {
            a.iter().zip(b).map(|(x, y)| *x + *y * c).collect()
        };
        let half = dt / T::lit(2.0);
        let k1 = self.hartree_rhs(u);
        let k2 = self.hartree_rhs(&axpy(u, half, &k1));
        let k3 = self.hartree_rhs(&axpy(u, half, &k2));
        let k4 = self.hartree_rhs(&axpy(u, dt, &k3));
        let six = T::lit(6.0);
        (0..u.len())
            .map(|i| u[i] + (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * (dt / six))
            .collect()
    }
}

/// `Q = 1 − |u⟩⟨u|`, row-major.
pub fn complement_projector<T: Real>(u: &[C<T>]) -> Vec<C<T>> {
    let m = u.len();
    let mut q = vec![Complex::zero(); m * m];
    for p in 0..m {
        for r in 0..m {
            let id = if p == r { T::one() } else { T::zero() };
            q[p * m + r] = Complex::new(id, T::zero()) - u[p] * u[r].conj();
        }
    }
    q
}

pub fn matvec<T: Real>(a: &[C<T>], x: &[C<T>]) -> Vec<C<T>> {
    let m = x.len();
    (0..m)
        .map(|p| (0..m).fold(Complex::zero(), |acc, r| acc + a[p * m + r] * x[r]))
        .collect()
}

pub fn matmul<T: Real>(a: &[C<T>], b: &[C<T>], m: usize) -> Vec<C<T>> {
    let mut c = vec![Complex::zero(); m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            for j in 0..m {
                c[i * m + j] = c[i * m + j] + aik * b[k * m + j];
            }
        }
    }
    c
}

/// `Aᵀ`.
pub fn transpose<T: Real>(a: &[C<T>], m: usize) -> Vec<C<T>> {
    let mut t = vec![Complex::zero(); m * m];
    for i in 0..m {
        for j in 0..m {
            t[j * m + i] = a[i * m + j];
        }
    }
    t
}

/// `⟨x, A x⟩`.
pub fn quadratic_form<T: Real>(a: &[C<T>], x: &[C<T>]) -> C<T> {
    let ax = matvec(a, x);
    x.iter()
        .zip(&ax)
        .fold(Complex::zero(), |acc, (u, v)| acc + u.conj() * *v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> ModeBasis<f64> {
        ModeBasis::torus(4, 2.0, |k| 0.7 * (-0.3 * k * k).exp()).unwrap()
    }

    fn u0(b: &ModeBasis<f64>) -> Vec<C<f64>> {
        b.normalized(&[
            Complex::new(0.3, 0.1),
            Complex::new(1.0, 0.0),
            Complex::new(0.2, -0.4),
            Complex::new(0.1, 0.2),
        ])
        .unwrap()
    }

    #[test]
    fn interaction_symmetries() {
        let b = basis();
        let (h, s) = b.symmetry_residuals();
        assert!(h < 1e-15 && s < 1e-15);
        // odd transform breaks Hermitian symmetry
        assert!(ModeBasis::torus(3, 1.0, |k: f64| k).is_err());
    }

    #[test]
    fn hermitian_one_body_objects() {
        let b = basis();
        let u = u0(&b);
        let m = 4;
        for a in [b.mean_field(&u), b.exchange(&u), b.hartree_operator(&u)] {
            for p in 0..m {
                for r in 0..m {
                    assert!((a[p * m + r] - a[r * m + p].conj()).norm() < 1e-14);
                }
            }
        }
        let k2 = b.pair_function(&u);
        for p in 0..m {
            for q in 0..m {
                assert!((k2[p * m + q] - k2[q * m + p]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hartree_preserves_norm_and_energy_free_case_exact() {
        let b = basis();
        let energy = |u: &[C<f64>]| -> f64 {
            let kin: f64 = u
                .iter()
                .zip(b.kinetic())
                .map(|(z, e)| z.norm_sqr() * e)
                .sum();
            kin + b.chemical_potential(u)
        };
        let mut u = u0(&b);
        let e0 = energy(&u);
        for _ in 0..2000 {
            u = b.hartree_step(&u, 0.0005);
        }
        let n: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-9);
        assert!((energy(&u) - e0).abs() < 1e-8);
        let f = ModeBasis::free(4, 2.0).unwrap();
        let start = u0(&f);
        let mut v = start.clone();
        for _ in 0..2000 {
            v = f.hartree_step(&v, 0.0005);
        }
        for p in 0..4 {
            let want = start[p] * Complex::from_polar(1.0, -f.kinetic()[p]);
            assert!((v[p] - want).norm() < 1e-7);
        }
    }

    #[test]
    fn projector_annihilates_u() {
        let b = basis();
        let u = u0(&b);
        let q = complement_projector(&u);
        assert!(matvec(&q, &u).iter().all(|z| z.norm() < 1e-15));
        let qq = matmul(&q, &q, 4);
        for (a, c) in qq.iter().zip(&q) {
            assert!((a - c).norm() < 1e-15);
        }
    }
}
