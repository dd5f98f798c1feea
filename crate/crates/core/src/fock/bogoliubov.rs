// SPDX-License-Identifier: Apache-2.0

//! Many-body Hamiltonian `H_N`, Bogoliubov Hamiltonian `ℍ`, the error terms
//! `R₀ … R₄` and the fluctuation generator `𝒢_N = 𝟙^{≤N}(ℍ + ℰ_N)𝟙^{≤N}`
//! on a mode basis.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{Float, Zero};

use super::excitation::{check_normalized, ExcitationMap};
use super::modes::{complement_projector, matmul, matvec, transpose, ModeBasis};
use super::operator::{annihilation_of, second_quantize, Monomial, OperatorMatrix};
use super::space::FockSpace;
use crate::error::{Error, Result};
use crate::scalar::{LinalgReal, Real, C};

/// Hermiticity tolerance, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

fn check_particles(space: &FockSpace, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::validation(format!("need N ≥ 2 particles, got {n}")));
    }
    if n > space.cap() {
        return Err(Error::validation(format!(
            "N = {n} exceeds the Fock cap {}",
            space.cap()
        )));
    }
    Ok(())
}

fn check_basis(basis: &ModeBasis<impl Real>, space: &FockSpace) -> Result<()> {
    if basis.modes() != space.modes() {
        return Err(Error::validation(format!(
            "mode basis has {} modes, Fock space {}",
            basis.modes(),
            space.modes()
        )));
    }
    Ok(())
}

fn hermitian_checked<T: Real>(op: OperatorMatrix<T>, what: &str) -> Result<OperatorMatrix<T>> {
    let scale = Float::max(op.max_abs(), T::one());
    op.require_hermitian(what, T::lit(HERMITIAN_TOL) * scale)?;
    Ok(op)
}

/// `Σ M_{pq,rs} a*_p a*_q a_r a_s` monomials of a row-major `m⁴` tensor.
fn quartic<T: Real>(
    m: usize,
    coeff: impl Fn(usize, usize, usize, usize) -> C<T>,
) -> Vec<Monomial<T>> {
    let mut out = Vec::new();
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let c = coeff(p, q, r, s);
                    if !c.is_zero() {
                        out.push(Monomial::new(c, &[p, q], &[r, s]));
                    }
                }
            }
        }
    }
    out
}

/// `H_N = Σ ε_p a*_p a_p + (1/(2(N−1))) Σ V_{pq,rs} a*_p a*_q a_r a_s`.
pub fn build_hamiltonian<T: Real>(
    basis: &ModeBasis<T>,
    space: &FockSpace,
    n: usize,
) -> Result<OperatorMatrix<T>> {
    check_basis(basis, space)?;
    check_particles(space, n)?;
    let m = basis.modes();
    let mut terms: Vec<Monomial<T>> = (0..m)
        .map(|p| Monomial::new(re(basis.kinetic()[p]), &[p], &[p]))
        .collect();
    let c = T::one() / (T::lit(2.0) * T::from_usize_lossy(n - 1));
    terms.extend(quartic(m, |p, q, r, s| basis.v(p, q, r, s) * c));
    hermitian_checked(OperatorMatrix::from_terms(space, &terms), "H_N")
}

/// Mode-space objects built from the condensate vector `u`.
#[derive(Clone, Debug)]
pub struct MeanField<T> {
    pub u: Vec<C<T>>,
    /// `Q = 1 − |u⟩⟨u|`.
    pub q: Vec<C<T>>,
    /// `w ∗ |u|²`.
    pub w: Vec<C<T>>,
    pub k1: Vec<C<T>>,
    pub k2_tilde: Vec<C<T>>,
    /// `K₂ = Q ⊗ Q K̃₂`.
    pub k2: Vec<C<T>>,
    pub mu: T,
    /// `h = ε + w∗|u|² + Q K̃₁ Q − μ`.
    pub h: Vec<C<T>>,
}

impl<T: Real> MeanField<T> {
    pub fn new(basis: &ModeBasis<T>, u: &[C<T>]) -> Result<Self> {
        if u.len() != basis.modes() {
            return Err(Error::validation(
                "condensate vector has the wrong number of modes",
            ));
        }
        check_normalized(u)?;
        let m = basis.modes();
        let q = complement_projector(u);
        let w = basis.mean_field(u);
        let k1 = basis.exchange(u);
        let k2_tilde = basis.pair_function(u);
        let k2 = matmul(&matmul(&q, &k2_tilde, m), &transpose(&q, m), m);
        let mu = basis.chemical_potential(u);
        let qk1q = matmul(&matmul(&q, &k1, m), &q, m);
        let mut h: Vec<C<T>> = w.iter().zip(&qk1q).map(|(a, b)| *a + *b).collect();
        for p in 0..m {
            h[p * m + p] = h[p * m + p] + re(basis.kinetic()[p] - mu);
        }
        Ok(Self {
            u: u.to_vec(),
            q,
            w,
            k1,
            k2_tilde,
            k2,
            mu,
            h,
        })
    }

    pub fn modes(&self) -> usize {
        self.u.len()
    }
}

/// `½ Σ (K₂[p,q] a*_p a*_q + conj K₂[p,q] a_p a_q)`.
fn pairing<T: Real>(k2: &[C<T>], m: usize) -> Vec<Monomial<T>> {
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(2 * m * m);
    for p in 0..m {
        for q in 0..m {
            let c = k2[p * m + q];
            out.push(Monomial::new(c * half, &[p, q], &[]));
            out.push(Monomial::new(c.conj() * half, &[], &[p, q]));
        }
    }
    out
}

/// `ℍ = dΓ(h) + ½ Σ (K₂ a*a* + conj K₂ a a)`.
pub fn build_bogoliubov<T: Real>(
    basis: &ModeBasis<T>,
    space: &FockSpace,
    u: &[C<T>],
) -> Result<OperatorMatrix<T>> {
    check_basis(basis, space)?;
    let mf = MeanField::new(basis, u)?;
    Ok(bogoliubov_from(&mf, space))
}

fn bogoliubov_from<T: Real>(mf: &MeanField<T>, space: &FockSpace) -> OperatorMatrix<T> {
    let m = mf.modes();
    let mut terms = second_quantize(&mf.h, m);
    terms.extend(pairing(&mf.k2, m));
    OperatorMatrix::from_terms(space, &terms)
}

/// `√x`, or zero for negative `x`.
fn sqrt_pos<T: Real>(x: T) -> T {
    if x > T::zero() {
        Float::sqrt(x)
    } else {
        T::zero()
    }
}

/// The five error terms, plus `R₃` with every `Q` replaced by `1`.
#[derive(Clone, Debug)]
pub struct ErrorTerms<T> {
    pub r: [OperatorMatrix<T>; 5],
    pub r3_unprojected: OperatorMatrix<T>,
}

impl<T: Real> ErrorTerms<T> {
    /// `ℰ_N = ½ Σ_j (R_j + R_j*)`.
    pub fn total(&self) -> OperatorMatrix<T> {
        let half = re(T::lit(0.5));
        let mut acc = OperatorMatrix::zeros(self.r[0].dim());
        for r in &self.r {
            acc = acc.add_scaled(half, r).add_scaled(half, &r.adjoint());
        }
        acc
    }
}

/// `R₀ … R₄` of the fluctuation generator for `N` particles. Number-operator
/// functions vanish on sectors with more than `N` particles.
pub fn build_error_terms<T: Real>(
    basis: &ModeBasis<T>,
    space: &FockSpace,
    u: &[C<T>],
    n: usize,
) -> Result<ErrorTerms<T>> {
    check_basis(basis, space)?;
    check_particles(space, n)?;
    let mf = MeanField::new(basis, u)?;
    Ok(error_terms_from(basis, &mf, space, n))
}

fn error_terms_from<T: Real>(
    basis: &ModeBasis<T>,
    mf: &MeanField<T>,
    space: &FockSpace,
    n: usize,
) -> ErrorTerms<T> {
    let m = mf.modes();
    let nf = T::from_usize_lossy(n);
    let nm1 = T::from_usize_lossy(n - 1);
    let one = |_: usize| T::one();
    let within = |k: usize| k <= n;
    let q = &mf.q;

    // R₀ = dΓ(Q[w∗|u|² + K̃₁ − μ]Q) (1 − 𝒩)/(N − 1)
    let mut inner: Vec<C<T>> = mf.w.iter().zip(&mf.k1).map(|(a, b)| *a + *b).collect();
    for p in 0..m {
        inner[p * m + p] = inner[p * m + p] - re(mf.mu);
    }
    let qiq = matmul(&matmul(q, &inner, m), q, m);
    let r0 = OperatorMatrix::assemble(space, &second_quantize(&qiq, m), one, |k| {
        if within(k) {
            (T::one() - T::from_usize_lossy(k)) / nm1
        } else {
            T::zero()
        }
    });

    // R₁ = −2 𝒩 √(N − 𝒩)/(N − 1) a(Q [w∗|u|²] u)
    let f = matvec(q, &matvec(&mf.w, &mf.u));
    let r1 = OperatorMatrix::assemble(
        space,
        &annihilation_of(&f),
        |k| {
            if within(k) {
                let kf = T::from_usize_lossy(k);
                -T::lit(2.0) * kf * sqrt_pos(nf - kf) / nm1
            } else {
                T::zero()
            }
        },
        one,
    );

    // R₂ = Σ K₂ a*a* (√((N − 𝒩)(N − 𝒩 − 1))/(N − 1) − 1)
    let pair: Vec<Monomial<T>> = (0..m * m)
        .map(|i| Monomial::new(mf.k2[i], &[i / m, i % m], &[]))
        .collect();
    let r2 = OperatorMatrix::assemble(space, &pair, one, |k| {
        if within(k) {
            let kf = T::from_usize_lossy(k);
            sqrt_pos((nf - kf) * (nf - kf - T::one())) / nm1 - T::one()
        } else {
            T::zero()
        }
    });

    // R₃ = 2√(N − 𝒩)/(N − 1) Σ ū_p (1⊗Q V Q⊗Q)_{pq,rs} a*_q a_r a_s
    let cubic = |proj: bool| -> Vec<Monomial<T>> {
        let qm = |a: usize, b: usize| -> C<T> {
            if proj {
                q[a * m + b]
            } else if a == b {
                re(T::one())
            } else {
                Complex::zero()
            }
        };
        // G_{qrs} = Σ_p ū_p V_{pq,rs}
        let mut g = vec![Complex::zero(); m * m * m];
        for p in 0..m {
            let up = mf.u[p].conj();
            for qq in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        g[(qq * m + r) * m + s] =
                            g[(qq * m + r) * m + s] + up * basis.v(p, qq, r, s);
                    }
                }
            }
        }
        let mut out = Vec::new();
        for qq in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let mut c = Complex::zero();
                    for q2 in 0..m {
                        let lq = qm(qq, q2);
                        if lq.is_zero() {
                            continue;
                        }
                        for r2 in 0..m {
                            let rr = qm(r2, r);
                            if rr.is_zero() {
                                continue;
                            }
                            for s2 in 0..m {
                                c = c + lq * g[(q2 * m + r2) * m + s2] * rr * qm(s2, s);
                            }
                        }
                    }
                    if !c.is_zero() {
                        out.push(Monomial::new(c, &[qq], &[r, s]));
                    }
                }
            }
        }
        out
    };
    // The factor 2 makes ½(R₃ + R₃*) the whole cubic part of U H U*.
    let r3_left = |k: usize| {
        if within(k) {
            T::lit(2.0) * sqrt_pos(nf - T::from_usize_lossy(k)) / nm1
        } else {
            T::zero()
        }
    };
    let r3 = OperatorMatrix::assemble(space, &cubic(true), r3_left, one);
    let r3_unprojected = OperatorMatrix::assemble(space, &cubic(false), r3_left, one);

    // R₄ = 1/(2(N − 1)) Σ (Q⊗Q V Q⊗Q) a*a*aa
    let mut vq = vec![Complex::zero(); m * m * m * m];
    let idx = |a: usize, b: usize, c: usize, d: usize| ((a * m + b) * m + c) * m + d;
    // right projections
    let mut tmp = vec![Complex::zero(); m * m * m * m];
    for p in 0..m {
        for qq in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let mut c = Complex::zero();
                    for r2 in 0..m {
                        for s2 in 0..m {
                            c = c + basis.v(p, qq, r2, s2) * q[r2 * m + r] * q[s2 * m + s];
                        }
                    }
                    tmp[idx(p, qq, r, s)] = c;
                }
            }
        }
    }
    for p in 0..m {
        for qq in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let mut c = Complex::zero();
                    for p2 in 0..m {
                        for q2 in 0..m {
                            c = c + q[p * m + p2] * q[qq * m + q2] * tmp[idx(p2, q2, r, s)];
                        }
                    }
                    vq[idx(p, qq, r, s)] = c;
                }
            }
        }
    }
    let c4 = T::one() / (T::lit(2.0) * nm1);
    let r4 = OperatorMatrix::assemble(
        space,
        &quartic(m, |p, qq, r, s| vq[idx(p, qq, r, s)] * c4),
        one,
        |k| {
            if within(k) {
                T::one()
            } else {
                T::zero()
            }
        },
    );

    ErrorTerms {
        r: [r0, r1, r2, r3, r4],
        r3_unprojected,
    }
}

/// `𝒢_N = 𝟙^{≤N}(ℍ + ℰ_N)𝟙^{≤N}`.
pub fn build_generator<T: Real>(
    basis: &ModeBasis<T>,
    space: &FockSpace,
    u: &[C<T>],
    n: usize,
) -> Result<OperatorMatrix<T>> {
    check_basis(basis, space)?;
    check_particles(space, n)?;
    let mf = MeanField::new(basis, u)?;
    let g = bogoliubov_from(&mf, space).add(&error_terms_from(basis, &mf, space, n).total());
    let g = g.compress(|i| space.particles(i) <= n);
    hermitian_checked(g, "the fluctuation generator")
}

/// Localized generator `𝟙^{≤M} 𝒢_N 𝟙^{≤M}`.
pub fn build_truncated_generator<T: Real>(
    basis: &ModeBasis<T>,
    space: &FockSpace,
    u: &[C<T>],
    n: usize,
    m_cap: usize,
) -> Result<OperatorMatrix<T>> {
    if m_cap > n {
        return Err(Error::validation(format!(
            "localization M = {m_cap} exceeds N = {n}"
        )));
    }
    Ok(build_generator(basis, space, u, n)?.compress(|i| space.particles(i) <= m_cap))
}

/// Residuals of the operator identities tying `H_N` to its fluctuation generator.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuralReport {
    /// `max |U_N*U_N − 1|` on the `N` sector.
    pub isometry: f64,
    /// `max |P₊(ℍ + ℰ_N)P₊ − P₊(U H U* + i U̇ U*)P₊|` with `P₊ = U U*`.
    pub generator: f64,
    /// Same without the frame term `i U̇ U*`.
    pub generator_without_frame: f64,
    /// `max |P₊ R₃ P₊ − P₊ R₃^{Q→1} P₊|`.
    pub r3_variants: f64,
    /// Largest `|A − A*|` over `ℍ`, `𝒢_N` and each `½(R_j + R_j*)`.
    pub hermiticity: f64,
}

fn dense<T: LinalgReal>(space: &FockSpace, f: impl Fn(&[C<T>]) -> Vec<C<T>>) -> DMatrix<C<T>> {
    let d = space.dim();
    let mut out = DMatrix::from_element(d, d, Complex::zero());
    let mut e = vec![Complex::zero(); d];
    for j in 0..d {
        e[j] = re(T::one());
        let col = f(&e);
        e[j] = Complex::zero();
        for (i, v) in col.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

fn max_abs<T: LinalgReal>(m: &DMatrix<C<T>>) -> f64 {
    m.iter()
        .map(|z| z.norm().to_f64_lossy())
        .fold(0.0, f64::max)
}

/// Checks the unitary equivalence between `H_N` and the fluctuation
/// generator at a condensate vector `u`, as dense matrices. The condensate
/// is taken to move by the mode-space Hartree flow.
pub fn structural_identity<T: LinalgReal>(
    basis: &ModeBasis<T>,
    space: &FockSpace,
    u: &[C<T>],
    n: usize,
) -> Result<StructuralReport> {
    check_basis(basis, space)?;
    check_particles(space, n)?;
    let mf = MeanField::new(basis, u)?;
    let map = ExcitationMap::new(space, n, u)?;
    let u_dot = basis.hartree_rhs(u);
    let h_n = build_hamiltonian(basis, space, n)?;
    let bog = bogoliubov_from(&mf, space);
    let errs = error_terms_from(basis, &mf, space, n);
    let gen = bog.add(&errs.total()).compress(|i| space.particles(i) <= n);

    let u_m = dense(space, |x| map.apply_raw(x));
    let ustar = dense(space, |x| map.inverse_raw(x));
    let udot_m = dense(space, |x| map.derivative(&u_dot, x));
    let p_plus = &u_m * &ustar;

    let sector = space.sector(n);
    let mut iso = &ustar * &u_m;
    for i in sector.clone() {
        iso[(i, i)] -= re(T::one());
    }
    let mut p_n = DMatrix::from_element(space.dim(), space.dim(), Complex::zero());
    for i in sector {
        p_n[(i, i)] = re(T::one());
    }
    let isometry = max_abs(&(&p_n * iso * &p_n));

    let conj = &u_m * h_n.to_dense() * &ustar;
    let frame = (&udot_m * &ustar) * Complex::new(T::zero(), T::one());
    let lhs = &p_plus * gen.to_dense() * &p_plus;
    let with_frame = &p_plus * (&conj + &frame) * &p_plus;
    let without = &p_plus * &conj * &p_plus;
    let r3a = &p_plus * errs.r[3].to_dense() * &p_plus;
    let r3b = &p_plus * errs.r3_unprojected.to_dense() * &p_plus;

    let half = re(T::lit(0.5));
    let mut herm =
        Float::max(bog.hermiticity_residual(), gen.hermiticity_residual()).to_f64_lossy();
    for r in &errs.r {
        let sym = r.scale(half).add_scaled(half, &r.adjoint());
        herm = herm.max(sym.hermiticity_residual().to_f64_lossy());
    }

    Ok(StructuralReport {
        isometry,
        generator: max_abs(&(&lhs - &with_frame)),
        generator_without_frame: max_abs(&(&lhs - &without)),
        r3_variants: max_abs(&(r3a - r3b)),
        hermiticity: herm,
    })
}

/// `max |[R_j, 𝒩] − c_j R_j|` for `c = (0, 1, −2, 1, 0)`.
pub fn commutator_residuals<T: Real>(terms: &ErrorTerms<T>, space: &FockSpace) -> [f64; 5] {
    let number = super::operator::number_operator::<T>(space);
    let c = [0.0, 1.0, -2.0, 1.0, 0.0];
    let mut out = [0.0; 5];
    for j in 0..5 {
        let lhs = terms.r[j].commutator(&number);
        out[j] = lhs
            .max_diff(&terms.r[j].scale(re(T::lit(c[j]))))
            .to_f64_lossy();
    }
    out
}

/// `ℰ_N Ω` and its vacuum expectation, with the closed form
/// `ℰ_N Ω = ½(√(N/(N−1)) − 1) Σ K₂ a*a* Ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct VacuumCheck {
    pub expectation_re: f64,
    pub expectation_im: f64,
    /// `‖ℰ_N Ω − ½(√(N/(N−1)) − 1) Σ K₂ a*a* Ω‖`.
    pub residual: f64,
}

pub fn vacuum_check<T: Real>(
    basis: &ModeBasis<T>,
    space: &FockSpace,
    u: &[C<T>],
    n: usize,
) -> Result<VacuumCheck> {
    let terms = build_error_terms(basis, space, u, n)?;
    let mf = MeanField::new(basis, u)?;
    let m = mf.modes();
    let mut omega = vec![Complex::zero(); space.dim()];
    omega[space.vacuum()] = re(T::one());
    let got = terms.total().apply(&omega);
    let nf = T::from_usize_lossy(n);
    let c = T::lit(0.5) * (Float::sqrt(nf / (nf - T::one())) - T::one());
    let pair: Vec<Monomial<T>> = (0..m * m)
        .map(|i| Monomial::new(mf.k2[i] * c, &[i / m, i % m], &[]))
        .collect();
    let want = OperatorMatrix::from_terms(space, &pair).apply(&omega);
    let residual = got
        .iter()
        .zip(&want)
        .map(|(a, b)| (*a - *b).norm_sqr())
        .sum::<T>();
    Ok(VacuumCheck {
        expectation_re: got[space.vacuum()].re.to_f64_lossy(),
        expectation_im: got[space.vacuum()].im.to_f64_lossy(),
        residual: Float::sqrt(residual).to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn basis(m: usize, g: f64) -> ModeBasis<f64> {
        ModeBasis::torus(m, std::f64::consts::TAU, |k| g * (-0.25 * k * k).exp()).unwrap()
    }

    fn condensate(b: &ModeBasis<f64>) -> Vec<C<f64>> {
        let raw: Vec<C<f64>> = (0..b.modes())
            .map(|p| Complex::new(1.0 / (1.0 + p as f64), 0.3 * p as f64 - 0.2))
            .collect();
        b.normalized(&raw).unwrap()
    }

    #[test]
    fn free_spectrum_is_sums_of_mode_energies() {
        let b = ModeBasis::free(3, std::f64::consts::TAU).unwrap();
        let space = FockSpace::new(3, 2).unwrap();
        let h = build_hamiltonian(&b, &space, 2).unwrap();
        for i in space.sector(2) {
            let occ = space.state(i);
            let e: f64 = occ
                .iter()
                .zip(b.kinetic())
                .map(|(n, k)| *n as f64 * k)
                .sum();
            assert!((h.get(i, i).re - e).abs() < 1e-14);
        }
        assert!(h.entries().all(|(r, c, _)| r == c));
    }

    #[test]
    fn two_bosons_in_one_mode() {
        // single mode: ε = 0, V₀ = ŵ(0)/ℓ
        let b = ModeBasis::torus(1, 2.0, |_| 3.0).unwrap();
        let space = FockSpace::new(1, 2).unwrap();
        let h = build_hamiltonian(&b, &space, 2).unwrap();
        // ⟨2| ½ V a*a*aa |2⟩ = ½ V · 2 with 1/(N−1) = 1
        assert!((h.get(2, 2).re - 1.5).abs() < 1e-14);
    }

    #[test]
    fn ground_energy_matches_dense_diagonalization() {
        let b = basis(4, 0.8);
        let space = FockSpace::new(4, 4).unwrap();
        let h = build_hamiltonian(&b, &space, 4).unwrap();
        let r = space.sector(4);
        let d = h
            .to_dense()
            .view((r.start, r.start), (r.len(), r.len()))
            .into_owned();
        let e = SymmetricEigen::new(d.clone()).eigenvalues.min();
        // Rayleigh quotients never go below the ground energy
        let mut v = nalgebra::DVector::from_element(r.len(), Complex::new(1.0, 0.0));
        v /= Complex::new(v.norm(), 0.0);
        let rq = (v.adjoint() * &d * &v)[(0, 0)].re;
        assert!(rq >= e - 1e-12);
        // power iteration on a shifted matrix converges to the same value
        let shift = d.iter().map(|z| z.norm()).sum::<f64>();
        let mut x = v.clone();
        for _ in 0..20000 {
            x = (&d * &x) - &x * Complex::new(shift, 0.0);
            x /= Complex::new(x.norm(), 0.0);
        }
        let lam = (x.adjoint() * &d * &x)[(0, 0)].re;
        assert!((lam - e).abs() < 1e-10, "{lam} vs {e}");
    }

    #[test]
    fn single_mode_free_bogoliubov() {
        let b = ModeBasis::free(3, std::f64::consts::TAU).unwrap();
        let space = FockSpace::new(3, 3).unwrap();
        let u = vec![
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
        ];
        let bog = build_bogoliubov(&b, &space, &u).unwrap();
        let want = OperatorMatrix::from_terms(
            &space,
            &(0..3)
                .map(|p| Monomial::new(Complex::new(b.kinetic()[p], 0.0), &[p], &[p]))
                .collect::<Vec<_>>(),
        );
        assert!(bog.max_diff(&want) < 1e-15);
    }

    #[test]
    fn pair_function_is_symmetric() {
        let b = basis(4, 1.0);
        let mf = MeanField::new(&b, &condensate(&b)).unwrap();
        for p in 0..4 {
            for q in 0..4 {
                assert!((mf.k2[p * 4 + q] - mf.k2[q * 4 + p]).norm() < 1e-12);
            }
            assert!(matvec(&mf.q, &mf.u).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn generator_is_conjugated_hamiltonian() {
        for (m, n) in [(3usize, 3usize), (4, 4), (3, 5)] {
            let b = basis(m, 1.3);
            let space = FockSpace::new(m, n).unwrap();
            let rep = structural_identity(&b, &space, &condensate(&b), n).unwrap();
            assert!(rep.isometry < 1e-12, "{rep:?}");
            assert!(rep.generator < 1e-10, "({m},{n}) {rep:?}");
            assert!(rep.r3_variants < 1e-12, "{rep:?}");
            assert!(rep.hermiticity < 1e-12, "{rep:?}");
            assert!(rep.generator_without_frame > 1e-3, "{rep:?}");
        }
    }

    #[test]
    fn error_term_commutators() {
        let b = basis(3, 0.9);
        let space = FockSpace::new(3, 4).unwrap();
        let t = build_error_terms(&b, &space, &condensate(&b), 4).unwrap();
        for r in commutator_residuals(&t, &space) {
            assert!(r < 1e-12);
        }
        assert!(t.r[0].hermiticity_residual() < 1e-12);
        assert!(t.r[4].hermiticity_residual() < 1e-12);
    }

    #[test]
    fn error_terms_on_the_vacuum() {
        let b = basis(3, 1.1);
        let space = FockSpace::new(3, 3).unwrap();
        let c = vacuum_check(&b, &space, &condensate(&b), 3).unwrap();
        assert!(c.expectation_re.abs() < 1e-15 && c.expectation_im.abs() < 1e-15);
        assert!(c.residual < 1e-13);
    }

    #[test]
    fn rejects_bad_particle_numbers() {
        let b = basis(2, 1.0);
        let space = FockSpace::new(2, 3).unwrap();
        assert!(build_hamiltonian(&b, &space, 4).is_err());
        assert!(build_hamiltonian(&b, &space, 1).is_err());
        let u = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        assert!(build_truncated_generator(&b, &space, &u, 3, 4).is_err());
    }
}
