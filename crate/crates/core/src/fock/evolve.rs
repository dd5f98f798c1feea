// SPDX-License-Identifier: Apache-2.0

//! Time stepping for `i∂_tΦ = A(t)Φ` with Hermitian, time-dependent `A`
//! that depends on time through a condensate vector following the mode-space
//! Hartree flow.
//!
//! Each step applies one or two exponentials of `A` sampled inside the step
//! through a Lanczos approximation of `exp(−iτA)v` with an a-posteriori error
//! estimate; a step whose Krylov space does not converge is split in halves.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use num_traits::{Float, Zero};

use super::modes::ModeBasis;
use super::operator::OperatorMatrix;
use super::space::{inner, FockVector};
use crate::error::{Error, Result};
use crate::scalar::{LinalgReal, Real, C};

/// Exponential integrator for one time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Integrator {
    /// `exp(−i dt A(t + dt/2))`, second order.
    #[default]
    Midpoint,
    /// Fourth-order commutator-free Magnus scheme with two exponentials
    /// built from `A` at the two Gauss–Legendre nodes of the step.
    Magnus4,
}

impl Integrator {
    pub fn order(self) -> u32 {
        match self {
            Integrator::Midpoint => 2,
            Integrator::Magnus4 => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Tolerance on the estimated error of one exponential, relative to `‖v‖`.
    pub tol: f64,
    pub max_dim: usize,
    /// Times a non-converged step may be halved before giving up.
    pub max_halvings: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_dim: 40,
            max_halvings: 6,
        }
    }
}

fn lanczos_try<T: LinalgReal>(
    op: &OperatorMatrix<T>,
    v: &[C<T>],
    tau: T,
    opts: &KrylovOptions,
) -> Option<Vec<C<T>>> {
    let beta0 = Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<T>());
    if beta0 == T::zero() {
        return Some(v.to_vec());
    }
    let dim = op.dim();
    let kmax = opts.max_dim.min(dim).max(1);
    let mut basis: Vec<Vec<C<T>>> = vec![v.iter().map(|z| *z / beta0).collect()];
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut w = vec![Complex::zero(); dim];
    let tol = T::lit(opts.tol);
    loop {
        let j = basis.len() - 1;
        op.apply_into(&basis[j], &mut w);
        let a = inner(&basis[j], &w).re;
        alpha.push(a);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &w);
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= *y * c;
                }
            }
        }
        let b = Float::sqrt(w.iter().map(|z| z.norm_sqr()).sum::<T>());
        let k = alpha.len();
        let exhausted = b <= T::lit(1e-14) * Float::max(Float::abs(a), T::one()) || k == dim;
        let check = exhausted || k >= kmax || k.is_multiple_of(2);
        if check {
            let mut t = DMatrix::<T>::zeros(k, k);
            for i in 0..k {
                t[(i, i)] = alpha[i];
                if i + 1 < k {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            // y = V exp(−iτΛ) Vᵀ e₁
            let mut y = vec![Complex::<T>::zero(); k];
            for l in 0..k {
                let ph = Complex::new(T::zero(), -tau * eig.eigenvalues[l]).exp()
                    * eig.eigenvectors[(0, l)];
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi += ph * eig.eigenvectors[(i, l)];
                }
            }
            let est = b * y[k - 1].norm();
            if exhausted || est <= tol {
                let mut out = vec![Complex::zero(); dim];
                for (q, c) in basis.iter().zip(&y) {
                    let c = *c * beta0;
                    for (o, x) in out.iter_mut().zip(q) {
                        *o += *x * c;
                    }
                }
                return Some(out);
            }
            if k >= kmax {
                return None;
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|z| *z / b).collect());
    }
}

/// `exp(−iτA)v` for Hermitian `A`, splitting `τ` when the Krylov space of
/// `opts.max_dim` vectors does not reach `opts.tol`.
pub fn expm_apply<T: LinalgReal>(
    op: &OperatorMatrix<T>,
    v: &[C<T>],
    tau: T,
    opts: &KrylovOptions,
) -> Result<Vec<C<T>>> {
    fn rec<T: LinalgReal>(
        op: &OperatorMatrix<T>,
        v: &[C<T>],
        tau: T,
        opts: &KrylovOptions,
        depth: u32,
    ) -> Result<Vec<C<T>>> {
        if let Some(out) = lanczos_try(op, v, tau, opts) {
            return Ok(out);
        }
        if depth >= opts.max_halvings {
            return Err(Error::NumericalAccuracy {
                what: "Krylov exponential did not converge; reduce dt".into(),
                observed: tau.to_f64_lossy(),
                tolerance: opts.tol,
            });
        }
        let half = tau / T::lit(2.0);
        let mid = rec(op, v, half, opts, depth + 1)?;
        rec(op, &mid, half, opts, depth + 1)
    }
    if v.len() != op.dim() {
        return Err(Error::validation("vector and operator dimensions differ"));
    }
    rec(op, v, tau, opts, 0)
}

/// Forward-only solution of the mode-space Hartree equation, advanced by
/// classical RK4 steps no longer than `max_step`.
#[derive(Clone, Debug)]
pub struct HartreeTrajectory<'a, T> {
    basis: &'a ModeBasis<T>,
    t: T,
    u: Vec<C<T>>,
    max_step: T,
}

impl<'a, T: Real> HartreeTrajectory<'a, T> {
    pub fn new(basis: &'a ModeBasis<T>, u0: &[C<T>], max_step: T) -> Result<Self> {
        if !(max_step > T::zero()) {
            return Err(Error::validation("Hartree step must be positive"));
        }
        super::excitation::check_normalized(u0)?;
        if u0.len() != basis.modes() {
            return Err(Error::validation(
                "condensate vector has the wrong number of modes",
            ));
        }
        Ok(Self {
            basis,
            t: T::zero(),
            u: u0.to_vec(),
            max_step,
        })
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn current(&self) -> &[C<T>] {
        &self.u
    }

    pub fn basis(&self) -> &ModeBasis<T> {
        self.basis
    }

    /// Advances to `t ≥ self.time()` and returns `u(t)`.
    pub fn advance_to(&mut self, t: T) -> Result<&[C<T>]> {
        let span = t - self.t;
        if span < -self.max_step * T::lit(1e-9) {
            return Err(Error::usage("Hartree trajectory cannot move backwards"));
        }
        if span > T::zero() {
            let steps = Float::ceil(span / self.max_step - T::lit(1e-9))
                .to_usize()
                .unwrap_or(1)
                .max(1);
            let h = span / T::from_usize_lossy(steps);
            for _ in 0..steps {
                self.u = self.basis.hartree_step(&self.u, h);
            }
            if self
                .u
                .iter()
                .any(|z| !z.re.is_finite() || !z.im.is_finite())
            {
                return Err(Error::Divergence {
                    step: 0,
                    time: t.to_f64_lossy(),
                    what: "Hartree trajectory became non-finite".into(),
                });
            }
        }
        self.t = t;
        Ok(&self.u)
    }
}

/// State and condensate at a recorded time.
#[derive(Clone, Debug)]
pub struct Snapshot<T> {
    pub t: T,
    pub phi: FockVector<T>,
    pub u: Vec<C<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions<T> {
    pub dt: T,
    pub t_final: T,
    /// Record every `stride`-th step (the initial and final states are always recorded).
    pub stride: usize,
    pub integrator: Integrator,
    pub krylov: KrylovOptions,
}

impl<T: Real> EvolveOptions<T> {
    pub fn new(dt: T, t_final: T) -> Self {
        Self {
            dt,
            t_final,
            stride: usize::MAX,
            integrator: Integrator::default(),
            krylov: KrylovOptions::default(),
        }
    }
}

/// Propagates `phi0` from `t = 0` to `t_final`. `generator(t, u)` returns
/// the Hermitian generator at time `t` for condensate `u(t)`.
pub fn evolve<T, F>(
    mut generator: F,
    hartree: &mut HartreeTrajectory<'_, T>,
    phi0: &FockVector<T>,
    opts: &EvolveOptions<T>,
) -> Result<Vec<Snapshot<T>>>
where
    T: LinalgReal,
    F: FnMut(T, &[C<T>]) -> Result<OperatorMatrix<T>>,
{
    let steps = crate::gp::step_count(opts.t_final, opts.dt)?;
    if hartree.time() != T::zero() {
        return Err(Error::usage("Hartree trajectory must start at t = 0"));
    }
    if opts.stride == 0 {
        return Err(Error::validation("snapshot stride must be positive"));
    }
    let dt = opts.dt;
    let mut phi = phi0.coeffs.clone();
    let mut out = vec![Snapshot {
        t: T::zero(),
        phi: phi0.clone(),
        u: hartree.current().to_vec(),
    }];
    let sqrt3 = Float::sqrt(T::lit(3.0));
    for step in 0..steps {
        let t0 = T::from_usize_lossy(step) * dt;
        match opts.integrator {
            Integrator::Midpoint => {
                let tm = t0 + dt / T::lit(2.0);
                let a = generator(tm, hartree.advance_to(tm)?)?;
                phi = expm_apply(&a, &phi, dt, &opts.krylov)?;
            }
            Integrator::Magnus4 => {
                let c1 = T::lit(0.5) - sqrt3 / T::lit(6.0);
                let c2 = T::lit(0.5) + sqrt3 / T::lit(6.0);
                let w1 = (T::lit(3.0) - T::lit(2.0) * sqrt3) / T::lit(12.0);
                let w2 = (T::lit(3.0) + T::lit(2.0) * sqrt3) / T::lit(12.0);
                let (ta, tb) = (t0 + c1 * dt, t0 + c2 * dt);
                let a1 = generator(ta, hartree.advance_to(ta)?)?;
                let a2 = generator(tb, hartree.advance_to(tb)?)?;
                let first = a1
                    .scale(Complex::new(w2, T::zero()))
                    .add_scaled(Complex::new(w1, T::zero()), &a2);
                let second = a1
                    .scale(Complex::new(w1, T::zero()))
                    .add_scaled(Complex::new(w2, T::zero()), &a2);
                phi = expm_apply(&first, &phi, dt, &opts.krylov)?;
                phi = expm_apply(&second, &phi, dt, &opts.krylov)?;
            }
        }
        let t1 = T::from_usize_lossy(step + 1) * dt;
        let u = hartree.advance_to(t1)?.to_vec();
        if phi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Divergence {
                step: step + 1,
                time: t1.to_f64_lossy(),
                what: "Fock state became non-finite".into(),
            });
        }
        if (step + 1) % opts.stride == 0 || step + 1 == steps {
            out.push(Snapshot {
                t: t1,
                phi: FockVector::new(phi.clone()),
                u,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::bogoliubov::build_bogoliubov;
    use crate::fock::excitation::ExcitationMap;
    use crate::fock::space::FockSpace;

    fn basis() -> ModeBasis<f64> {
        ModeBasis::torus(3, std::f64::consts::TAU, |k| 1.5 * (-0.25 * k * k).exp()).unwrap()
    }

    fn u0(b: &ModeBasis<f64>) -> Vec<C<f64>> {
        b.normalized(&[
            Complex::new(0.4, 0.1),
            Complex::new(1.0, 0.0),
            Complex::new(-0.3, 0.2),
        ])
        .unwrap()
    }

    #[test]
    fn diagonal_generator_gives_exact_phases() {
        let b = ModeBasis::free(2, 1.0).unwrap();
        let e = [0.3, -1.2, 2.5, 0.0, 7.0, 4.4];
        let a = OperatorMatrix::diagonal(&e);
        let phi0 = FockVector::new((0..6).map(|i| Complex::new(1.0 + i as f64, 0.5)).collect());
        let u = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let mut h = HartreeTrajectory::new(&b, &u, 0.01).unwrap();
        let mut o = EvolveOptions::new(0.05, 1.0);
        o.stride = 5;
        let snaps = evolve(|_, _| Ok(a.clone()), &mut h, &phi0, &o).unwrap();
        assert_eq!(snaps.len(), 5);
        for s in &snaps {
            for (i, z) in s.phi.coeffs.iter().enumerate() {
                let want = phi0.coeffs[i] * Complex::from_polar(1.0, -e[i] * s.t);
                assert!((z - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn krylov_matches_dense_exponential() {
        let b = basis();
        let space = FockSpace::new(3, 4).unwrap();
        let a = build_bogoliubov(&b, &space, &u0(&b)).unwrap();
        let d = a.to_dense();
        let eig = SymmetricEigen::new(d);
        let v: Vec<C<f64>> = (0..space.dim())
            .map(|i| Complex::new((i as f64).sin(), 0.2))
            .collect();
        let got = expm_apply(&a, &v, 0.7, &KrylovOptions::default()).unwrap();
        let vv = nalgebra::DVector::from_vec(v);
        let ph = eig.eigenvalues.map(|l| Complex::from_polar(1.0, -0.7 * l));
        let want = &eig.eigenvectors
            * nalgebra::DMatrix::from_diagonal(&ph)
            * eig.eigenvectors.adjoint()
            * vv;
        for (x, y) in got.iter().zip(want.iter()) {
            assert!((x - y).norm() < 1e-11);
        }
        // a Krylov space of two vectors forces splitting and eventually fails
        let tight = KrylovOptions {
            tol: 1e-13,
            max_dim: 2,
            max_halvings: 1,
        };
        assert!(matches!(
            expm_apply(&a, got.as_slice(), 5.0, &tight),
            Err(Error::NumericalAccuracy { .. })
        ));
    }

    fn run(integrator: Integrator, dt: f64) -> (Vec<C<f64>>, f64, f64) {
        let b = basis();
        let space = FockSpace::new(3, 4).unwrap();
        let u = u0(&b);
        let mut h = HartreeTrajectory::new(&b, &u, dt / 2.0).unwrap();
        let mut phi0 = space.zeros::<f64>();
        phi0.coeffs[0] = Complex::new(1.0, 0.0);
        let mut o = EvolveOptions::new(dt, 0.5);
        o.integrator = integrator;
        let snaps = evolve(|_, u| build_bogoliubov(&b, &space, u), &mut h, &phi0, &o).unwrap();
        let last = snaps.last().unwrap();
        let map = ExcitationMap::new(&space, 4, &last.u).unwrap();
        let au = map.annihilator().apply(&last.phi.coeffs);
        let au = au.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (last.phi.coeffs.clone(), (last.phi.norm() - 1.0).abs(), au)
    }

    fn dist(a: &[C<f64>], b: &[C<f64>]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn midpoint_is_second_order_and_unitary() {
        let (a, da, _) = run(Integrator::Midpoint, 0.02);
        let (b, db, _) = run(Integrator::Midpoint, 0.01);
        let (c, dc, au) = run(Integrator::Midpoint, 0.005);
        let ratio = dist(&a, &b) / dist(&b, &c);
        assert!((3.3..4.7).contains(&ratio), "{ratio}");
        assert!(da < 1e-10 && db < 1e-10 && dc < 1e-10);
        assert!(au < 1e-4, "{au}");
    }

    #[test]
    fn magnus_is_fourth_order() {
        let (a, _, _) = run(Integrator::Magnus4, 0.05);
        let (b, _, _) = run(Integrator::Magnus4, 0.025);
        let (c, dc, au) = run(Integrator::Magnus4, 0.0125);
        let ratio = dist(&a, &b) / dist(&b, &c);
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
        assert!(dc < 1e-10);
        assert!(au < 1e-7, "{au}");
    }

    #[test]
    fn hartree_trajectory_is_forward_only() {
        let b = basis();
        let mut h = HartreeTrajectory::new(&b, &u0(&b), 0.01).unwrap();
        h.advance_to(0.1).unwrap();
        assert!(h.advance_to(0.05).is_err());
        assert!(HartreeTrajectory::new(&b, &[Complex::new(2.0, 0.0); 3], 0.01).is_err());
    }
}
