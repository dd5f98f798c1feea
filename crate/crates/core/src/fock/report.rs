// SPDX-License-Identifier: Apache-2.0

//! Reduced density matrices, trace norms, and the desk-scale comparison of
//! exact `N`-body dynamics with the Bogoliubov description.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use num_traits::{Float, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::bogoliubov::{
    build_bogoliubov, build_error_terms, build_hamiltonian, build_truncated_generator,
    commutator_residuals, structural_identity, vacuum_check, StructuralReport, VacuumCheck,
};
use super::evolve::{evolve, EvolveOptions, HartreeTrajectory, Integrator, KrylovOptions};
use super::excitation::ExcitationMap;
use super::modes::ModeBasis;
use super::operator::{annihilation_of, build_annihilation, creation_of, OperatorMatrix};
use super::space::{FockSpace, FockVector};
use crate::error::{Error, Result};
use crate::gp::PotentialSpec;
use crate::scalar::{LinalgReal, Real, C};

fn sector_checked<T: Real>(space: &FockSpace, psi: &FockVector<T>, n: usize) -> Result<()> {
    if psi.coeffs.len() != space.dim() {
        return Err(Error::validation(
            "state does not belong to this Fock space",
        ));
    }
    if n > space.cap() {
        return Err(Error::validation(format!(
            "N = {n} exceeds the Fock cap {}",
            space.cap()
        )));
    }
    let total = psi.norm().to_f64_lossy();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::validation(format!(
            "state must be normalized, got ‖ψ‖ = {total:.15}"
        )));
    }
    let inside = psi.sector_part(space, n).norm().to_f64_lossy();
    if (total * total - inside * inside).max(0.0).sqrt() > 1e-10 {
        return Err(Error::validation(format!(
            "state is not in the N = {n} sector"
        )));
    }
    Ok(())
}

/// Reduced density matrix of order 1 (`γ_{pq} = ⟨a*_q a_p⟩/N`, an `m×m`
/// matrix) or 2 (`Γ_{(pq),(rs)} = ⟨a*_r a*_s a_q a_p⟩/(N(N−1))`, `m²×m²`),
/// both of unit trace.
pub fn reduced_density<T: LinalgReal>(
    space: &FockSpace,
    psi: &FockVector<T>,
    n: usize,
    order: usize,
) -> Result<DMatrix<C<T>>> {
    sector_checked(space, psi, n)?;
    let m = space.modes();
    let ann: Vec<OperatorMatrix<T>> = (0..m)
        .map(|p| build_annihilation(space, p))
        .collect::<Result<_>>()?;
    let once: Vec<Vec<C<T>>> = ann.iter().map(|a| a.apply(&psi.coeffs)).collect();
    let ip = |x: &[C<T>], y: &[C<T>]| super::space::inner(x, y);
    match order {
        1 => {
            let nf = T::from_usize_lossy(n);
            Ok(DMatrix::from_fn(m, m, |p, q| ip(&once[q], &once[p]) / nf))
        }
        2 => {
            if n < 2 {
                return Err(Error::validation("two-body density needs N ≥ 2"));
            }
            let norm = T::from_usize_lossy(n * (n - 1));
            let twice: Vec<Vec<C<T>>> =
                (0..m * m).map(|i| ann[i % m].apply(&once[i / m])).collect();
            // twice[p*m + q] = a_q a_p ψ
            Ok(DMatrix::from_fn(m * m, m * m, |i, j| {
                let (p, q) = (i / m, i % m);
                let (r, s) = (j / m, j % m);
                ip(&twice[r * m + s], &twice[p * m + q]) / norm
            }))
        }
        _ => Err(Error::validation(format!(
            "reduced density order must be 1 or 2, got {order}"
        ))),
    }
}

/// Sum of singular values.
pub fn trace_norm<T: LinalgReal>(a: &DMatrix<C<T>>) -> T {
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(T::zero(), |s, x| s + *x)
}

/// `|u⟩⟨u|`.
pub fn projector<T: LinalgReal>(u: &[C<T>]) -> DMatrix<C<T>> {
    DMatrix::from_fn(u.len(), u.len(), |p, q| u[p] * u[q].conj())
}

/// Dense `N`-sector block of an operator.
fn sector_block<T: LinalgReal>(
    space: &FockSpace,
    op: &OperatorMatrix<T>,
    n: usize,
) -> DMatrix<C<T>> {
    let r = space.sector(n);
    let mut d = DMatrix::from_element(r.len(), r.len(), Complex::zero());
    for (i, j, v) in op.entries() {
        if r.contains(&i) && r.contains(&j) {
            d[(i - r.start, j - r.start)] = v;
        }
    }
    d
}

/// Smallest eigenvalue of `H_N` on the `N`-particle sector.
pub fn ground_energy<T: LinalgReal>(basis: &ModeBasis<T>, n: usize) -> Result<T> {
    let space = FockSpace::new(basis.modes(), n)?;
    let h = build_hamiltonian(basis, &space, n)?;
    Ok(SymmetricEigen::new(sector_block(&space, &h, n))
        .eigenvalues
        .min())
}

/// `a*(u)^N Ω / √N!`.
pub fn product_state<T: Real>(space: &FockSpace, u: &[C<T>], n: usize) -> Result<FockVector<T>> {
    if n > space.cap() {
        return Err(Error::validation(format!(
            "N = {n} exceeds the Fock cap {}",
            space.cap()
        )));
    }
    let ad = OperatorMatrix::from_terms(space, &creation_of(u));
    let mut v = space.zeros::<T>().coeffs;
    v[space.vacuum()] = Complex::new(T::one(), T::zero());
    for k in 1..=n {
        v = ad.apply(&v);
        let s = Float::sqrt(T::from_usize_lossy(k));
        v.iter_mut().for_each(|z| *z = *z / s);
    }
    Ok(FockVector::new(v))
}

/// Mode basis on a torus of length `ell` whose wavevectors point along
/// `direction`, carrying the scaled pair potential `ŵ(k N^{−β})`.
pub fn mode_basis_for<T: Real>(
    potential: &PotentialSpec<T>,
    modes: usize,
    ell: T,
    direction: [T; 3],
) -> Result<ModeBasis<T>> {
    let norm = Float::sqrt(direction.iter().map(|x| *x * *x).sum::<T>());
    if !(norm > T::zero()) {
        return Err(Error::validation("torus direction must be nonzero"));
    }
    let d = direction.map(|x| x / norm);
    let s = potential.length_scale();
    ModeBasis::torus(modes, ell, |k| {
        let ks = k * s;
        potential.w_hat_at([ks * d[0], ks * d[1], ks * d[2]])
    })
}

/// Inputs of the exact-versus-Bogoliubov comparison.
#[derive(Clone, Debug)]
pub struct ComparisonSetup<T> {
    pub modes: usize,
    pub ell: T,
    /// Pair potential; its particle number is overridden per entry.
    pub potential: PotentialSpec<T>,
    pub direction: [T; 3],
    /// Raw initial condensate amplitudes (normalized internally).
    pub u0: Vec<C<T>>,
    pub particles: Vec<usize>,
    pub t_final: T,
    pub dt: T,
    /// Record every `stride`-th step; `usize::MAX` keeps only the end points.
    pub stride: usize,
    pub integrator: Integrator,
}

/// One line of the comparison table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub t: f64,
    /// `‖Ψ_N(t) − U_N(t)* Φ(t)‖`.
    pub norm_error: f64,
    /// `‖Γ^{(1)}_{Ψ_N(t)} − |u(t)⟩⟨u(t)|‖_{𝔖₁}`.
    pub trace_error: f64,
    /// `|‖Φ(t)‖ − ‖Φ(0)‖|`.
    pub norm_drift: f64,
    /// `‖a(u(t)) Φ(t)‖`.
    pub a_u_residual: f64,
}

impl ComparisonRow {
    pub const CSV_HEADER: &'static str = "N,t,norm_error,trace_error,norm_drift,a_u_residual";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.n, self.t, self.norm_error, self.trace_error, self.norm_drift, self.a_u_residual
        )
    }
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from(ComparisonRow::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

impl<T: Real> ComparisonSetup<T> {
    pub fn validate(&self) -> Result<()> {
        if self.particles.is_empty() {
            return Err(Error::validation("particle list is empty"));
        }
        if self.particles.iter().any(|&n| n < 2) {
            return Err(Error::validation("every N must be at least 2"));
        }
        if self.u0.len() != self.modes {
            return Err(Error::validation(format!(
                "initial condensate has {} amplitudes for {} modes",
                self.u0.len(),
                self.modes
            )));
        }
        if self.stride == 0 {
            return Err(Error::validation("snapshot stride must be positive"));
        }
        crate::gp::step_count(self.t_final, self.dt)?;
        Ok(())
    }

    pub fn basis(&self, n: usize) -> Result<ModeBasis<T>> {
        let pot = self.potential.with_particles(T::from_usize_lossy(n))?;
        mode_basis_for(&pot, self.modes, self.ell, self.direction)
    }

    fn options(&self) -> EvolveOptions<T> {
        EvolveOptions {
            dt: self.dt,
            t_final: self.t_final,
            stride: self.stride,
            integrator: self.integrator,
            krylov: KrylovOptions::default(),
        }
    }
}

fn vec_norm<T: Real>(v: &[C<T>]) -> T {
    Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<T>())
}

fn rows_for<T: LinalgReal>(setup: &ComparisonSetup<T>, n: usize) -> Result<Vec<ComparisonRow>> {
    let basis = setup.basis(n)?;
    let u0 = basis.normalized(&setup.u0)?;
    let space = FockSpace::new(setup.modes, n)?;
    let psi0 = product_state(&space, &u0, n)?;

    // exact dynamics on the N sector
    let h = build_hamiltonian(&basis, &space, n)?;
    let eig = SymmetricEigen::new(sector_block(&space, &h, n));
    let r = space.sector(n);
    let c0 =
        eig.eigenvectors.adjoint() * nalgebra::DVector::from_column_slice(&psi0.coeffs[r.clone()]);
    let exact_at = |t: T| -> FockVector<T> {
        let ph = nalgebra::DVector::from_fn(c0.len(), |i, _| {
            c0[i] * Complex::new(T::zero(), -t * eig.eigenvalues[i]).exp()
        });
        let v = &eig.eigenvectors * ph;
        let mut out = space.zeros::<T>();
        for (i, z) in r.clone().zip(v.iter()) {
            out.coeffs[i] = *z;
        }
        out
    };

    // Bogoliubov dynamics of U_N Ψ_N(0)
    let phi0 = ExcitationMap::new(&space, n, &u0)?.apply(&psi0)?;
    let mut hartree = HartreeTrajectory::new(&basis, &u0, setup.dt / T::lit(2.0))?;
    let snaps = evolve(
        |_, u| build_bogoliubov(&basis, &space, u),
        &mut hartree,
        &phi0,
        &setup.options(),
    )?;
    let n0 = phi0.norm();
    snaps
        .iter()
        .map(|s| {
            let map = ExcitationMap::new(&space, n, &s.u)?;
            let psi = exact_at(s.t);
            let approx = map.inverse(&s.phi)?;
            let gamma = reduced_density(&space, &psi, n, 1)? - projector(&s.u);
            Ok(ComparisonRow {
                n,
                t: s.t.to_f64_lossy(),
                norm_error: psi.distance(&approx).to_f64_lossy(),
                trace_error: trace_norm(&gamma).to_f64_lossy(),
                norm_drift: Float::abs(s.phi.norm() - n0).to_f64_lossy(),
                a_u_residual: vec_norm(&map.annihilator().apply(&s.phi.coeffs)).to_f64_lossy(),
            })
        })
        .collect()
}

/// Exact evolution of `u(0)^{⊗N}` under `H_N` against the Bogoliubov
/// evolution of `U_N Ψ_N(0)`, for every `N` of the setup (in parallel).
pub fn comparison_report<T: LinalgReal>(setup: &ComparisonSetup<T>) -> Result<Vec<ComparisonRow>> {
    setup.validate()?;
    let per_n: Vec<Vec<ComparisonRow>> = setup
        .particles
        .par_iter()
        .map(|&n| rows_for(setup, n))
        .collect::<Result<_>>()?;
    Ok(per_n.into_iter().flatten().collect())
}

/// Worst-case invariants along one trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub max_norm_drift: f64,
    pub max_a_u_residual: f64,
    /// Largest amplitude above `M` (localized dynamics only).
    pub max_above_m: Option<f64>,
}

/// Invariants of the Bogoliubov trajectory and of the localized trajectory
/// `𝟙^{≤M}𝒢_N𝟙^{≤M}`, both started from `U_N u(0)^{⊗N}`.
pub fn trajectory_invariants<T: LinalgReal>(
    setup: &ComparisonSetup<T>,
    n: usize,
    m_cap: usize,
) -> Result<(InvariantReport, InvariantReport)> {
    setup.validate()?;
    let basis = setup.basis(n)?;
    let u0 = basis.normalized(&setup.u0)?;
    let space = FockSpace::new(setup.modes, n)?;
    let phi0 = ExcitationMap::new(&space, n, &u0)?.apply(&product_state(&space, &u0, n)?)?;
    let mut opts = setup.options();
    opts.stride = 1;
    let scan = |snaps: &[super::evolve::Snapshot<T>], localized: bool| -> InvariantReport {
        let n0 = phi0.norm();
        let mut rep = InvariantReport {
            max_norm_drift: 0.0,
            max_a_u_residual: 0.0,
            max_above_m: localized.then_some(0.0),
        };
        for s in snaps {
            let a_u = OperatorMatrix::from_terms(&space, &annihilation_of(&s.u));
            rep.max_norm_drift = rep
                .max_norm_drift
                .max(Float::abs(s.phi.norm() - n0).to_f64_lossy());
            rep.max_a_u_residual = rep
                .max_a_u_residual
                .max(vec_norm(&a_u.apply(&s.phi.coeffs)).to_f64_lossy());
            if let Some(x) = rep.max_above_m.as_mut() {
                *x = x.max(s.phi.amplitude_above(&space, m_cap).to_f64_lossy());
            }
        }
        rep
    };
    let mut h1 = HartreeTrajectory::new(&basis, &u0, setup.dt / T::lit(2.0))?;
    let bog = evolve(
        |_, u| build_bogoliubov(&basis, &space, u),
        &mut h1,
        &phi0,
        &opts,
    )?;
    let mut h2 = HartreeTrajectory::new(&basis, &u0, setup.dt / T::lit(2.0))?;
    let loc = evolve(
        |_, u| build_truncated_generator(&basis, &space, u, n, m_cap),
        &mut h2,
        &phi0,
        &opts,
    )?;
    Ok((scan(&bog, false), scan(&loc, true)))
}

/// Tolerance on the generator identity.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Tolerance on the number-operator commutators, Hermiticity and the vacuum check.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Operator identities checked before any propagation.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentitySuite {
    pub structural: StructuralReport,
    pub commutators: [f64; 5],
    pub vacuum: VacuumCheck,
}

impl IdentitySuite {
    pub fn run<T: LinalgReal>(basis: &ModeBasis<T>, n: usize, u: &[C<T>]) -> Result<Self> {
        let space = FockSpace::new(basis.modes(), n)?;
        let u = basis.normalized(u)?;
        let structural = structural_identity(basis, &space, &u, n)?;
        let terms = build_error_terms(basis, &space, &u, n)?;
        Ok(Self {
            structural,
            commutators: commutator_residuals(&terms, &space),
            vacuum: vacuum_check(basis, &space, &u, n)?,
        })
    }

    /// Every residual against its tolerance, as `(name, observed, tolerance)`.
    pub fn checks(&self) -> Vec<(&'static str, f64, f64)> {
        let s = &self.structural;
        let mut out = vec![
            ("excitation map isometry", s.isometry, ALGEBRA_TOL),
            ("generator identity", s.generator, IDENTITY_TOL),
            (
                "cubic term Q vs 1 on excitation space",
                s.r3_variants,
                ALGEBRA_TOL,
            ),
            ("hermiticity", s.hermiticity, ALGEBRA_TOL),
            (
                "error terms on the vacuum",
                self.vacuum.residual,
                ALGEBRA_TOL,
            ),
            (
                "vacuum expectation of the error terms",
                self.vacuum.expectation_re.hypot(self.vacuum.expectation_im),
                ALGEBRA_TOL,
            ),
        ];
        let names = [
            "[R0, N]",
            "[R1, N] - R1",
            "[R2, N] + 2 R2",
            "[R3, N] - R3",
            "[R4, N]",
        ];
        for (name, r) in names.iter().zip(self.commutators) {
            out.push((name, r, ALGEBRA_TOL));
        }
        out
    }

    /// `Err` naming the first failed identity.
    pub fn require(&self) -> Result<()> {
        for (name, got, tol) in self.checks() {
            if !(got <= tol) {
                return Err(Error::NumericalAccuracy {
                    what: format!("operator identity failed: {name}"),
                    observed: got,
                    tolerance: tol,
                });
            }
        }
        Ok(())
    }
}
