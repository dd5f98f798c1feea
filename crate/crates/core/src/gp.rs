// SPDX-License-Identifier: Apache-2.0

//! Split-step integration of the limiting equation
//! `i∂ₜφ = (−Δ + a|φ|² + b K∗|φ|² − μ)φ` and of its `N`-scaled counterpart
//! `i∂ₜu = (−Δ + w_N∗|u|² − μ_N)u`, with `μ = ½∫|ψ|² V` for the
//! equation's mean-field potential `V`.
//!
//! Both equations are driven by a single real multiplier: `a + b K̂(k)` in the
//! limit, and `ŵ(k N^{−β}) = ŵ₀(k N^{−β}) + b·FT(𝟙_{|x|>R}K)(k N^{−β})` at
//! finite `N`.

use std::fmt;

use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::scalar::{cis, Real, C};
use crate::spectral::{Field, FourierPlan, Grid3, MultiplierTable, Space};

/// Short-range part `w₀` of the pair potential, normalized so that `∫w₀ = a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShortRange<T> {
    /// `w₀(x) = a (2πσ²)^{−3/2} e^{−|x|²/(2σ²)}`, `ŵ₀(k) = a e^{−σ²|k|²/2}`.
    Gaussian { a: T, sigma: T },
    /// Uniform ball of radius `ρ`: `ŵ₀(k) = a · 3 j₁(kρ)/(kρ)`.
    Ball { a: T, radius: T },
}

impl<T: Real> ShortRange<T> {
    pub fn a(&self) -> T {
        match *self {
            ShortRange::Gaussian { a, .. } | ShortRange::Ball { a, .. } => a,
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, len, name) = match *self {
            ShortRange::Gaussian { a, sigma } => (a, sigma, "gaussian width"),
            ShortRange::Ball { a, radius } => (a, radius, "ball radius"),
        };
        if !Float::is_finite(a) {
            return Err(Error::validation("short-range coupling a must be finite"));
        }
        if !(len > T::zero()) || !Float::is_finite(len) {
            return Err(Error::validation(format!(
                "{name} must be positive, got {len}"
            )));
        }
        Ok(())
    }

    /// `ŵ₀` at wavenumber magnitude `k`.
    pub fn hat(&self, k: T) -> T {
        match *self {
            ShortRange::Gaussian { a, sigma } => {
                a * Float::exp(-sigma * sigma * k * k / T::lit(2.0))
            }
            ShortRange::Ball { a, radius } => a * three_j1_over_x(k * radius),
        }
    }

    /// Largest observed `|ŵ₀(k) − a| / |k|` over the nonzero grid wavevectors.
    pub fn lipschitz_at_origin(&self, grid: &Grid3<T>) -> T {
        let a = self.a();
        (1..grid.len())
            .map(|i| {
                let k = Float::sqrt(grid.k_squared(i));
                Float::abs(self.hat(k) - a) / k
            })
            .fold(T::zero(), Float::max)
    }
}

/// `3 j₁(x)/x = 3(sin x − x cos x)/x³`, with its Taylor series near 0.
pub fn three_j1_over_x<T: Real>(x: T) -> T {
    let x = Float::abs(x);
    if x < T::lit(1e-2) {
        let x2 = x * x;
        T::one() - x2 / T::lit(10.0) + x2 * x2 / T::lit(280.0)
    } else {
        let (s, c) = Float::sin_cos(x);
        T::lit(3.0) * (s - x * c) / (x * x * x)
    }
}

/// Pair potential `w = w₀ + b 𝟙_{|x|>R} K` and its scaling `w_N = N^{3β} w(N^β ·)`.
#[derive(Clone, Debug)]
pub struct PotentialSpec<T> {
    pub w0: ShortRange<T>,
    pub b: T,
    /// Angular profile and truncation radius `R` of the long-range part.
    pub kernel: KernelSpec<T>,
    pub beta: T,
    pub particles: T,
}

/// Which equation a state is evolved by.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Equation<T> {
    Limiting,
    Scaled { particles: T },
}

/// Stability classification of the interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    /// `ŵ ≥ 0` on the grid.
    StableHatPositive,
    /// `a + b·min K̂ ≥ 0`.
    StableAVsK,
    Conditional,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::StableHatPositive => "stable_hat_positive",
            Stability::StableAVsK => "stable_a_vs_K",
            Stability::Conditional => "conditional",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StabilityReport<T> {
    pub min_w_hat: T,
    pub min_k_hat: T,
    /// `a + b·min K̂`.
    pub margin: T,
    pub class: Stability,
}

impl<T: Real> PotentialSpec<T> {
    pub fn new(
        w0: ShortRange<T>,
        b: T,
        kernel: KernelSpec<T>,
        beta: T,
        particles: T,
    ) -> Result<Self> {
        w0.validate()?;
        if !(b >= T::zero()) || !Float::is_finite(b) {
            return Err(Error::validation(format!(
                "dipolar coupling b must be ≥ 0, got {b}"
            )));
        }
        if !(beta > T::zero()) || !Float::is_finite(beta) {
            return Err(Error::validation(format!(
                "scaling exponent β must be > 0, got {beta}"
            )));
        }
        if !(particles >= T::lit(2.0)) || !Float::is_finite(particles) {
            return Err(Error::validation(format!(
                "particle number N must be ≥ 2, got {particles}"
            )));
        }
        Ok(Self {
            w0,
            b,
            kernel,
            beta,
            particles,
        })
    }

    pub fn with_particles(&self, particles: T) -> Result<Self> {
        Self::new(self.w0, self.b, self.kernel.clone(), self.beta, particles)
    }

    pub fn a(&self) -> T {
        self.w0.a()
    }

    pub fn radius(&self) -> T {
        self.kernel.radius()
    }

    /// `N^{−β}`.
    pub fn length_scale(&self) -> T {
        Float::powf(self.particles, -self.beta)
    }

    /// `ŵ(k) = ŵ₀(k) + b·FT(𝟙_{|x|>R}K)(k)` at a single wavevector.
    pub fn w_hat_at(&self, k: [T; 3]) -> T {
        let kn = Float::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        let long = if self.b == T::zero() {
            T::zero()
        } else {
            self.b * self.kernel.exterior_at(k)
        };
        self.w0.hat(kn) + long
    }

    /// Full `K̂` on the grid, zero when `b = 0` so no kernel work is done.
    fn kernel_table(&self, grid: Grid3<T>) -> Result<MultiplierTable<T>> {
        if self.b == T::zero() {
            Ok(MultiplierTable::constant(grid, T::zero()))
        } else {
            self.kernel.full_multiplier(grid)
        }
    }

    /// `a + b K̂(k)`.
    pub fn limiting_multiplier(&self, grid: Grid3<T>) -> Result<MultiplierTable<T>> {
        let a = self.a();
        let k = self.kernel_table(grid)?;
        let mut m = MultiplierTable::constant(grid, a);
        if self.b != T::zero() {
            m = m.add_scaled(self.b, &k)?;
        }
        Ok(m)
    }

    /// `ŵ_N(k) = ŵ(k N^{−β})`.
    pub fn scaled_multiplier(&self, grid: Grid3<T>) -> MultiplierTable<T> {
        self.scaled_multiplier_at_scale(grid, self.length_scale())
    }

    /// `k ↦ ŵ(k s)`; `s = 0` gives the pointwise `N → ∞` limit `a + b K̂(k)`.
    pub fn scaled_multiplier_at_scale(&self, grid: Grid3<T>, s: T) -> MultiplierTable<T> {
        let w0 = self.w0;
        let mut m = MultiplierTable::from_fn(grid, |k| {
            let kn = Float::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
            w0.hat(kn * s)
        });
        if self.b != T::zero() {
            let ext = self.kernel.exterior_multiplier_scaled(grid, s);
            for (v, e) in m.values.iter_mut().zip(&ext.values) {
                *v = *v + self.b * *e;
            }
        }
        m
    }

    pub fn multiplier(&self, equation: Equation<T>, grid: Grid3<T>) -> Result<MultiplierTable<T>> {
        match equation {
            Equation::Limiting => self.limiting_multiplier(grid),
            Equation::Scaled { particles } => {
                Ok(self.with_particles(particles)?.scaled_multiplier(grid))
            }
        }
    }

    /// Classifies the interaction: `ŵ ≥ 0` on the grid, else `a + b·min K̂ ≥ 0`,
    /// else conditional.
    pub fn stability_predicate(&self, grid: Grid3<T>) -> Result<StabilityReport<T>> {
        let scaled = self.scaled_multiplier(grid);
        let k = self.kernel_table(grid)?;
        let min_k_hat = if self.b == T::zero() {
            T::zero()
        } else {
            k.min()
        };
        let min_w_hat = scaled.min();
        let margin = self.a() + self.b * min_k_hat;
        let class = if min_w_hat >= T::zero() {
            Stability::StableHatPositive
        } else if margin >= T::zero() {
            Stability::StableAVsK
        } else {
            Stability::Conditional
        };
        Ok(StabilityReport {
            min_w_hat,
            min_k_hat,
            margin,
            class,
        })
    }
}

/// Wavefunction together with its time and the equation it follows.
#[derive(Clone, Debug)]
pub struct GPState<T> {
    pub psi: Field<T>,
    pub t: T,
    pub equation: Equation<T>,
}

impl<T: Real> GPState<T> {
    pub fn new(psi: Field<T>, equation: Equation<T>) -> Result<Self> {
        if psi.space != Space::Position {
            return Err(Error::usage("GP states are stored in position space"));
        }
        Ok(Self {
            psi,
            t: T::zero(),
            equation,
        })
    }

    pub fn mass(&self) -> T {
        self.psi.norm_sqr()
    }
}

/// Precomputed propagator data for one equation on one grid.
#[derive(Clone)]
pub struct Propagator<T: Real> {
    plan: FourierPlan<T>,
    multiplier: MultiplierTable<T>,
    subtract_mu: bool,
    kinetic_cache: Option<(T, Vec<C<T>>)>,
}

impl<T: Real> fmt::Debug for Propagator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Propagator")
            .field("grid", self.plan.grid())
            .field("subtract_mu", &self.subtract_mu)
            .finish()
    }
}

impl<T: Real> Propagator<T> {
    pub fn new(plan: FourierPlan<T>, multiplier: MultiplierTable<T>) -> Result<Self> {
        crate::spectral::check_same_grid(plan.grid(), &multiplier.grid)?;
        Ok(Self {
            plan,
            multiplier,
            subtract_mu: true,
            kinetic_cache: None,
        })
    }

    pub fn for_equation(
        pot: &PotentialSpec<T>,
        equation: Equation<T>,
        plan: FourierPlan<T>,
    ) -> Result<Self> {
        let m = pot.multiplier(equation, *plan.grid())?;
        Self::new(plan, m)
    }

    /// Applies the two-thirds dealiasing mask to the interaction.
    pub fn dealiased(mut self) -> Self {
        let mask = MultiplierTable::two_thirds_mask(*self.plan.grid());
        self.multiplier = self.multiplier.product(&mask).expect("same grid");
        self
    }

    /// Whether `μ(t)` is subtracted inside the potential phase (default: yes).
    pub fn with_mu_subtraction(mut self, on: bool) -> Self {
        self.subtract_mu = on;
        self
    }

    pub fn multiplier(&self) -> &MultiplierTable<T> {
        &self.multiplier
    }

    pub fn plan(&self) -> &FourierPlan<T> {
        &self.plan
    }

    /// Mean-field potential `V = m ∗ |ψ|²` (real part) in position space.
    pub fn potential(&self, psi: &Field<T>) -> Result<Vec<T>> {
        let rho = psi.density()?;
        let v = self.plan.convolve(&rho, &self.multiplier)?;
        Ok(v.values.iter().map(|z| z.re).collect())
    }

    /// `½∫|ψ|² V`.
    fn half_interaction(&self, psi: &Field<T>, v: &[T]) -> T {
        let s: T = psi
            .values
            .iter()
            .zip(v)
            .map(|(z, v)| z.norm_sqr() * *v)
            .sum();
        s * psi.grid.cell_volume() / T::lit(2.0)
    }

    /// `μ = ½∫|ψ|² V`.
    pub fn chemical_potential(&self, state: &GPState<T>) -> Result<T> {
        let v = self.potential(&state.psi)?;
        Ok(self.half_interaction(&state.psi, &v))
    }

    /// `∫|∇ψ|²`.
    pub fn kinetic_energy(&self, psi: &Field<T>) -> Result<T> {
        let hat = self.plan.forward(psi)?;
        let k2 = self.plan.k_squared();
        let s: T = hat
            .values
            .iter()
            .zip(k2)
            .map(|(z, k)| z.norm_sqr() * *k)
            .sum();
        Ok(s / psi.grid.volume())
    }

    /// `E = ∫|∇ψ|² + ½∫|ψ|² V`.
    pub fn energy(&self, state: &GPState<T>) -> Result<T> {
        let v = self.potential(&state.psi)?;
        Ok(self.kinetic_energy(&state.psi)? + self.half_interaction(&state.psi, &v))
    }

    /// `e^{−i(V − μ)τ}` applied pointwise; the density, hence `V`, is unchanged.
    fn potential_phase(&self, psi: &mut Field<T>, tau: T) -> Result<()> {
        let v = self.potential(psi)?;
        let mu = if self.subtract_mu {
            self.half_interaction(psi, &v)
        } else {
            T::zero()
        };
        for (z, v) in psi.values.iter_mut().zip(&v) {
            *z = *z * cis(-(*v - mu) * tau);
        }
        Ok(())
    }

    fn kinetic_phases(&mut self, dt: T) -> &[C<T>] {
        let fresh = match &self.kinetic_cache {
            Some((cached, _)) => *cached != dt,
            None => true,
        };
        if fresh {
            let phases = self
                .plan
                .k_squared()
                .iter()
                .map(|k2| cis(-*k2 * dt))
                .collect();
            self.kinetic_cache = Some((dt, phases));
        }
        &self.kinetic_cache.as_ref().unwrap().1
    }

    /// `ψ ← e^{iΔ dt} ψ` exactly in Fourier space.
    fn kinetic_step(&mut self, psi: &mut Field<T>, dt: T) {
        let plan = self.plan.clone();
        plan.forward_raw(&mut psi.values);
        let phases = self.kinetic_phases(dt);
        for (z, p) in psi.values.iter_mut().zip(phases) {
            *z = *z * *p;
        }
        plan.inverse_raw(&mut psi.values);
    }

    /// One Strang step: half potential phase, full kinetic step, half potential phase.
    pub fn step_strang(&mut self, state: &mut GPState<T>, dt: T) -> Result<()> {
        self.advance(state, dt, 1, 0)
    }

    /// `steps` Strang steps of size `dt`. Consecutive half potential phases share
    /// a density and are fused. `step_offset` only labels divergence errors.
    pub fn advance(
        &mut self,
        state: &mut GPState<T>,
        dt: T,
        steps: usize,
        step_offset: usize,
    ) -> Result<()> {
        if !(dt > T::zero()) || !Float::is_finite(dt) {
            return Err(Error::validation(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if steps == 0 {
            return Ok(());
        }
        let half = dt / T::lit(2.0);
        self.potential_phase(&mut state.psi, half)?;
        for s in 0..steps {
            self.kinetic_step(&mut state.psi, dt);
            let tau = if s + 1 == steps { half } else { dt };
            self.potential_phase(&mut state.psi, tau)?;
            state.t = state.t + dt;
            if !state.psi.is_finite() {
                return Err(Error::Divergence {
                    step: step_offset + s + 1,
                    time: state.t.to_f64_lossy(),
                    what: "non-finite wavefunction".into(),
                });
            }
        }
        Ok(())
    }

    pub fn diagnostics(&self, state: &GPState<T>) -> Result<Diagnostics<T>> {
        let hat = self.plan.forward(&state.psi)?;
        let v = self.potential(&state.psi)?;
        let interaction = self.half_interaction(&state.psi, &v);
        let k2 = self.plan.k_squared();
        let vol = state.psi.grid.volume();
        let mut sums = [T::zero(); 5];
        for (z, k) in hat.values.iter().zip(k2) {
            let p = z.norm_sqr();
            let w = T::one() + *k;
            sums[0] = sums[0] + p * *k;
            sums[1] = sums[1] + p * w;
            sums[2] = sums[2] + p * w * w;
            sums[3] = sums[3] + p * w * w * w;
            sums[4] = sums[4] + p * w * w * w * w;
        }
        let kinetic = sums[0] / vol;
        Ok(Diagnostics {
            t: state.t,
            mass: state.mass(),
            energy: kinetic + interaction,
            sobolev: [
                Float::sqrt(sums[1] / vol),
                Float::sqrt(sums[2] / vol),
                Float::sqrt(sums[3] / vol),
                Float::sqrt(sums[4] / vol),
            ],
            mu: if self.subtract_mu {
                interaction
            } else {
                T::zero()
            },
        })
    }

    /// Evolves to `t_final` in steps of `dt`, recording diagnostics every
    /// `stride` steps (and at the end) and handing each recorded state to `snapshot`.
    pub fn run(
        &mut self,
        state: &mut GPState<T>,
        dt: T,
        t_final: T,
        stride: usize,
        mut snapshot: impl FnMut(&GPState<T>, &Diagnostics<T>) -> Result<()>,
    ) -> Result<Vec<Diagnostics<T>>> {
        let steps = step_count(t_final - state.t, dt)?;
        let stride = stride.max(1);
        let mut out = Vec::new();
        let d = self.diagnostics(state)?;
        snapshot(state, &d)?;
        out.push(d);
        let mut done = 0;
        while done < steps {
            let chunk = stride.min(steps - done);
            self.advance(state, dt, chunk, done)?;
            done += chunk;
            let d = self.diagnostics(state)?;
            snapshot(state, &d)?;
            out.push(d);
        }
        Ok(out)
    }
}

/// Number of steps of size `dt` covering `span`; `span` must be a whole multiple.
pub fn step_count<T: Real>(span: T, dt: T) -> Result<usize> {
    if !(dt > T::zero()) {
        return Err(Error::validation(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if span < T::zero() {
        return Err(Error::validation("final time precedes current time"));
    }
    let r = span / dt;
    let n = Float::round(r);
    if Float::abs(r - n) > T::lit(1e-6) * Float::max(n, T::one()) {
        return Err(Error::validation(format!(
            "t_final span {span} is not a whole multiple of dt = {dt}"
        )));
    }
    Ok(n.to_usize().unwrap_or(0))
}

/// `‖ψ‖_{H^s} = (∫(1+|k|²)^s |ψ̂|²)^{1/2}` for `s ∈ {1, 2, 3, 4}`.
pub fn sobolev_norm<T: Real>(plan: &FourierPlan<T>, psi: &Field<T>, order: u32) -> Result<T> {
    if !(1..=4).contains(&order) {
        return Err(Error::validation(format!(
            "Sobolev order must be 1..=4, got {order}"
        )));
    }
    let hat = plan.forward(psi)?;
    let s: T = hat
        .values
        .iter()
        .zip(plan.k_squared())
        .map(|(z, k)| z.norm_sqr() * Float::powi(T::one() + *k, order as i32))
        .sum();
    Ok(Float::sqrt(s / psi.grid.volume()))
}

/// One row of trajectory diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics<T> {
    pub t: T,
    pub mass: T,
    pub energy: T,
    /// `H¹ … H⁴` norms.
    pub sobolev: [T; 4],
    pub mu: T,
}

impl<T: Real> Diagnostics<T> {
    pub const CSV_HEADER: &'static str = "t,mass,energy,h1,h2,h3,h4,mu";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.t.to_f64_lossy(),
            self.mass.to_f64_lossy(),
            self.energy.to_f64_lossy(),
            self.sobolev[0].to_f64_lossy(),
            self.sobolev[1].to_f64_lossy(),
            self.sobolev[2].to_f64_lossy(),
            self.sobolev[3].to_f64_lossy(),
            self.mu.to_f64_lossy()
        )
    }
}

pub fn diagnostics_csv<T: Real>(rows: &[Diagnostics<T>]) -> String {
    let mut s = String::from(Diagnostics::<T>::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Default time step `0.1·dx²`.
pub fn default_dt<T: Real>(grid: &Grid3<T>) -> T {
    T::lit(0.1) * grid.dx() * grid.dx()
}

/// Initial data, each normalized to unit `L²` norm on the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialData<T> {
    /// `(πσ²)^{−3/4} e^{−|x−c|²/(2σ²)} e^{i k·x}`.
    Gaussian {
        sigma: T,
        center: [T; 3],
        momentum: [T; 3],
    },
    /// `L^{−3/2} e^{i(2π/L) m·x}`.
    PlaneWave { mode: [i64; 3] },
    /// Smooth compactly supported bump `(1 − |x−c|²/ρ²)₊⁵`.
    Bump { radius: T, center: [T; 3] },
}

impl<T: Real> InitialData<T> {
    pub fn sample(&self, grid: Grid3<T>) -> Result<Field<T>> {
        let mut f = match *self {
            InitialData::Gaussian {
                sigma,
                center,
                momentum,
            } => {
                if !(sigma > T::zero()) {
                    return Err(Error::validation("gaussian width must be positive"));
                }
                Field::from_fn(grid, |x| {
                    let d = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
                    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                    let amp = Float::exp(-r2 / (T::lit(2.0) * sigma * sigma));
                    let ph = momentum[0] * x[0] + momentum[1] * x[1] + momentum[2] * x[2];
                    cis(ph) * amp
                })
            }
            InitialData::PlaneWave { mode } => {
                let dk = grid.dk();
                Field::from_fn(grid, |x| {
                    let ph = dk
                        * (T::from_i64(mode[0]).unwrap() * x[0]
                            + T::from_i64(mode[1]).unwrap() * x[1]
                            + T::from_i64(mode[2]).unwrap() * x[2]);
                    cis(ph)
                })
            }
            InitialData::Bump { radius, center } => {
                if !(radius > T::zero()) {
                    return Err(Error::validation("bump radius must be positive"));
                }
                Field::from_fn(grid, |x| {
                    let d = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
                    let s = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (radius * radius);
                    let v = Float::max(T::one() - s, T::zero());
                    Complex::new(Float::powi(v, 5), T::zero())
                })
            }
        };
        let norm = f.norm();
        if !(norm > T::zero()) {
            return Err(Error::validation("initial datum vanishes on the grid"));
        }
        f.scale(Complex::new(T::one() / norm, T::zero()));
        Ok(f)
    }
}
