// SPDX-License-Identifier: Apache-2.0

//! Singular kernels `K(x) = Ω(x/|x|)/|x|³` with an even, mean-zero angular
//! profile `Ω`, their truncations to `|x| ≤ R` and `|x| > R`, and the Fourier
//! multipliers of each.
//!
//! Two independent routes are provided for every multiplier:
//!
//! * a direct quadrature of
//!   `∫_{S²} ∫₀^R (cos(r k·ω) − 1)/r Ω(ω) dr dσ(ω)` in a frame aligned with `k`
//!   (panelled Gauss–Legendre in the radial and polar variables, trapezoid in
//!   azimuth), with order doubling until two successive results agree, and
//! * a fast path through the spherical-harmonic expansion of `Ω` and the
//!   Funk–Hecke theorem, which reduces the angular integral to one-dimensional
//!   radial profiles per degree. For the dipolar profile the `R → ∞` limit is
//!   the closed form `(4π/3)(3 cos²θ_k − 1)`.
//!
//! The multiplier at `k = 0` is defined to be 0, consistent with the mean-zero
//! condition on `Ω`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Float;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{cosine_integral_profile, legendre, GaussLegendre};
use crate::scalar::Real;
use crate::spectral::{Grid3, MultiplierTable};
use crate::sphere::{HarmonicExpansion, SphereRule};

/// Tolerance on `|∫_{S²} Ω dσ|`.
pub const CANCELLATION_TOL: f64 = 1e-10;
/// Successive-order agreement required of the direct quadrature.
pub const QUADRATURE_TOL: f64 = 1e-8;
/// Agreement required between successive large-`R` extrapolants.
pub const EXTRAPOLATION_TOL: f64 = 1e-5;
/// Values of `R|k|` used by the large-`R` extrapolation.
pub const EXTRAPOLATION_POINTS: [f64; 3] = [1.0e3, 4.0e3, 1.6e4];

/// Degree of the spherical rule used for built-in profiles.
const BASE_SPHERE_DEGREE: usize = 23;
const BASE_RADIAL_ORDER: usize = 64;
const MAX_DOUBLINGS: usize = 3;

/// Angular profile sampled on the nodes of a [`SphereRule`].
#[derive(Clone, Debug)]
pub struct AngularTable<T> {
    rule: SphereRule<T>,
    values: Vec<T>,
}

impl<T: Real> AngularTable<T> {
    /// Samples `f` on the product rule of the given order.
    pub fn from_fn(order: usize, f: impl Fn([T; 3]) -> T) -> Self {
        let rule = SphereRule::new(order);
        let values = rule.nodes.iter().map(|w| f(*w)).collect();
        Self { rule, values }
    }

    /// Matches `(direction, value)` samples to the nodes of the product rule with
    /// `2p²` nodes. Every node must be present exactly once.
    pub fn from_samples(samples: &[([T; 3], T)]) -> Result<Self> {
        let count = samples.len();
        let order = ((count / 2) as f64).sqrt().round() as usize;
        if order == 0 || 2 * order * order != count {
            return Err(Error::validation(format!(
                "angular table has {count} samples; expected 2p² for a product rule of order p"
            )));
        }
        let rule = SphereRule::new(order);
        let mut values = vec![None; rule.len()];
        for (dir, v) in samples {
            let norm = Float::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
            if !(norm > T::zero()) {
                return Err(Error::validation("angular table contains a zero direction"));
            }
            let d = [dir[0] / norm, dir[1] / norm, dir[2] / norm];
            let hit = rule.nodes.iter().position(|w| {
                let e = (w[0] - d[0]) * (w[0] - d[0])
                    + (w[1] - d[1]) * (w[1] - d[1])
                    + (w[2] - d[2]) * (w[2] - d[2]);
                e < T::lit(1e-14)
            });
            match hit {
                Some(i) if values[i].is_none() => values[i] = Some(*v),
                Some(_) => return Err(Error::validation("angular table repeats a node")),
                None => {
                    return Err(Error::validation(format!(
                    "angular table direction {:?} is not a node of the order-{order} product rule",
                    d
                )))
                }
            }
        }
        let values = values.into_iter().map(|v| v.unwrap()).collect();
        Ok(Self { rule, values })
    }

    /// Parses whitespace-separated `x y z value` rows; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let nums: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            match nums {
                Ok(v) if v.len() == 4 => {
                    samples.push(([T::lit(v[0]), T::lit(v[1]), T::lit(v[2])], T::lit(v[3])))
                }
                _ => {
                    return Err(Error::Format(format!(
                        "angular table line {}: expected `x y z value`",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_samples(&samples)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# x y z omega  (product rule order {})\n",
            self.rule.order()
        );
        for (w, v) in self.rule.nodes.iter().zip(&self.values) {
            s.push_str(&format!(
                "{:.17e} {:.17e} {:.17e} {:.17e}\n",
                w[0].to_f64_lossy(),
                w[1].to_f64_lossy(),
                w[2].to_f64_lossy(),
                v.to_f64_lossy()
            ));
        }
        s
    }

    pub fn rule(&self) -> &SphereRule<T> {
        &self.rule
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Angular function `Ω` on the unit sphere.
#[derive(Clone, Debug)]
pub enum Omega<T> {
    /// `Ω(ω) = 1 − 3 (n·ω)²` with unit dipole axis `n`.
    Dipolar {
        axis: [T; 3],
    },
    Table(AngularTable<T>),
}

impl<T: Real> Omega<T> {
    pub fn dipolar(axis: [T; 3]) -> Result<Self> {
        let norm = Float::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
        if !(norm > T::zero()) || !Float::is_finite(norm) {
            return Err(Error::validation(
                "dipole axis must be a non-zero finite vector",
            ));
        }
        Ok(Omega::Dipolar {
            axis: [axis[0] / norm, axis[1] / norm, axis[2] / norm],
        })
    }

    fn quadrature_rule(&self) -> SphereRule<T> {
        match self {
            Omega::Dipolar { .. } => SphereRule::with_degree(BASE_SPHERE_DEGREE),
            Omega::Table(t) => t.rule.clone(),
        }
    }

    fn node_values(&self, rule: &SphereRule<T>) -> Vec<T> {
        match self {
            Omega::Dipolar { .. } => rule.nodes.iter().map(|w| self.eval_closed(*w)).collect(),
            Omega::Table(t) => t.values.clone(),
        }
    }

    fn eval_closed(&self, w: [T; 3]) -> T {
        match self {
            Omega::Dipolar { axis } => {
                let c = axis[0] * w[0] + axis[1] * w[1] + axis[2] * w[2];
                T::one() - T::lit(3.0) * c * c
            }
            Omega::Table(_) => unreachable!("tables are evaluated through their expansion"),
        }
    }
}

/// Residuals of the structural conditions on `Ω`, evaluated on its quadrature nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularChecks {
    /// `max |Ω(−ω) − Ω(ω)|` over nodes.
    pub parity_residual: f64,
    /// `|∫_{S²} Ω dσ|`.
    pub cancellation_residual: f64,
    pub max_abs: f64,
}

impl AngularChecks {
    pub fn compute<T: Real>(omega: &Omega<T>) -> Self {
        let rule = omega.quadrature_rule();
        let vals = omega.node_values(&rule);
        let mut parity = 0.0f64;
        let mut max_abs = 0.0f64;
        for i in 0..rule.len() {
            let j = rule.antipode(i);
            parity = parity.max((vals[i] - vals[j]).to_f64_lossy().abs());
            max_abs = max_abs.max(vals[i].to_f64_lossy().abs());
        }
        let integral: T = vals.iter().zip(&rule.weights).map(|(v, w)| *v * *w).sum();
        Self {
            parity_residual: parity,
            cancellation_residual: integral.to_f64_lossy().abs(),
            max_abs,
        }
    }

    pub fn passes(&self) -> bool {
        self.parity_residual <= 1e-12 * self.max_abs.max(1.0)
            && self.cancellation_residual <= CANCELLATION_TOL
    }
}

/// Validated kernel description: angular profile plus truncation radius.
#[derive(Clone)]
pub struct KernelSpec<T> {
    omega: Omega<T>,
    radius: T,
    expansion: HarmonicExpansion<T>,
    /// Funk–Hecke eigenvalues `λ_l = −2π ∫_{−1}^{1} P_l(z) ln|z| dz`.
    log_eigenvalues: Vec<T>,
    pub checks: AngularChecks,
}

impl<T: fmt::Debug> fmt::Debug for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("omega", &self.omega)
            .field("radius", &self.radius)
            .field("checks", &self.checks)
            .finish()
    }
}

impl<T: Real> KernelSpec<T> {
    pub fn new(omega: Omega<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !Float::is_finite(radius) {
            return Err(Error::validation(format!(
                "truncation radius R must be positive and finite, got {radius}"
            )));
        }
        let checks = AngularChecks::compute(&omega);
        if checks.parity_residual > 1e-12 * checks.max_abs.max(1.0) {
            return Err(Error::validation(format!(
                "Ω is not even: parity residual {:.3e}",
                checks.parity_residual
            )));
        }
        if checks.cancellation_residual > CANCELLATION_TOL {
            return Err(Error::validation(format!(
                "Ω violates the cancellation property: |∫Ω dσ| = {:.6e} (tolerance {:.0e})",
                checks.cancellation_residual, CANCELLATION_TOL
            )));
        }
        let expansion = match &omega {
            Omega::Dipolar { .. } => {
                let rule = SphereRule::new(4);
                let vals = omega.node_values(&rule);
                HarmonicExpansion::project(&rule, &vals)
            }
            Omega::Table(t) => HarmonicExpansion::project(&t.rule, &t.values),
        };
        let log_eigenvalues = (0..=expansion.lmax).map(log_eigenvalue).collect();
        Ok(Self {
            omega,
            radius,
            expansion,
            log_eigenvalues,
            checks,
        })
    }

    pub fn dipolar(axis: [T; 3], radius: T) -> Result<Self> {
        Self::new(Omega::dipolar(axis)?, radius)
    }

    pub fn omega(&self) -> &Omega<T> {
        &self.omega
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn with_radius(&self, radius: T) -> Result<Self> {
        Self::new(self.omega.clone(), radius)
    }

    /// `Ω(ω)` at an arbitrary unit vector.
    pub fn omega_at(&self, w: [T; 3]) -> T {
        match &self.omega {
            Omega::Dipolar { .. } => self.omega.eval_closed(w),
            Omega::Table(_) => self.expansion.eval(w),
        }
    }

    pub fn is_dipolar(&self) -> bool {
        matches!(self.omega, Omega::Dipolar { .. })
    }

    // ---------------------------------------------------------------- direct route

    /// Fourier transform of `𝟙_{|x|≤R} K` at `k` by direct quadrature.
    pub fn inner_truncated_transform(&self, k: [T; 3], radius: T) -> Result<T> {
        if !(radius > T::zero()) {
            return Err(Error::validation("truncation radius must be positive"));
        }
        let kn = norm3(k);
        if kn == T::zero() {
            return Ok(T::zero());
        }
        let khat = [k[0] / kn, k[1] / kn, k[2] / kn];
        let s = radius * kn;
        let mut q = BASE_RADIAL_ORDER;
        let mut azimuth = 24usize.max(2 * self.expansion.lmax + 2);
        let mut prev = self.direct_inner(khat, s, q, azimuth);
        let mut last_change = f64::INFINITY;
        for _ in 0..MAX_DOUBLINGS {
            q *= 2;
            azimuth *= 2;
            let next = self.direct_inner(khat, s, q, azimuth);
            last_change = (next - prev).to_f64_lossy().abs();
            if last_change < QUADRATURE_TOL {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::NumericalAccuracy {
            what: format!("inner truncated transform at R|k| = {}", s),
            observed: last_change,
            tolerance: QUADRATURE_TOL,
        })
    }

    /// `2 ∫₀¹ g(s z) Φ(z) dz` with `Φ(z) = ∫₀^{2π} Ω dφ` in the frame whose pole is `k̂`.
    fn direct_inner(&self, khat: [T; 3], s: T, q: usize, azimuth: usize) -> T {
        let (e1, e2) = orthonormal_complement(khat);
        let dphi = T::TAU() / T::from_usize_lossy(azimuth);
        let trig: Vec<(T, T)> = (0..azimuth)
            .map(|j| Float::sin_cos(dphi * T::from_usize_lossy(j)))
            .collect();
        let azimuthal = |z: T| -> T {
            let rho = Float::sqrt(Float::max(T::one() - z * z, T::zero()));
            let mut acc = T::zero();
            for &(sp, cp) in &trig {
                let w = [
                    rho * (cp * e1[0] + sp * e2[0]) + z * khat[0],
                    rho * (cp * e1[1] + sp * e2[1]) + z * khat[1],
                    rho * (cp * e1[2] + sp * e2[2]) + z * khat[2],
                ];
                acc = acc + self.omega_at(w);
            }
            acc * dphi
        };
        // Φ is a polynomial in z of modest degree: sample once on Chebyshev
        // points and interpolate, so long oscillatory panels stay cheap.
        let interp = Chebyshev::sample(q.max(48), azimuthal);
        let gl = GaussLegendre::<T>::new(q);
        let panels = Float::max(Float::ceil(s / T::TAU()), T::one())
            .to_usize()
            .unwrap_or(1)
            .max(2);
        let width = T::one() / T::from_usize_lossy(panels);
        let half = width / T::lit(2.0);
        let mut zs = Vec::with_capacity(panels * q);
        let mut ws = Vec::with_capacity(panels * q);
        for p in 0..panels {
            let mid = width * T::from_usize_lossy(p) + half;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                zs.push(mid + half * *x);
                ws.push(*w * half);
            }
        }
        let targets: Vec<T> = zs.iter().map(|z| s * *z).collect();
        let g = cosine_integral_profile(&targets, &gl);
        let mut acc = T::zero();
        for i in 0..zs.len() {
            acc = acc + ws[i] * g[i] * interp.eval(zs[i]);
        }
        T::lit(2.0) * acc
    }

    /// Full multiplier `K̂(k)` as the large-`R` limit of the direct quadrature,
    /// Richardson-extrapolated in `1/R`.
    pub fn full_multiplier_at(&self, k: [T; 3]) -> Result<T> {
        let kn = norm3(k);
        if kn == T::zero() {
            return Ok(T::zero());
        }
        let vals: Vec<T> = EXTRAPOLATION_POINTS
            .iter()
            .map(|x| self.inner_truncated_transform(k, T::lit(*x) / kn))
            .collect::<Result<_>>()?;
        // error model ~ (R|k|)^{-2}; successive points differ by a factor 4
        let rich = |a: T, b: T| (T::lit(16.0) * b - a) / T::lit(15.0);
        let e1 = rich(vals[0], vals[1]);
        let e2 = rich(vals[1], vals[2]);
        let gap = (e2 - e1).to_f64_lossy().abs();
        if gap > EXTRAPOLATION_TOL {
            return Err(Error::NumericalAccuracy {
                what: "large-R extrapolation of the kernel multiplier".into(),
                observed: gap,
                tolerance: EXTRAPOLATION_TOL,
            });
        }
        Ok(e2)
    }

    // ------------------------------------------------------------------ fast path

    /// `K̂(k)` from the closed form (dipolar) or the Funk–Hecke eigenvalues.
    pub fn full_multiplier_fast(&self, k: [T; 3]) -> T {
        let kn = norm3(k);
        if kn == T::zero() {
            return T::zero();
        }
        match &self.omega {
            Omega::Dipolar { axis } => {
                let c = (axis[0] * k[0] + axis[1] * k[1] + axis[2] * k[2]) / kn;
                T::lit(4.0) * T::PI() / T::lit(3.0) * (T::lit(3.0) * c * c - T::one())
            }
            Omega::Table(_) => self.full_multiplier_harmonic(k),
        }
    }

    /// Funk–Hecke form of the full multiplier, valid for any profile.
    pub fn full_multiplier_harmonic(&self, k: [T; 3]) -> T {
        let kn = norm3(k);
        if kn == T::zero() {
            return T::zero();
        }
        let comps = self
            .expansion
            .degree_components([k[0] / kn, k[1] / kn, k[2] / kn]);
        // l = 0 carries the (vanishing) mean of Ω and a divergent constant; drop it.
        comps
            .iter()
            .zip(&self.log_eigenvalues)
            .skip(1)
            .map(|(c, l)| *c * *l)
            .sum()
    }

    /// Radial Funk–Hecke profiles `μ_l(s) = 2π ∫_{−1}^{1} P_l(z) g(s z) dz` for `l ≤ lmax`.
    pub fn radial_profiles(&self, s: T) -> Vec<T> {
        radial_profiles(s, self.expansion.lmax, BASE_RADIAL_ORDER)
    }

    /// `FT(𝟙_{|x|≤R} K)(k)` through the harmonic expansion.
    pub fn inner_truncated_fast(&self, k: [T; 3], radius: T) -> T {
        let kn = norm3(k);
        if kn == T::zero() {
            return T::zero();
        }
        let mu = self.radial_profiles(radius * kn);
        let comps = self
            .expansion
            .degree_components([k[0] / kn, k[1] / kn, k[2] / kn]);
        comps.iter().zip(&mu).map(|(c, m)| *c * *m).sum()
    }

    /// `FT(𝟙_{|x|>R} K)(k) = K̂(k) − FT(𝟙_{|x|≤R} K)(k)`.
    pub fn exterior_at(&self, k: [T; 3]) -> T {
        self.full_multiplier_fast(k) - self.inner_truncated_fast(k, self.radius)
    }

    // -------------------------------------------------------------- tabulations

    /// `K̂` on the grid; the fast path is checked against the direct quadrature
    /// at a few wavevectors before use.
    pub fn full_multiplier(&self, grid: Grid3<T>) -> Result<MultiplierTable<T>> {
        self.validate_fast_path()?;
        Ok(MultiplierTable::from_fn_par(grid, |k| {
            self.full_multiplier_fast(k)
        }))
    }

    pub fn validate_fast_path(&self) -> Result<()> {
        let samples = [
            [T::one(), T::zero(), T::zero()],
            [T::zero(), T::zero(), T::one()],
            [T::lit(0.3), T::lit(-0.5), T::lit(0.8)],
        ];
        for k in samples {
            let quad = self.full_multiplier_at(k)?;
            let fast = self.full_multiplier_fast(k);
            let gap = (quad - fast).to_f64_lossy().abs();
            if gap > EXTRAPOLATION_TOL {
                return Err(Error::NumericalAccuracy {
                    what: "closed-form multiplier disagrees with quadrature".into(),
                    observed: gap,
                    tolerance: EXTRAPOLATION_TOL,
                });
            }
        }
        Ok(())
    }

    /// `FT(𝟙_{|x|>R} K)` on the grid.
    pub fn exterior_multiplier(&self, grid: Grid3<T>) -> MultiplierTable<T> {
        self.exterior_multiplier_scaled(grid, T::one())
    }

    /// `k ↦ FT(𝟙_{|x|>R} K)(k · scale)` on the grid, i.e. the exterior multiplier of
    /// the rescaled kernel. Radial profiles are computed once per distinct `|k|`.
    pub fn exterior_multiplier_scaled(&self, grid: Grid3<T>, scale: T) -> MultiplierTable<T> {
        let mut shells: BTreeMap<i64, usize> = BTreeMap::new();
        let keys: Vec<i64> = (0..grid.len())
            .map(|i| {
                let [a, b, c] = grid.unravel(i);
                let (ma, mb, mc) = (
                    grid.mode_number(a),
                    grid.mode_number(b),
                    grid.mode_number(c),
                );
                ma * ma + mb * mb + mc * mc
            })
            .collect();
        for k in &keys {
            let next = shells.len();
            shells.entry(*k).or_insert(next);
        }
        let shell_keys: Vec<i64> = shells.keys().copied().collect();
        let lmax = self.expansion.lmax;
        let profiles: BTreeMap<i64, Vec<T>> = shell_keys
            .par_iter()
            .map(|&key| {
                let kn = grid.dk() * Float::sqrt(T::from_i64(key).unwrap());
                (
                    key,
                    radial_profiles(self.radius * kn * scale, lmax, BASE_RADIAL_ORDER),
                )
            })
            .collect();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                if keys[i] == 0 {
                    return T::zero();
                }
                let k = grid.wavevector(i);
                let kn = norm3(k);
                let comps = self
                    .expansion
                    .degree_components([k[0] / kn, k[1] / kn, k[2] / kn]);
                let inner: T = comps
                    .iter()
                    .zip(&profiles[&keys[i]])
                    .map(|(c, m)| *c * *m)
                    .sum();
                self.full_multiplier_fast(k) - inner
            })
            .collect();
        MultiplierTable { grid, values }
    }
}

/// `λ_l = −2π ∫_{−1}^{1} P_l(z) ln|z| dz`, from the monomial expansion of `P_l`
/// and `∫₀¹ zʲ ln z dz = −1/(j+1)²`.
pub fn log_eigenvalue<T: Real>(l: usize) -> T {
    if l % 2 == 1 {
        return T::zero();
    }
    let coeffs = legendre_coefficients(l);
    let mut acc = 0.0f64;
    for (j, a) in coeffs.iter().enumerate() {
        acc += a / ((j + 1) as f64).powi(2);
    }
    // −2π · 2 · (−acc)
    T::lit(4.0 * std::f64::consts::PI * acc)
}

fn legendre_coefficients(l: usize) -> Vec<f64> {
    let mut p0 = vec![1.0];
    if l == 0 {
        return p0;
    }
    let mut p1 = vec![0.0, 1.0];
    for k in 2..=l {
        let kf = k as f64;
        let mut p2 = vec![0.0; k + 1];
        for (j, c) in p1.iter().enumerate() {
            p2[j + 1] += (2.0 * kf - 1.0) / kf * c;
        }
        for (j, c) in p0.iter().enumerate() {
            p2[j] -= (kf - 1.0) / kf * c;
        }
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `μ_l(s) = 2π ∫_{−1}^{1} P_l(z) g(s z) dz` for `l = 0..=lmax` (zero for odd `l`).
pub fn radial_profiles<T: Real>(s: T, lmax: usize, q: usize) -> Vec<T> {
    let s = Float::abs(s);
    if s == T::zero() {
        return vec![T::zero(); lmax + 1];
    }
    let gl = GaussLegendre::<T>::new(q);
    let panels = Float::max(Float::ceil(s / T::TAU()), T::one())
        .to_usize()
        .unwrap_or(1);
    let width = T::one() / T::from_usize_lossy(panels);
    let half = width / T::lit(2.0);
    let mut zs = Vec::with_capacity(panels * q);
    let mut ws = Vec::with_capacity(panels * q);
    for p in 0..panels {
        let mid = width * T::from_usize_lossy(p) + half;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            zs.push(mid + half * *x);
            ws.push(*w * half);
        }
    }
    let targets: Vec<T> = zs.iter().map(|z| s * *z).collect();
    let g = cosine_integral_profile(&targets, &gl);
    let four_pi = T::lit(4.0) * T::PI();
    (0..=lmax)
        .map(|l| {
            if l % 2 == 1 {
                return T::zero();
            }
            let mut acc = T::zero();
            for i in 0..zs.len() {
                acc = acc + ws[i] * g[i] * legendre(l, zs[i]);
            }
            four_pi * acc
        })
        .collect()
}

#[inline]
pub(crate) fn norm3<T: Real>(v: [T; 3]) -> T {
    Float::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

fn orthonormal_complement<T: Real>(n: [T; 3]) -> ([T; 3], [T; 3]) {
    // pick the coordinate axis least aligned with n
    let a = if Float::abs(n[0]) < T::lit(0.9) {
        [T::one(), T::zero(), T::zero()]
    } else {
        [T::zero(), T::one(), T::zero()]
    };
    let d = a[0] * n[0] + a[1] * n[1] + a[2] * n[2];
    let mut e1 = [a[0] - d * n[0], a[1] - d * n[1], a[2] - d * n[2]];
    let l = norm3(e1);
    e1 = [e1[0] / l, e1[1] / l, e1[2] / l];
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    (e1, e2)
}

/// Polynomial interpolant on `[0, 1]` through Chebyshev points of the second kind.
struct Chebyshev<T> {
    nodes: Vec<T>,
    values: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Chebyshev<T> {
    fn sample(count: usize, f: impl Fn(T) -> T) -> Self {
        let n = count - 1;
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for j in 0..=n {
            let x = Float::cos(T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(n));
            nodes.push((x + T::one()) / T::lit(2.0));
            let mut w = if j % 2 == 0 { T::one() } else { -T::one() };
            if j == 0 || j == n {
                w = w / T::lit(2.0);
            }
            weights.push(w);
        }
        let values = nodes.iter().map(|x| f(*x)).collect();
        Self {
            nodes,
            values,
            weights,
        }
    }

    fn eval(&self, x: T) -> T {
        let mut num = T::zero();
        let mut den = T::zero();
        for ((xj, fj), wj) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let d = x - *xj;
            if d == T::zero() {
                return *fj;
            }
            let t = *wj / d;
            num = num + t * *fj;
            den = den + t;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dip() -> KernelSpec<f64> {
        KernelSpec::dipolar([0.0, 0.0, 1.0], 0.25).unwrap()
    }

    /// Independent oracle for the dipolar profile:
    /// FT(𝟙_{|x|≤R} K_dip)(k) = (4π/3)(3cos²θ − 1)(1 − 3 j₁(kR)/(kR)).
    fn dipolar_inner_oracle(cos2: f64, x: f64) -> f64 {
        let j1_over_x = if x < 1e-3 {
            1.0 / 3.0 - x * x / 30.0
        } else {
            (x.sin() / (x * x) - x.cos() / x) / x
        };
        4.0 * PI / 3.0 * (3.0 * cos2 - 1.0) * (1.0 - 3.0 * j1_over_x)
    }

    #[test]
    fn dipolar_checks_pass() {
        let k = dip();
        assert!(k.checks.cancellation_residual < 1e-13);
        assert!(k.checks.parity_residual < 1e-14);
    }

    #[test]
    fn constant_profile_is_rejected_with_residual() {
        let t = AngularTable::from_fn(6, |_| 1.0f64);
        let err = KernelSpec::new(Omega::Table(t), 1.0).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Validation(_)));
        assert!(msg.contains("1.256637e1"), "{msg}");
    }

    #[test]
    fn odd_profile_is_rejected() {
        let t = AngularTable::from_fn(6, |w: [f64; 3]| w[2]);
        assert!(KernelSpec::new(Omega::Table(t), 1.0).is_err());
    }

    #[test]
    fn bad_radius_rejected() {
        assert!(KernelSpec::dipolar([0.0, 0.0, 1.0], -1.0f64).is_err());
        assert!(KernelSpec::dipolar([0.0, 0.0, 0.0], 1.0f64).is_err());
    }

    #[test]
    fn k_zero_gives_zero() {
        let k = dip();
        for r in [0.1, 1.0, 7.0] {
            assert_eq!(k.inner_truncated_transform([0.0; 3], r).unwrap(), 0.0);
        }
        assert_eq!(k.full_multiplier_fast([0.0; 3]), 0.0);
        assert_eq!(k.exterior_at([0.0; 3]), 0.0);
    }

    #[test]
    fn direct_quadrature_matches_bessel_oracle() {
        let k = dip();
        for &(dir, x) in &[
            ([0.0, 0.0, 1.0], 0.05),
            ([1.0, 0.0, 0.0], 1.3),
            ([0.3, 0.4, 0.866], 7.0),
            ([0.6, 0.0, 0.8], 40.0),
        ] {
            let n = norm3(dir);
            let kv = [dir[0] / n * 2.0, dir[1] / n * 2.0, dir[2] / n * 2.0];
            let cos2 = (dir[2] / n).powi(2);
            let got = k.inner_truncated_transform(kv, x / 2.0).unwrap();
            let want = dipolar_inner_oracle(cos2, x);
            assert!((got - want).abs() < 1e-9, "x={x}: {got} vs {want}");
            let fast = k.inner_truncated_fast(kv, x / 2.0);
            assert!((fast - want).abs() < 1e-9, "fast x={x}: {fast} vs {want}");
        }
    }

    #[test]
    fn riemann_shell_sum_cross_check() {
        // Brute-force midpoint sums in (r, θ, φ) of ∫_{ε<|x|≤R} K(x) cos(k·x) dx,
        // the ε-ball contributing O(ε²k²). Checks the direct quadrature at R|k| = 20.
        let k = dip();
        let kv = [0.0, 0.0, 4.0];
        let radius = 5.0;
        let (nr, nt, np) = (4000usize, 400usize, 8usize);
        let eps = 1e-3;
        let dr = (radius - eps) / nr as f64;
        let dt = PI / nt as f64;
        let dp = 2.0 * PI / np as f64;
        let mut total = 0.0;
        for it in 0..nt {
            let th = (it as f64 + 0.5) * dt;
            let (st, ct) = th.sin_cos();
            let omega = 1.0 - 3.0 * ct * ct;
            let mut radial = 0.0;
            for ir in 0..nr {
                let r = eps + (ir as f64 + 0.5) * dr;
                radial += (r * kv[2] * ct).cos() / r * dr;
            }
            total += omega * radial * st * dt * dp * np as f64;
        }
        let quad = k.inner_truncated_transform(kv, radius).unwrap();
        assert!((total - quad).abs() < 2e-3, "{total} vs {quad}");
    }

    #[test]
    fn closed_form_limits() {
        let k = dip();
        let along = k.inner_truncated_transform([0.0, 0.0, 2.0], 500.0).unwrap();
        assert!((along - 8.0 * PI / 3.0).abs() < 1e-3);
        let perp = k.full_multiplier_at([1.0, 0.0, 0.0]).unwrap();
        assert!((perp + 4.0 * PI / 3.0).abs() < 1e-5, "{perp}");
        let c = (1.0f64 / 3.0).sqrt();
        let s = (2.0f64 / 3.0).sqrt();
        let magic = k.full_multiplier_at([s, 0.0, c]).unwrap();
        assert!(magic.abs() < 1e-5, "{magic}");
    }

    #[test]
    fn funk_hecke_eigenvalues() {
        assert!((log_eigenvalue::<f64>(0) - 4.0 * PI).abs() < 1e-12);
        assert!((log_eigenvalue::<f64>(2) + 4.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(log_eigenvalue::<f64>(3), 0.0);
        // independent: dyadic Gauss-Legendre panels towards the log singularity
        let gl = GaussLegendre::<f64>::new(32);
        for l in [4usize, 6, 10] {
            let mut acc = 0.0;
            let mut hi = 1.0;
            for _ in 0..60 {
                let lo = hi / 2.0;
                acc += gl.integrate(lo, hi, |z| legendre(l, z) * z.ln());
                hi = lo;
            }
            let want = -4.0 * PI * acc;
            assert!((log_eigenvalue::<f64>(l) - want).abs() < 1e-10, "l={l}");
        }
    }

    #[test]
    fn table_profile_agrees_with_dipolar() {
        let d = dip();
        let t = AngularTable::from_fn(8, |w: [f64; 3]| 1.0 - 3.0 * w[2] * w[2]);
        let tab = KernelSpec::new(Omega::Table(t), 0.25).unwrap();
        for kv in [[0.3, -1.2, 0.4], [0.0, 0.0, 2.0], [5.0, 1.0, 0.0]] {
            assert!((tab.full_multiplier_fast(kv) - d.full_multiplier_fast(kv)).abs() < 1e-12);
            assert!((tab.exterior_at(kv) - d.exterior_at(kv)).abs() < 1e-10);
        }
        let kv = [0.2, 0.1, 0.7];
        let a = tab.inner_truncated_transform(kv, 3.0).unwrap();
        let b = d.inner_truncated_transform(kv, 3.0).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn zero_table_gives_zero_multiplier() {
        let t = AngularTable::from_fn(4, |_| 0.0f64);
        let spec = KernelSpec::new(Omega::Table(t), 1.0).unwrap();
        let g = Grid3::new(8, 4.0).unwrap();
        let m = spec.full_multiplier(g).unwrap();
        assert!(m.values.iter().all(|v| *v == 0.0));
        assert!(spec.exterior_multiplier(g).values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn table_text_round_trip() {
        let t = AngularTable::from_fn(3, |w: [f64; 3]| w[0] * w[0] - w[1] * w[1]);
        let back = AngularTable::<f64>::parse(&t.to_text()).unwrap();
        assert_eq!(back.values().len(), t.values().len());
        for (a, b) in back.values().iter().zip(t.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(AngularTable::<f64>::parse("1 0 0 1\n0 1 0 1\n0 0 1\n").is_err());
    }

    #[test]
    fn grid_properties() {
        let spec = dip();
        let g = Grid3::new(16, 8.0).unwrap();
        let full = spec.full_multiplier(g).unwrap();
        assert_eq!(full.at_zero(), 0.0);
        assert!(full.max_abs() <= 8.0 * PI / 3.0 + 1e-6);
        for i in 0..g.len() {
            assert!((full.values[i] - full.values[g.negated(i)]).abs() < 1e-12);
        }
        let ext = spec.exterior_multiplier(g);
        assert_eq!(ext.at_zero(), 0.0);
        for i in 0..g.len() {
            assert!((ext.values[i] - ext.values[g.negated(i)]).abs() < 1e-12);
        }
    }

    #[test]
    fn exterior_limits() {
        let spec = dip();
        let kv = [0.0, 0.6, 0.8];
        let full = spec.full_multiplier_fast(kv);
        // R → 0: the exterior kernel recovers the full multiplier within C R² k²
        for r in [1e-1, 1e-2, 1e-3] {
            let small = spec.with_radius(r).unwrap();
            let gap = (small.exterior_at(kv) - full).abs();
            assert!(gap <= 4.0 * r * r, "R={r}: {gap}");
        }
        // |k|R = 100: oscillatory decay of the exterior part
        let far = [0.0, 0.0, 100.0 / 0.25];
        assert!(spec.exterior_at(far).abs() < 0.2);
        let direct =
            spec.full_multiplier_fast(far) - spec.inner_truncated_transform(far, 0.25).unwrap();
        assert!((direct - spec.exterior_at(far)).abs() < 1e-8);
    }
}
