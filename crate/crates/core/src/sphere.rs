// SPDX-License-Identifier: Apache-2.0

//! Quadrature on the unit sphere and real spherical harmonics.

use num_traits::Float;

use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// Product rule: Gauss–Legendre in `z = cos θ` (`order` nodes) times the
/// trapezoidal rule in `φ` (`2·order` nodes). Integrates spherical polynomials
/// of degree `≤ 2·order − 1` exactly and is closed under `ω ↦ −ω`.
#[derive(Clone, Debug)]
pub struct SphereRule<T> {
    order: usize,
    pub nodes: Vec<[T; 3]>,
    pub weights: Vec<T>,
    /// `(z, φ)` of every node, same order as `nodes`.
    pub angles: Vec<(T, T)>,
}

impl<T: Real> SphereRule<T> {
    pub fn new(order: usize) -> Self {
        let gl = GaussLegendre::<T>::new(order);
        let nphi = 2 * order;
        let dphi = T::TAU() / T::from_usize_lossy(nphi);
        let mut nodes = Vec::with_capacity(order * nphi);
        let mut weights = Vec::with_capacity(order * nphi);
        let mut angles = Vec::with_capacity(order * nphi);
        for (z, wz) in gl.nodes.iter().zip(&gl.weights) {
            let s = Float::sqrt(Float::max(T::one() - *z * *z, T::zero()));
            for j in 0..nphi {
                let phi = dphi * T::from_usize_lossy(j);
                let (sp, cp) = Float::sin_cos(phi);
                nodes.push([s * cp, s * sp, *z]);
                weights.push(*wz * dphi);
                angles.push((*z, phi));
            }
        }
        Self {
            order,
            nodes,
            weights,
            angles,
        }
    }

    /// Smallest rule integrating degree `degree` exactly.
    pub fn with_degree(degree: usize) -> Self {
        Self::new(degree / 2 + 1)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        2 * self.order - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the node antipodal to node `i`.
    pub fn antipode(&self, i: usize) -> usize {
        let nphi = 2 * self.order;
        let (iz, j) = (i / nphi, i % nphi);
        (self.order - 1 - iz) * nphi + (j + self.order) % nphi
    }

    pub fn integrate(&self, f: impl Fn([T; 3]) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| *w * f(*x))
            .sum()
    }
}

/// All orthonormal real spherical harmonics `Y_lm`, `0 ≤ l ≤ lmax`, at the
/// direction with `cos θ = z` and azimuth `φ`, stored at `l² + l + m`.
pub fn real_harmonics<T: Real>(lmax: usize, z: T, phi: T) -> Vec<T> {
    let size = (lmax + 1) * (lmax + 1);
    let mut out = vec![T::zero(); size];
    let s = Float::sqrt(Float::max(T::one() - z * z, T::zero()));
    let sqrt2 = T::SQRT_2();
    // Fully normalized associated Legendre functions, column by column in m.
    let mut pmm = T::one() / Float::sqrt(T::lit(4.0) * T::PI());
    for m in 0..=lmax {
        if m > 0 {
            let mf = T::from_usize_lossy(m);
            pmm = pmm * Float::sqrt((T::lit(2.0) * mf + T::one()) / (T::lit(2.0) * mf)) * s;
        }
        let (sin_m, cos_m) = Float::sin_cos(T::from_usize_lossy(m) * phi);
        let mut store = |l: usize, p: T| {
            let base = l * l + l;
            if m == 0 {
                out[base] = p;
            } else {
                out[base + m] = sqrt2 * p * cos_m;
                out[base - m] = sqrt2 * p * sin_m;
            }
        };
        store(m, pmm);
        if m == lmax {
            break;
        }
        let mf = T::from_usize_lossy(m);
        let mut p_prev = pmm;
        let mut p_cur = Float::sqrt(T::lit(2.0) * mf + T::lit(3.0)) * z * pmm;
        store(m + 1, p_cur);
        for l in (m + 2)..=lmax {
            let lf = T::from_usize_lossy(l);
            let a = Float::sqrt((T::lit(4.0) * lf * lf - T::one()) / (lf * lf - mf * mf));
            let lm1 = lf - T::one();
            let b = Float::sqrt((lm1 * lm1 - mf * mf) / (T::lit(4.0) * lm1 * lm1 - T::one()));
            let p_next = a * (z * p_cur - b * p_prev);
            store(l, p_next);
            p_prev = p_cur;
            p_cur = p_next;
        }
    }
    out
}

/// Cartesian unit vector to `(cos θ, φ)`.
#[inline]
pub fn to_angles<T: Real>(w: [T; 3]) -> (T, T) {
    let z = Float::max(Float::min(w[2], T::one()), -T::one());
    (z, Float::atan2(w[1], w[0]))
}

/// Truncated real spherical-harmonic expansion of a function on the sphere.
#[derive(Clone, Debug)]
pub struct HarmonicExpansion<T> {
    pub lmax: usize,
    /// Coefficients at `l² + l + m`.
    pub coeffs: Vec<T>,
}

impl<T: Real> HarmonicExpansion<T> {
    /// Projects sampled values onto degrees `≤ order − 1` of `rule`, exact for
    /// band-limited data.
    pub fn project(rule: &SphereRule<T>, values: &[T]) -> Self {
        let lmax = rule.order() - 1;
        let mut coeffs = vec![T::zero(); (lmax + 1) * (lmax + 1)];
        for ((&(z, phi), w), v) in rule.angles.iter().zip(&rule.weights).zip(values) {
            let y = real_harmonics(lmax, z, phi);
            for (c, yv) in coeffs.iter_mut().zip(&y) {
                *c = *c + *w * *v * *yv;
            }
        }
        Self { lmax, coeffs }
    }

    pub fn eval(&self, w: [T; 3]) -> T {
        let (z, phi) = to_angles(w);
        real_harmonics(self.lmax, z, phi)
            .iter()
            .zip(&self.coeffs)
            .map(|(y, c)| *y * *c)
            .sum()
    }

    /// `Σ_m c_lm Y_lm(ŵ)` for each degree `l`.
    pub fn degree_components(&self, w: [T; 3]) -> Vec<T> {
        let (z, phi) = to_angles(w);
        let y = real_harmonics(self.lmax, z, phi);
        (0..=self.lmax)
            .map(|l| {
                let base = l * l + l;
                (-(l as i64)..=(l as i64))
                    .map(|m| {
                        self.coeffs[(base as i64 + m) as usize] * y[(base as i64 + m) as usize]
                    })
                    .sum()
            })
            .collect()
    }

    /// Largest `|c_lm|` of odd degree.
    pub fn odd_weight(&self) -> T {
        (0..=self.lmax)
            .filter(|l| l % 2 == 1)
            .flat_map(|l| {
                let base = l * l + l;
                (base - l..=base + l).map(|i| Float::abs(self.coeffs[i]))
            })
            .fold(T::zero(), Float::max)
    }
}
