// SPDX-License-Identifier: Apache-2.0

//! One-dimensional Gauss–Legendre rules and the cosine integral
//! `g(u) = ∫₀ᵘ (cos t − 1)/t dt` evaluated by panelled quadrature.

use num_traits::Float;

use crate::scalar::Real;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_a^b f` with the rule mapped affinely onto `[a, b]`.
    #[inline]
    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + *w * f(mid + half * *x);
        }
        acc * half
    }
}

/// `(P_n(z), P_n'(z))` via the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Legendre polynomial `P_l(z)`.
pub fn legendre<T: Real>(l: usize, z: T) -> T {
    let mut p0 = T::one();
    if l == 0 {
        return p0;
    }
    let mut p1 = z;
    for k in 2..=l {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Integrand `(cos t − 1)/t`, written as `−2 sin²(t/2)/t` to avoid cancellation and
/// replaced by its series `−t/2 + t³/24` near the removable singularity.
#[inline]
pub fn cos_minus_one_over_t<T: Real>(t: T) -> T {
    if Float::abs(t) < T::lit(1e-4) {
        let t3 = t * t * t;
        -t / T::lit(2.0) + t3 / T::lit(24.0)
    } else {
        let s = Float::sin(t / T::lit(2.0));
        -T::lit(2.0) * s * s / t
    }
}

/// `g(u) = ∫₀ᵘ (cos t − 1)/t dt` at every entry of `targets`, which must be sorted
/// increasingly and non-negative. Panels never exceed `2π` in `t`, each integrated
/// with `rule`.
pub fn cosine_integral_profile<T: Real>(targets: &[T], rule: &GaussLegendre<T>) -> Vec<T> {
    let panel = T::TAU();
    let mut out = Vec::with_capacity(targets.len());
    let mut x = T::zero();
    let mut acc = T::zero();
    for &u in targets {
        debug_assert!(u >= x, "targets must be sorted");
        while x + panel < u {
            acc = acc + rule.integrate(x, x + panel, cos_minus_one_over_t);
            x = x + panel;
        }
        if u > x {
            acc = acc + rule.integrate(x, u, cos_minus_one_over_t);
            x = u;
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for order in [1usize, 2, 5, 12, 64, 128] {
            let gl = GaussLegendre::<f64>::new(order);
            let wsum: f64 = gl.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "order {order}");
            let deg = 2 * order - 1;
            for d in [deg.min(20), deg.min(7)] {
                let got = gl.integrate(0.0, 1.0, |x| x.powi(d as i32));
                assert!((got - 1.0 / (d as f64 + 1.0)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn legendre_values() {
        assert!((legendre(2, 0.3f64) - 0.5 * (3.0 * 0.09 - 1.0)).abs() < 1e-15);
        assert!((legendre(3, -0.7f64) - 0.5 * (5.0 * (-0.343) - 3.0 * -0.7)).abs() < 1e-15);
    }

    #[test]
    fn cosine_integral_matches_series_and_asymptote() {
        // g(u) = Ci(u) − γ − ln u; small u: −u²/4 + u⁴/96.
        let gl = GaussLegendre::<f64>::new(32);
        let small = cosine_integral_profile(&[0.0, 0.01, 0.2], &gl);
        assert_eq!(small[0], 0.0);
        assert!((small[1] - (-1e-4 / 4.0 + 1e-8 / 96.0)).abs() < 1e-15);
        let u: f64 = 0.2;
        assert!(
            (small[2]
                - (-u * u / 4.0 + u.powi(4) / 96.0 - u.powi(6) / 4320.0 + u.powi(8) / 322_560.0))
                .abs()
                < 1e-14
        );
        // Large u: Ci(u) ~ sin(u)/u, so g(u) + γ + ln u → sin(u)/u − cos(u)/u².
        let big = cosine_integral_profile(&[500.0], &gl)[0];
        let euler = 0.577_215_664_901_532_9;
        let ci = 500f64.sin() / 500.0 - 500f64.cos() / 250_000.0;
        assert!((big - (ci - euler - 500f64.ln())).abs() < 1e-6);
    }
}
