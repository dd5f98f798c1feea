// SPDX-License-Identifier: Apache-2.0

//! Sweeps over the particle number `N` comparing the scaled equation with the
//! limiting one, and log–log fits of the resulting error table.

use num_traits::Float;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gp::{step_count, Equation, GPState, InitialData, PotentialSpec, Propagator};
use crate::scalar::Real;
use crate::spectral::{Field, FourierPlan, Grid3};

/// Errors at or below this are treated as the floating-point floor.
pub const ERROR_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SweepPlan<T> {
    pub grid: Grid3<T>,
    /// Potential; its `particles` field is overridden per sweep entry.
    pub potential: PotentialSpec<T>,
    pub initial: InitialData<T>,
    pub particles: Vec<T>,
    pub dt: T,
    pub t_final: T,
    pub dealias: bool,
}

impl<T: Real> SweepPlan<T> {
    pub fn validate(&self) -> Result<()> {
        if self.particles.len() < 2 {
            return Err(Error::validation(
                "a sweep needs at least two particle numbers",
            ));
        }
        if self.particles.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation(
                "particle numbers must be strictly increasing",
            ));
        }
        if !(self.particles[0] >= T::lit(2.0)) {
            return Err(Error::validation("particle numbers must be ≥ 2"));
        }
        step_count(self.t_final, self.dt)?;
        Ok(())
    }

    pub fn beta(&self) -> T {
        self.potential.beta
    }
}

/// One row of a sweep table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub particles: f64,
    /// `‖u_N(t) − φ(t)‖_{L²}`.
    pub error_l2: f64,
    /// `‖|u_N(t)|² − |φ(t)|²‖_{L¹}`.
    pub error_density_l1: f64,
    pub mass_drift: f64,
    /// Relative energy drift of the `u_N` trajectory.
    pub energy_drift: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "N,error_l2,error_density_l1,mass_drift,energy_drift";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.particles,
            self.error_l2,
            self.error_density_l1,
            self.mass_drift,
            self.energy_drift
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SweepRow::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

struct Trajectory<T> {
    psi: Field<T>,
    mass_drift: f64,
    energy_drift: f64,
}

fn integrate<T: Real>(
    mut prop: Propagator<T>,
    psi0: &Field<T>,
    equation: Equation<T>,
    plan: &SweepPlan<T>,
) -> Result<Trajectory<T>> {
    if plan.dealias {
        prop = prop.dealiased();
    }
    let mut state = GPState::new(psi0.clone(), equation)?;
    let e0 = prop.energy(&state)?;
    let m0 = state.mass();
    let steps = step_count(plan.t_final, plan.dt)?;
    prop.advance(&mut state, plan.dt, steps, 0)?;
    let e1 = prop.energy(&state)?;
    let m1 = state.mass();
    let scale = Float::max(Float::abs(e0), T::lit(1e-300));
    Ok(Trajectory {
        mass_drift: Float::abs(m1 - m0).to_f64_lossy(),
        energy_drift: (Float::abs(e1 - e0) / scale).to_f64_lossy(),
        psi: state.psi,
    })
}

fn compare<T: Real>(u: &Field<T>, phi: &Field<T>) -> Result<(f64, f64)> {
    let l2 = u.distance(phi)?.to_f64_lossy();
    let l1: T = u
        .values
        .iter()
        .zip(&phi.values)
        .map(|(a, b)| Float::abs(a.norm_sqr() - b.norm_sqr()))
        .sum();
    Ok((l2, (l1 * u.grid.cell_volume()).to_f64_lossy()))
}

fn tag_divergence(err: Error, particles: f64) -> Error {
    match err {
        Error::Divergence { step, time, what } => Error::Divergence {
            step,
            time,
            what: format!("{what} (N = {particles})"),
        },
        other => other,
    }
}

/// Limiting trajectory `φ(t_final)`.
pub fn limiting_solution<T: Real>(plan: &SweepPlan<T>) -> Result<Field<T>> {
    plan.validate()?;
    let fft = FourierPlan::new(plan.grid);
    let psi0 = plan.initial.sample(plan.grid)?;
    let prop = Propagator::for_equation(&plan.potential, Equation::Limiting, fft)?;
    Ok(integrate(prop, &psi0, Equation::Limiting, plan)?.psi)
}

/// Integrates every `N` of the plan (in parallel) and the limiting equation once.
pub fn run_sweep<T: Real>(plan: &SweepPlan<T>) -> Result<Vec<SweepRow>> {
    plan.validate()?;
    let phi = limiting_solution(plan)?;
    run_sweep_against(plan, &phi)
}

/// As [`run_sweep`], with a precomputed limiting solution.
pub fn run_sweep_against<T: Real>(plan: &SweepPlan<T>, phi: &Field<T>) -> Result<Vec<SweepRow>> {
    plan.validate()?;
    let fft = FourierPlan::new(plan.grid);
    let psi0 = plan.initial.sample(plan.grid)?;
    plan.particles
        .par_iter()
        .map(|&n| {
            let nf = n.to_f64_lossy();
            let pot = plan.potential.with_particles(n)?;
            let prop = Propagator::new(fft.clone(), pot.scaled_multiplier(plan.grid))?;
            let traj = integrate(prop, &psi0, Equation::Scaled { particles: n }, plan)
                .map_err(|e| tag_divergence(e, nf))?;
            let (l2, l1) = compare(&traj.psi, phi)?;
            Ok(SweepRow {
                particles: nf,
                error_l2: l2,
                error_density_l1: l1,
                mass_drift: traj.mass_drift,
                energy_drift: traj.energy_drift,
            })
        })
        .collect()
}

/// Runs the scaled equation with `ŵ(k N^{−β})` replaced by its `N → ∞` limit
/// and returns its distance to the limiting solution.
pub fn limit_proxy_error<T: Real>(plan: &SweepPlan<T>) -> Result<f64> {
    plan.validate()?;
    let phi = limiting_solution(plan)?;
    let fft = FourierPlan::new(plan.grid);
    let psi0 = plan.initial.sample(plan.grid)?;
    let m = plan
        .potential
        .scaled_multiplier_at_scale(plan.grid, T::zero());
    let prop = Propagator::new(fft, m)?;
    let traj = integrate(prop, &psi0, Equation::Limiting, plan)?;
    Ok(compare(&traj.psi, &phi)?.0)
}

/// Least-squares line through `(ln N, ln error)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of `ln error` from the line.
    pub residual: f64,
    pub points: Vec<(f64, f64)>,
}

impl RateFit {
    /// Whether the slope is within `tol` of `−beta`.
    pub fn matches(&self, beta: f64, tol: f64) -> bool {
        (self.slope + beta).abs() <= tol
    }
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::validation(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(n, e)) = points.iter().find(|(_, e)| !(*e > ERROR_FLOOR)) {
        return Err(Error::NumericalAccuracy {
            what: format!(
                "inconclusive fit: error at N = {n} is at the floating-point floor; increase t_final or coarsen the tolerance"
            ),
            observed: e,
            tolerance: ERROR_FLOOR,
        });
    }
    if points.iter().any(|(n, _)| !(*n > 0.0)) {
        return Err(Error::validation("rate fit needs positive N"));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        residual: (ss / m).sqrt(),
        points: points.to_vec(),
    })
}

pub fn fit_rows(rows: &[SweepRow]) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.particles, r.error_l2)).collect();
    fit_rate(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::ShortRange;
    use crate::kernel::KernelSpec;
    use num_complex::Complex;

    fn plan(b: f64, t_final: f64) -> SweepPlan<f64> {
        let kernel = KernelSpec::dipolar([0.0, 0.0, 1.0], 0.25).unwrap();
        let potential = PotentialSpec::new(
            ShortRange::Gaussian { a: 1.0, sigma: 1.0 },
            b,
            kernel,
            0.25,
            2.0,
        )
        .unwrap();
        SweepPlan {
            grid: Grid3::new(16, 12.0).unwrap(),
            potential,
            initial: InitialData::Gaussian {
                sigma: 1.0,
                center: [0.0; 3],
                momentum: [0.0; 3],
            },
            particles: vec![8.0, 16.0, 32.0, 64.0],
            dt: 0.01,
            t_final,
            dealias: false,
        }
    }

    #[test]
    fn synthetic_fits() {
        let pts: Vec<(f64, f64)> = [8.0f64, 16.0, 32.0, 64.0]
            .iter()
            .map(|n| (*n, n.powf(-0.25)))
            .collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-12 && f.residual < 1e-12);
        let pts: Vec<(f64, f64)> = [8.0f64, 16.0, 32.0]
            .iter()
            .map(|n| (*n, 3.0 * n.powf(-0.4)))
            .collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope + 0.4).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.matches(0.4, 1e-9));
    }

    #[test]
    fn fit_refusals() {
        assert!(matches!(
            fit_rate(&[(8.0, 0.1), (16.0, 0.05)]),
            Err(Error::Validation(_))
        ));
        let err = fit_rate(&[(8.0, 0.1), (16.0, 1e-13), (32.0, 0.01)]).unwrap_err();
        assert!(matches!(err, Error::NumericalAccuracy { .. }));
        assert!(err.to_string().contains("t_final"));
    }

    #[test]
    fn plan_validation() {
        let mut p = plan(0.0, 0.1);
        p.particles = vec![8.0, 8.0];
        assert!(p.validate().is_err());
        p.particles = vec![8.0];
        assert!(p.validate().is_err());
        p.particles = vec![1.0, 4.0];
        assert!(p.validate().is_err());
    }

    #[test]
    fn limit_proxy_reproduces_limit() {
        let e = limit_proxy_error(&plan(0.5, 0.1)).unwrap();
        assert!(e < 1e-9, "{e}");
    }

    #[test]
    fn errors_decrease_in_n_and_grow_in_t() {
        let p = plan(0.0, 0.2);
        let rows = run_sweep(&p).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].error_l2 < w[0].error_l2);
        }
        let later = run_sweep(&plan(0.0, 0.4)).unwrap();
        for (a, b) in rows.iter().zip(&later) {
            assert!(b.error_l2 >= a.error_l2);
        }
        assert!(rows.iter().all(|r| r.mass_drift < 1e-12));
    }

    #[test]
    fn common_phase_leaves_table_unchanged() {
        let p = plan(0.5, 0.1);
        let base = run_sweep(&p).unwrap();
        let phi = limiting_solution(&p).unwrap();
        // rotate the limiting solution and the initial datum by the same phase
        let ph = Complex::from_polar(1.0, 0.7);
        let mut rotated = phi.clone();
        rotated.scale(ph);
        let fft = FourierPlan::new(p.grid);
        let mut psi0 = p.initial.sample(p.grid).unwrap();
        psi0.scale(ph);
        for (n, row) in p.particles.iter().zip(&base) {
            let pot = p.potential.with_particles(*n).unwrap();
            let prop = Propagator::new(fft.clone(), pot.scaled_multiplier(p.grid)).unwrap();
            let traj = integrate(prop, &psi0, Equation::Scaled { particles: *n }, &p).unwrap();
            let (l2, _) = compare(&traj.psi, &rotated).unwrap();
            assert!((l2 - row.error_l2).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_layout() {
        let r = SweepRow {
            particles: 8.0,
            error_l2: 0.1,
            error_density_l1: 0.2,
            mass_drift: 0.0,
            energy_drift: 1e-9,
        };
        let s = sweep_csv(&[r]);
        assert!(s.starts_with("N,error_l2,error_density_l1,mass_drift,energy_drift\n8,"));
    }
}
