// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use dipgp::binio::write_field;
use dipgp::fock::bogoliubov::{build_generator, build_hamiltonian};
use dipgp::fock::report::{
    comparison_csv, comparison_report, trajectory_invariants, ComparisonSetup, IdentitySuite,
};
use dipgp::fock::FockSpace;
use dipgp::gp::{Diagnostics, GPState, Propagator, Stability, StabilityReport};
use dipgp::kernel::{AngularChecks, KernelSpec};
use dipgp::scaling::{fit_rows, run_sweep, sweep_csv, SweepPlan};
use dipgp::spectral::FourierPlan;
use dipgp::{Error, Result};
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Outcome of a subcommand: a JSON summary plus, for runs that completed but
/// missed a tolerance, the failure to report.
pub struct Report {
    pub summary: Value,
    pub failure: Option<Error>,
}

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub table: Option<&'a str>,
    pub out: &'a Path,
    pub allow_conditional: bool,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

/// Roughly uniform deterministic directions (Fibonacci lattice).
fn fibonacci_directions(count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / count as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [s * phi.cos(), s * phi.sin(), z]
        })
        .collect()
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|x| x / n)
}

/// A unit vector at the magic angle `arccos(1/√3)` from `axis`.
fn magic_direction(axis: [f64; 3]) -> [f64; 3] {
    let a = unit(axis);
    let helper = if a[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let d = a[0] * helper[0] + a[1] * helper[1] + a[2] * helper[2];
    let perp = unit([
        helper[0] - d * a[0],
        helper[1] - d * a[1],
        helper[2] - d * a[2],
    ]);
    let (c, s) = ((1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt());
    [0, 1, 2].map(|i| c * a[i] + s * perp[i])
}

fn check(name: &str, observed: f64, tolerance: f64) -> (Value, bool) {
    let pass = observed.is_finite() && observed <= tolerance;
    (
        json!({ "name": name, "observed": observed, "tolerance": tolerance, "pass": pass }),
        pass,
    )
}

pub fn kernel_check(ctx: &Context) -> Result<Report> {
    let cfg = ctx.config;
    let kernel = cfg.kernel(ctx.table)?;
    let radius = kernel.radius();
    let checks = AngularChecks::compute(kernel.omega());

    let mut scan = String::from("direction,x,y,z,kR,ratio\n");
    let mut worst_ratio = 0.0f64;
    for (i, d) in fibonacci_directions(cfg.checks.directions)
        .iter()
        .enumerate()
    {
        for kr in [1e-3, 1e-2, 0.03, 0.06, 0.1] {
            let kn = kr / radius;
            let v = kernel.inner_truncated_transform(d.map(|x| x * kn), radius)?;
            let ratio = v.abs() / (kr * kr);
            worst_ratio = worst_ratio.max(ratio);
            scan.push_str(&format!(
                "{i},{:.17e},{:.17e},{:.17e},{kr},{ratio:.17e}\n",
                d[0], d[1], d[2]
            ));
        }
    }
    write_text(&ctx.out.join("kernel_scan.csv"), &scan)?;

    let axis = cfg.kernel.axis;
    let mut ks = vec![magic_direction(axis), unit(axis)];
    let dirs = fibonacci_directions(cfg.checks.multiplier_samples - ks.len());
    for (i, d) in dirs.iter().enumerate() {
        let kn = 0.5 + 7.5 * i as f64 / dirs.len().max(1) as f64;
        ks.push(d.map(|x| x * kn));
    }
    let mut table = String::from("kx,ky,kz,fast,quadrature,abs_diff\n");
    let mut worst_diff = 0.0f64;
    for k in &ks {
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let fast = kernel.full_multiplier_fast(*k);
        let quad = kernel.inner_truncated_transform(*k, 1e3 / kn)?;
        let diff = (fast - quad).abs();
        worst_diff = worst_diff.max(diff);
        table.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{fast:.17e},{quad:.17e},{diff:.17e}\n",
            k[0], k[1], k[2]
        ));
    }
    write_text(&ctx.out.join("kernel_agreement.csv"), &table)?;

    let results = [
        check(
            "cancellation",
            checks.cancellation_residual,
            dipgp::kernel::CANCELLATION_TOL,
        ),
        check(
            "truncated_kernel_constant",
            worst_ratio,
            cfg.checks.truncated_bound,
        ),
        check(
            "multiplier_agreement",
            worst_diff,
            cfg.checks.multiplier_tol,
        ),
    ];
    let failure = results
        .iter()
        .find(|(_, pass)| !pass)
        .map(|(v, _)| Error::NumericalAccuracy {
            what: format!("kernel check failed: {}", v["name"].as_str().unwrap_or("")),
            observed: v["observed"].as_f64().unwrap_or(f64::NAN),
            tolerance: v["tolerance"].as_f64().unwrap_or(f64::NAN),
        });
    Ok(Report {
        summary: json!({
            "checks": results.iter().map(|(v, _)| v.clone()).collect::<Vec<_>>(),
            "parity_residual": checks.parity_residual,
        }),
        failure,
    })
}

fn stability_json(r: &StabilityReport<f64>) -> Value {
    json!({
        "class": r.class.to_string(),
        "min_w_hat": r.min_w_hat,
        "min_k_hat": r.min_k_hat,
        "margin": r.margin,
    })
}

fn require_stable(ctx: &Context, r: &StabilityReport<f64>) -> Result<()> {
    if r.class == Stability::Conditional && ctx.config.potential.a_check && !ctx.allow_conditional {
        return Err(Error::Validation(format!(
            "interaction is only conditionally stable (a + b·min K̂ = {:.4e}); pass --allow-conditional to run anyway",
            r.margin
        )));
    }
    Ok(())
}

pub fn gp_run(ctx: &Context) -> Result<Report> {
    let cfg = ctx.config;
    let grid = cfg.grid()?;
    let particles = match cfg.equation() {
        dipgp::gp::Equation::Scaled { particles } => particles,
        dipgp::gp::Equation::Limiting => 2.0,
    };
    let pot = cfg.potential(cfg.kernel(ctx.table)?, particles)?;
    let stability = pot.stability_predicate(grid)?;
    require_stable(ctx, &stability)?;
    dipgp::gp::step_count(cfg.dynamics.t_final, cfg.dynamics.dt)?;

    let mut prop = Propagator::for_equation(&pot, cfg.equation(), FourierPlan::new(grid))?;
    if cfg.dynamics.dealias {
        prop = prop.dealiased();
    }
    let mut state = GPState::new(cfg.initial().sample(grid)?, cfg.equation())?;
    let snap_dir = ctx.out.join("snapshots");
    if cfg.dynamics.snapshot_stride > 0 {
        fs::create_dir_all(&snap_dir)?;
    }
    let mut csv = BufWriter::new(File::create(ctx.out.join("diagnostics.csv"))?);
    writeln!(csv, "{}", Diagnostics::<f64>::CSV_HEADER)?;
    let mut rows: Vec<Diagnostics<f64>> = Vec::new();
    let dt = cfg.dynamics.dt;
    let stride = cfg.dynamics.snapshot_stride;
    let outcome = prop.run(
        &mut state,
        dt,
        cfg.dynamics.t_final,
        cfg.dynamics.diagnostics_stride,
        |s, d| {
            writeln!(csv, "{}", d.csv_row())?;
            csv.flush()?;
            rows.push(*d);
            let step = (s.t / dt).round() as usize;
            if stride > 0 && step.is_multiple_of(stride) {
                let mut f = BufWriter::new(File::create(
                    snap_dir.join(format!("snapshot_{step:08}.bin")),
                )?);
                write_field(&mut f, &s.psi)?;
                f.flush()?;
            }
            Ok(())
        },
    );
    let drifts = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => json!({
            "mass_drift": (b.mass - a.mass).abs(),
            "relative_energy_drift": (b.energy - a.energy).abs() / a.energy.abs().max(1e-300),
        }),
        _ => Value::Null,
    };
    let summary = json!({
        "stability": stability_json(&stability),
        "rows": rows.len(),
        "t_reached": state.t,
        "conservation": drifts,
    });
    match outcome {
        Ok(_) => Ok(Report {
            summary,
            failure: None,
        }),
        Err(e @ Error::Divergence { .. }) => Ok(Report {
            summary,
            failure: Some(e),
        }),
        Err(e) => Err(e),
    }
}

pub fn converge(ctx: &Context) -> Result<Report> {
    let cfg = ctx.config;
    let grid = cfg.grid()?;
    let first = cfg.sweep.particles.first().copied().unwrap_or(2.0);
    let pot = cfg.potential(cfg.kernel(ctx.table)?, first.max(2.0))?;
    let stability = pot.stability_predicate(grid)?;
    require_stable(ctx, &stability)?;
    let plan = SweepPlan {
        grid,
        potential: pot,
        initial: cfg.initial(),
        particles: cfg.sweep.particles.clone(),
        dt: cfg.dynamics.dt,
        t_final: cfg.dynamics.t_final,
        dealias: cfg.dynamics.dealias,
    };
    let rows = run_sweep(&plan)?;
    write_text(&ctx.out.join("sweep.csv"), &sweep_csv(&rows))?;
    let fit = fit_rows(&rows)?;
    let beta = cfg.potential.beta;
    let pass = fit.matches(beta, cfg.sweep.rate_tol);
    let failure = (!pass).then(|| Error::NumericalAccuracy {
        what: format!(
            "fitted slope {:.5} is not within tolerance of −β = {}",
            fit.slope, -beta
        ),
        observed: (fit.slope + beta).abs(),
        tolerance: cfg.sweep.rate_tol,
    });
    Ok(Report {
        summary: json!({
            "slope": fit.slope,
            "intercept": fit.intercept,
            "residual": fit.residual,
            "beta": beta,
            "rate_tol": cfg.sweep.rate_tol,
            "pass": pass,
            "stability": stability_json(&stability),
            "plan": {
                "grid": cfg.grid,
                "kernel": cfg.kernel,
                "potential": cfg.potential,
                "initial": cfg.initial,
                "particles": cfg.sweep.particles,
                "dt": cfg.dynamics.dt,
                "t_final": cfg.dynamics.t_final,
                "dealias": cfg.dynamics.dealias,
            },
        }),
        failure,
    })
}

pub fn fock(ctx: &Context) -> Result<Report> {
    let cfg = ctx.config;
    let kernel: KernelSpec<f64> = cfg.kernel(ctx.table)?;
    let setup = ComparisonSetup {
        modes: cfg.fock.m,
        ell: cfg.fock.ell,
        potential: cfg.potential(kernel, 2.0)?,
        direction: cfg.fock.direction,
        u0: cfg.u0(),
        particles: cfg.fock.particles.clone(),
        t_final: cfg.fock.t_final,
        dt: cfg.fock.dt,
        stride: cfg.fock.stride,
        integrator: cfg.integrator(),
    };
    setup.validate()?;

    let mut identities = String::from("N,check,observed,tolerance,pass\n");
    let mut failure = None;
    for &n in &setup.particles {
        let basis = setup.basis(n)?;
        let suite = IdentitySuite::run(&basis, n, &setup.u0)?;
        for (name, got, tol) in suite.checks() {
            identities.push_str(&format!("{n},{name},{got:.6e},{tol:.0e},{}\n", got <= tol));
        }
        if failure.is_none() {
            failure = suite.require().err();
        }
        if cfg.fock.dump_operators {
            let dir = ctx.out.join("operators");
            fs::create_dir_all(&dir)?;
            let space = FockSpace::new(cfg.fock.m, n)?;
            let u = basis.normalized(&setup.u0)?;
            write_text(
                &dir.join(format!("hamiltonian_N{n}.coo")),
                &build_hamiltonian(&basis, &space, n)?.to_coo_text(),
            )?;
            write_text(
                &dir.join(format!("generator_N{n}.coo")),
                &build_generator(&basis, &space, &u, n)?.to_coo_text(),
            )?;
        }
    }
    write_text(&ctx.out.join("identities.csv"), &identities)?;
    if failure.is_some() {
        return Ok(Report {
            summary: json!({ "aborted": "operator identity suite failed before propagation" }),
            failure,
        });
    }

    let rows = comparison_report(&setup)?;
    write_text(&ctx.out.join("comparison.csv"), &comparison_csv(&rows))?;
    let mut inv = String::from("N,M,dynamics,max_norm_drift,max_a_u_residual,max_above_m\n");
    let mut invariants = Vec::new();
    for &n in &setup.particles {
        let (bog, loc) = trajectory_invariants(&setup, n, cfg.fock.m_cap)?;
        for (kind, r) in [("bogoliubov", bog), ("localized", loc)] {
            let above = r
                .max_above_m
                .map(|x| format!("{x:.17e}"))
                .unwrap_or_default();
            inv.push_str(&format!(
                "{n},{},{kind},{:.17e},{:.17e},{above}\n",
                cfg.fock.m_cap, r.max_norm_drift, r.max_a_u_residual
            ));
            invariants.push(json!({ "N": n, "dynamics": kind, "report": r }));
        }
    }
    write_text(&ctx.out.join("invariants.csv"), &inv)?;
    let last: Vec<Value> = setup
        .particles
        .iter()
        .filter_map(|n| rows.iter().rfind(|r| r.n == *n))
        .map(|r| json!(r))
        .collect();
    Ok(Report {
        summary: json!({ "final_rows": last, "invariants": invariants }),
        failure: None,
    })
}
