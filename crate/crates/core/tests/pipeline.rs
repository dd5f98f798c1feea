// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::TAU;

use dipgp::binio::{read_field, read_multiplier, write_field, write_multiplier};
use dipgp::fock::evolve::Integrator;
use dipgp::fock::report::{comparison_report, ground_energy, ComparisonSetup};
use dipgp::fock::ModeBasis;
use dipgp::gp::{Equation, GPState, InitialData, PotentialSpec, Propagator, ShortRange};
use dipgp::kernel::KernelSpec;
use dipgp::spectral::{FourierPlan, Grid3};
use dipgp::{Kernel, Plan};
use num_complex::Complex;

fn potential(b: f64) -> PotentialSpec<f64> {
    let kernel: Kernel = KernelSpec::dipolar([0.0, 0.0, 1.0], 0.25).unwrap();
    PotentialSpec::new(
        ShortRange::Gaussian { a: 1.0, sigma: 1.0 },
        b,
        kernel,
        0.25,
        8.0,
    )
    .unwrap()
}

#[test]
fn trajectory_survives_a_binary_round_trip() {
    let grid = Grid3::new(16, 8.0).unwrap();
    let pot = potential(0.5);
    let plan: Plan = FourierPlan::new(grid);
    let mut prop =
        Propagator::for_equation(&pot, Equation::Scaled { particles: 8.0 }, plan).unwrap();
    let psi0 = InitialData::Gaussian {
        sigma: 1.0,
        center: [0.0; 3],
        momentum: [0.5, 0.0, 0.0],
    }
    .sample(grid)
    .unwrap();

    // straight run
    let mut a = GPState::new(psi0.clone(), Equation::Scaled { particles: 8.0 }).unwrap();
    prop.advance(&mut a, 0.01, 20, 0).unwrap();

    // run, serialize halfway, resume
    let mut b = GPState::new(psi0, Equation::Scaled { particles: 8.0 }).unwrap();
    prop.advance(&mut b, 0.01, 10, 0).unwrap();
    let mut bytes = Vec::new();
    write_field(&mut bytes, &b.psi).unwrap();
    let restored = read_field::<f64, _>(&mut bytes.as_slice()).unwrap();
    let mut c = GPState::new(restored, Equation::Scaled { particles: 8.0 }).unwrap();
    prop.advance(&mut c, 0.01, 10, 0).unwrap();
    assert!(a.psi.distance(&c.psi).unwrap() < 1e-14);

    let mut bytes = Vec::new();
    write_multiplier(&mut bytes, prop.multiplier()).unwrap();
    let m = read_multiplier::<f64, _>(&mut bytes.as_slice()).unwrap();
    assert_eq!(m.values, prop.multiplier().values);
}

#[test]
fn dipoles_change_the_dynamics_only_through_the_multiplier() {
    let grid = Grid3::new(16, 8.0).unwrap();
    let psi0 = InitialData::Bump {
        radius: 3.0,
        center: [0.0; 3],
    }
    .sample(grid)
    .unwrap();
    let run = |b: f64| {
        let mut prop =
            Propagator::for_equation(&potential(b), Equation::Limiting, FourierPlan::new(grid))
                .unwrap();
        let mut st = GPState::new(psi0.clone(), Equation::Limiting).unwrap();
        prop.advance(&mut st, 0.01, 30, 0).unwrap();
        st.psi
    };
    let (free, dip) = (run(0.0), run(0.5));
    assert!((free.norm() - dip.norm()).abs() < 1e-12);
    assert!(free.distance(&dip).unwrap() > 1e-6);
}

#[test]
fn comparison_errors_shrink_with_n_for_a_mean_field_interaction() {
    // N-independent pair potential (β small) isolates the 1/N mean-field scaling
    let kernel = KernelSpec::dipolar([0.0, 0.0, 1.0], 0.25).unwrap();
    let potential = PotentialSpec::new(
        ShortRange::Gaussian { a: 0.6, sigma: 0.5 },
        0.0,
        kernel,
        1e-6,
        2.0,
    )
    .unwrap();
    let setup = ComparisonSetup {
        modes: 3,
        ell: TAU,
        potential,
        direction: [1.0, 0.0, 0.0],
        u0: vec![
            Complex::new(0.4, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.3),
        ],
        particles: vec![2, 4, 8],
        t_final: 0.4,
        dt: 0.01,
        stride: usize::MAX,
        integrator: Integrator::Magnus4,
    };
    let rows: Vec<_> = comparison_report(&setup)
        .unwrap()
        .into_iter()
        .filter(|r| r.t > 0.0)
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(
        rows.windows(2).all(|w| w[1].trace_error < w[0].trace_error),
        "{rows:?}"
    );
}

#[test]
fn ground_energy_is_bounded_below_linearly_in_n() {
    // V = Σ_d ŵ(d)/ℓ · T_d with partial isometries T_d, so each pair costs at
    // least −S with S = Σ_d |ŵ(d)|/ℓ and H_N ≥ −N S/2.
    let m = 4;
    let w = |k: f64| 0.8 * (-0.25 * k * k).exp() - 0.6;
    let basis = ModeBasis::torus(m, TAU, w).unwrap();
    let s: f64 = (-(m as i64 - 1)..m as i64)
        .map(|d| w(d as f64).abs() / TAU)
        .sum();
    for n in [2, 3, 4, 5] {
        let e = ground_energy(&basis, n).unwrap();
        assert!(e >= -(n as f64) * s / 2.0 - 1e-12, "N = {n}: {e}");
    }
}
