// SPDX-License-Identifier: Apache-2.0

//! Run configuration: parsed from TOML, then range-checked before any work.

use std::path::{Path, PathBuf};

use dipgp::fock::evolve::Integrator;
use dipgp::gp::{Equation, InitialData, PotentialSpec, ShortRange};
use dipgp::kernel::{AngularTable, KernelSpec, Omega};
use dipgp::spectral::Grid3;
use dipgp::{Error, Result, C};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub kernel: KernelConfig,
    pub potential: PotentialConfig,
    pub initial: InitialConfig,
    pub dynamics: DynamicsConfig,
    pub sweep: SweepConfig,
    pub fock: FockConfig,
    pub checks: CheckConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 32,
            length: 16.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    /// `"dipolar"` or the path of an angular table (`x y z value` rows).
    pub omega: String,
    pub axis: [f64; 3],
    #[serde(rename = "R")]
    pub radius: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            omega: "dipolar".into(),
            axis: [0.0, 0.0, 1.0],
            radius: 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum W0Config {
    Gaussian { a: f64, sigma: f64 },
    Ball { a: f64, radius: f64 },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub w0: W0Config,
    /// Enforce the stability classification (conditional regimes then need
    /// `--allow-conditional`).
    pub a_check: bool,
    pub b: f64,
    pub beta: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            w0: W0Config::Gaussian { a: 1.0, sigma: 1.0 },
            a_check: true,
            b: 0.5,
            beta: 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Gaussian {
        sigma: f64,
        center: [f64; 3],
        momentum: [f64; 3],
    },
    PlaneWave {
        mode: [i64; 3],
    },
    Bump {
        radius: f64,
        center: [f64; 3],
    },
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Gaussian {
            sigma: 1.0,
            center: [0.0; 3],
            momentum: [0.0; 3],
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    Limiting,
    Scaled,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Diagnostics row every this many steps.
    pub diagnostics_stride: usize,
    /// Field snapshot every this many steps; 0 disables snapshots.
    pub snapshot_stride: usize,
    pub equation: EquationKind,
    /// Particle number of the scaled equation.
    pub particles: f64,
    pub dealias: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            dt: 5e-3,
            t_final: 0.5,
            diagnostics_stride: 10,
            snapshot_stride: 0,
            equation: EquationKind::Limiting,
            particles: 64.0,
            dealias: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    #[serde(rename = "Ns")]
    pub particles: Vec<f64>,
    /// Accepted distance of the fitted slope from `−β`.
    pub rate_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            particles: vec![8.0, 16.0, 32.0, 64.0, 128.0, 256.0],
            rate_tol: 0.15,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    Midpoint,
    Magnus4,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FockConfig {
    pub m: usize,
    pub ell: f64,
    #[serde(rename = "N_list")]
    pub particles: Vec<usize>,
    #[serde(rename = "M")]
    pub m_cap: usize,
    /// Torus direction in the 3D frame of the kernel.
    pub direction: [f64; 3],
    /// Initial condensate amplitudes as `[re, im]` pairs, normalized on use.
    pub u0: Vec<[f64; 2]>,
    pub dt: f64,
    pub t_final: f64,
    /// Report row every this many steps.
    pub stride: usize,
    pub integrator: IntegratorKind,
    /// Write `ℍ(0)` and `𝒢_N(0)` as coordinate lists.
    pub dump_operators: bool,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            m: 5,
            ell: std::f64::consts::TAU,
            particles: vec![3, 4, 5, 6],
            m_cap: 2,
            direction: [1.0, 0.0, 0.0],
            u0: vec![[0.2, 0.0], [0.5, 0.1], [1.0, 0.0], [0.0, 0.4], [0.1, -0.1]],
            dt: 0.01,
            t_final: 0.5,
            stride: 10,
            integrator: IntegratorKind::Magnus4,
            dump_operators: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    /// Directions sampled in the small-`|k|R` scan.
    pub directions: usize,
    /// Bound on `|K̂_{≤R}(k)|/(R²|k|²)` over `|k|R ≤ 0.1`.
    pub truncated_bound: f64,
    /// Wavevectors in the closed-form comparison.
    pub multiplier_samples: usize,
    pub multiplier_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            directions: 100,
            truncated_bound: 4.0,
            multiplier_samples: 50,
            multiplier_tol: 1e-3,
        }
    }
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{what} must be positive and finite, got {x}"
        )))
    }
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<(Self, Option<String>)> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))?;
        let table = if cfg.kernel.omega == "dipolar" {
            None
        } else {
            let p = base.join(&cfg.kernel.omega);
            Some(std::fs::read_to_string(&p).map_err(|e| {
                Error::Validation(format!("cannot read angular table {}: {e}", p.display()))
            })?)
        };
        Ok((cfg, table))
    }

    pub fn defaults_toml() -> String {
        toml::to_string_pretty(&RunConfig::default()).expect("defaults serialize")
    }

    /// Range checks common to every subcommand.
    pub fn validate(&self) -> Result<()> {
        positive(self.grid.length, "grid.L")?;
        positive(self.kernel.radius, "kernel.R")?;
        positive(self.potential.beta, "potential.beta")?;
        if !(self.potential.b >= 0.0) {
            return Err(Error::Validation(format!(
                "potential.b must be ≥ 0, got {}",
                self.potential.b
            )));
        }
        positive(self.dynamics.dt, "dynamics.dt")?;
        positive(self.dynamics.t_final, "dynamics.t_final")?;
        if self.dynamics.diagnostics_stride == 0 {
            return Err(Error::Validation(
                "dynamics.diagnostics_stride must be ≥ 1".into(),
            ));
        }
        if !self
            .dynamics
            .snapshot_stride
            .is_multiple_of(self.dynamics.diagnostics_stride)
        {
            return Err(Error::Validation(
                "dynamics.snapshot_stride must be a multiple of dynamics.diagnostics_stride".into(),
            ));
        }
        if self.dynamics.equation == EquationKind::Scaled && !(self.dynamics.particles >= 2.0) {
            return Err(Error::Validation("dynamics.particles must be ≥ 2".into()));
        }
        positive(self.sweep.rate_tol, "sweep.rate_tol")?;
        positive(self.fock.ell, "fock.ell")?;
        positive(self.fock.dt, "fock.dt")?;
        positive(self.fock.t_final, "fock.t_final")?;
        if self.fock.stride == 0 {
            return Err(Error::Validation("fock.stride must be ≥ 1".into()));
        }
        if self.fock.u0.len() != self.fock.m {
            return Err(Error::Validation(format!(
                "fock.u0 has {} amplitudes for m = {}",
                self.fock.u0.len(),
                self.fock.m
            )));
        }
        if self.fock.particles.iter().any(|&n| n < 2) || self.fock.particles.is_empty() {
            return Err(Error::Validation(
                "fock.N_list must be non-empty with every N ≥ 2".into(),
            ));
        }
        if self.fock.particles.iter().any(|&n| self.fock.m_cap > n) {
            return Err(Error::Validation(
                "fock.M must not exceed any N in fock.N_list".into(),
            ));
        }
        if self.checks.directions == 0 || self.checks.multiplier_samples < 2 {
            return Err(Error::Validation(
                "checks need ≥ 1 direction and ≥ 2 multiplier samples".into(),
            ));
        }
        positive(self.checks.truncated_bound, "checks.truncated_bound")?;
        positive(self.checks.multiplier_tol, "checks.multiplier_tol")?;
        Grid3::<f64>::new(self.grid.n, self.grid.length)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid3<f64>> {
        Grid3::new(self.grid.n, self.grid.length)
    }

    pub fn kernel(&self, table: Option<&str>) -> Result<KernelSpec<f64>> {
        let omega = match table {
            None => Omega::dipolar(self.kernel.axis)?,
            Some(text) => Omega::Table(AngularTable::parse(text)?),
        };
        KernelSpec::new(omega, self.kernel.radius)
    }

    pub fn potential(&self, kernel: KernelSpec<f64>, particles: f64) -> Result<PotentialSpec<f64>> {
        let w0 = match self.potential.w0 {
            W0Config::Gaussian { a, sigma } => ShortRange::Gaussian { a, sigma },
            W0Config::Ball { a, radius } => ShortRange::Ball { a, radius },
        };
        PotentialSpec::new(w0, self.potential.b, kernel, self.potential.beta, particles)
    }

    pub fn initial(&self) -> InitialData<f64> {
        match self.initial {
            InitialConfig::Gaussian {
                sigma,
                center,
                momentum,
            } => InitialData::Gaussian {
                sigma,
                center,
                momentum,
            },
            InitialConfig::PlaneWave { mode } => InitialData::PlaneWave { mode },
            InitialConfig::Bump { radius, center } => InitialData::Bump { radius, center },
        }
    }

    pub fn equation(&self) -> Equation<f64> {
        match self.dynamics.equation {
            EquationKind::Limiting => Equation::Limiting,
            EquationKind::Scaled => Equation::Scaled {
                particles: self.dynamics.particles,
            },
        }
    }

    pub fn integrator(&self) -> Integrator {
        match self.fock.integrator {
            IntegratorKind::Midpoint => Integrator::Midpoint,
            IntegratorKind::Magnus4 => Integrator::Magnus4,
        }
    }

    pub fn u0(&self) -> Vec<C<f64>> {
        self.fock
            .u0
            .iter()
            .map(|[re, im]| Complex::new(*re, *im))
            .collect()
    }
}

/// Resolved input location for relative table paths.
pub fn config_dir(path: Option<&PathBuf>) -> PathBuf {
    path.and_then(|p| p.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let text = RunConfig::defaults_toml();
        let (cfg, table) = RunConfig::parse(&text, Path::new(".")).unwrap();
        assert!(table.is_none());
        cfg.validate().unwrap();
        assert_eq!(toml::to_string_pretty(&cfg).unwrap(), text);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("[grid]\nn = 16\nsize = 3\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("size"), "{err}");
        assert!(RunConfig::parse("[gird]\n", Path::new(".")).is_err());
    }

    #[test]
    fn ranges_are_checked() {
        let (cfg, _) = RunConfig::parse("[kernel]\nR = -1.0\n", Path::new(".")).unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("kernel.R"));
        let (cfg, _) = RunConfig::parse("[fock]\nm = 3\n", Path::new(".")).unwrap();
        assert!(cfg.validate().is_err());
        let (cfg, _) =
            RunConfig::parse("[dynamics]\nsnapshot_stride = 15\n", Path::new(".")).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sections_parse() {
        let text = r#"
[potential]
w0 = { kind = "ball", a = 2.0, radius = 0.5 }
b = 0.0
[initial]
kind = "plane_wave"
mode = [1, 0, 0]
[fock]
integrator = "midpoint"
"#;
        let (cfg, _) = RunConfig::parse(text, Path::new(".")).unwrap();
        cfg.validate().unwrap();
        assert_eq!(
            cfg.potential.w0,
            W0Config::Ball {
                a: 2.0,
                radius: 0.5
            }
        );
        assert_eq!(cfg.initial, InitialConfig::PlaneWave { mode: [1, 0, 0] });
        assert_eq!(cfg.integrator(), Integrator::Midpoint);
    }
}
