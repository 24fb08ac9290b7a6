//! Run configuration in TOML.
//!
//! ```toml
//! seed = 42
//!
//! [grid]
//! n = 32            # or nx / ny; lx, ly default to 2π
//!
//! [eos]
//! kind = "incompressible"
//! rho0 = 1.0
//!
//! [viscosity]
//! mu = 0.1
//!
//! [gravitation]
//! preset = "zero"   # zero | uniform_gravity | rigid_rotation
//! parameters = {}
//!
//! [time]
//! T = 1.0
//! N = 25
//!
//! [case]
//! id = "taylor_green"
//! amplitude = 1.0
//!
//! [conjugate]
//! tol = 1e-10
//! max_iter = 20000
//!
//! [minimizer]
//! max_iter = 2000
//! start = "perturbed_reference"
//! noise = 0.1
//! ```
//!
//! `grid`, `viscosity`, `time` and `case` are required. Errors name the
//! offending field as a dotted path.

use std::collections::BTreeMap;
use std::path::Path as FsPath;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::balance::Eos;
use crate::dissipation::ConjugateSolve;
use crate::error::{Error, Result};
use crate::fields::Grid2P;
use crate::gravitation::Gravitation;
use crate::oracle::{Case, CaseSpec, Horizon};
use crate::sben::MinimizerConfig;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    /// Reference trajectory with seeded noise on the free slices.
    PerturbedReference,
    /// Initial state replicated over all slices.
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartPolicy {
    pub kind: StartKind,
    /// Relative RMS amplitude of the noise.
    pub noise: f64,
    /// Highest wavenumber of the noise.
    pub kmax: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: Grid2P,
    pub eos: Eos,
    pub mu: f64,
    pub grav: Gravitation,
    pub horizon: Horizon,
    pub case: Case,
    pub conjugate: ConjugateSolve,
    pub minimizer: MinimizerConfig,
    pub start: StartPolicy,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridBlock {
    n: Option<usize>,
    nx: Option<usize>,
    ny: Option<usize>,
    lx: Option<f64>,
    ly: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ViscosityBlock {
    mu: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GravitationBlock {
    preset: String,
    #[serde(default)]
    parameters: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MinimizerBlock {
    max_iter: usize,
    tol_pi: f64,
    tol_g: f64,
    restart: usize,
    armijo: f64,
    shrink: f64,
    max_backtracks: usize,
    start: StartKind,
    noise: f64,
    noise_kmax: usize,
}

impl Default for MinimizerBlock {
    fn default() -> Self {
        let m = MinimizerConfig::default();
        Self {
            max_iter: m.max_iter,
            tol_pi: m.tol_pi,
            tol_g: m.tol_g,
            restart: m.restart,
            armijo: m.armijo,
            shrink: m.shrink,
            max_backtracks: m.max_backtracks,
            start: StartKind::PerturbedReference,
            noise: 0.1,
            noise_kmax: 3,
        }
    }
}

const BLOCKS: [&str; 8] = [
    "grid",
    "eos",
    "viscosity",
    "gravitation",
    "time",
    "case",
    "conjugate",
    "minimizer",
];

fn block<T: DeserializeOwned>(table: &toml::Table, name: &str) -> Result<Option<T>> {
    match table.get(name) {
        None => Ok(None),
        Some(value) => value
            .clone()
            .try_into()
            .map(Some)
            .map_err(|e: toml::de::Error| Error::config(name, e.message().trim().to_string())),
    }
}

fn required<T: DeserializeOwned>(table: &toml::Table, name: &str) -> Result<T> {
    block(table, name)?.ok_or_else(|| Error::config(name, "missing required block"))
}

fn positive(path: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::config(path, format!("must be > 0, got {x}")))
    }
}

impl RunConfig {
    pub fn load(file: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(file)
            .map_err(|e| Error::config(file.display().to_string(), e.to_string()))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.message().trim().to_string()))?;
        for key in table.keys() {
            if key != "seed" && !BLOCKS.contains(&key.as_str()) {
                return Err(Error::config(key.as_str(), "unknown block"));
            }
        }

        let seed = match table.get("seed") {
            None => DEFAULT_SEED,
            Some(v) => v
                .as_integer()
                .filter(|s| *s >= 0)
                .ok_or_else(|| Error::config("seed", "must be a nonnegative integer"))? as u64,
        };

        let gb: GridBlock = required(&table, "grid")?;
        let nx = gb.nx.or(gb.n).ok_or_else(|| Error::config("grid.nx", "give `n` or `nx`"))?;
        let ny = gb.ny.or(gb.n).ok_or_else(|| Error::config("grid.ny", "give `n` or `ny`"))?;
        let tau = 2.0 * std::f64::consts::PI;
        let grid = Grid2P::new(nx, ny, gb.lx.unwrap_or(tau), gb.ly.unwrap_or(tau))
            .map_err(|e| Error::config("grid", e.to_string()))?;

        let vb: ViscosityBlock = required(&table, "viscosity")?;
        let mu = positive("viscosity.mu", vb.mu)?;

        let horizon: Horizon = required(&table, "time")?;
        positive("time.T", horizon.t_end)?;
        if horizon.n == 0 {
            return Err(Error::config("time.N", "must be >= 1"));
        }

        let case: Case = required(&table, "case")?;

        let eos: Eos = match block(&table, "eos")? {
            Some(e) => e,
            None if case.is_compressible() => Eos::BarotropicPower {
                p0: 1.0,
                rho0: 1.0,
                gamma: 1.4,
            },
            None => Eos::Incompressible { rho0: 1.0 },
        };
        eos.validate().map_err(|e| Error::config("eos", e.to_string()))?;

        let grav = match block::<GravitationBlock>(&table, "gravitation")? {
            None => Gravitation::Zero,
            Some(g) => Gravitation::from_preset(&g.preset, &g.parameters).map_err(|e| match e {
                Error::UnknownPreset(p) => Error::config("gravitation.preset", format!("unknown preset `{p}`")),
                other => other,
            })?,
        };

        let conjugate: ConjugateSolve = block(&table, "conjugate")?.unwrap_or_default();
        positive("conjugate.tol", conjugate.tol)?;

        let mb: MinimizerBlock = block(&table, "minimizer")?.unwrap_or_default();
        if !(mb.shrink > 0.0 && mb.shrink < 1.0) {
            return Err(Error::config("minimizer.shrink", "must lie in (0, 1)"));
        }
        if mb.restart == 0 {
            return Err(Error::config("minimizer.restart", "must be >= 1"));
        }
        if !(mb.noise >= 0.0) {
            return Err(Error::config("minimizer.noise", "must be >= 0"));
        }

        let cfg = Self {
            seed,
            grid,
            eos,
            mu,
            grav,
            horizon,
            case,
            conjugate,
            minimizer: MinimizerConfig {
                max_iter: mb.max_iter,
                tol_pi: mb.tol_pi,
                tol_g: mb.tol_g,
                restart: mb.restart,
                armijo: mb.armijo,
                shrink: mb.shrink,
                max_backtracks: mb.max_backtracks,
            },
            start: StartPolicy {
                kind: mb.start,
                noise: mb.noise,
                kmax: mb.noise_kmax,
            },
        };
        cfg.case_spec().map_err(|e| Error::config("case", e.to_string()))?;
        Ok(cfg)
    }

    pub fn case_spec(&self) -> Result<CaseSpec> {
        CaseSpec::new(self.case, self.grid, self.eos, self.mu, self.grav, self.horizon)
    }

    /// 32² Taylor-Green, `μ = 0.1`, `T = 1`, `N = 25`.
    pub fn default_check() -> Self {
        Self::from_toml_str(DEFAULT_TOML).expect("built-in configuration is valid")
    }
}

pub const DEFAULT_TOML: &str = r#"seed = 42

[grid]
n = 32

[eos]
kind = "incompressible"
rho0 = 1.0

[viscosity]
mu = 0.1

[gravitation]
preset = "zero"

[time]
T = 1.0
N = 25

[case]
id = "taylor_green"
amplitude = 1.0
"#;
