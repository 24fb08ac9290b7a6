//! Galilean gravitation: a scalar potential `φ` and a vector potential `A`,
//! from which gravity `g = −∇φ − ∂A/∂t` and the Coriolis vector
//! `Ω = ½ ∇×A` are derived on demand.
//!
//! Potentials are analytic presets so that `∇φ`, `∇A` and the time
//! derivatives are exact. Two presets are linear in position and therefore
//! not periodic; their potentials are only sampled where a residual needs
//! them pointwise, and all derivatives come from the analytic Jacobians.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Grid2P, ScalarField, TensorField, VectorField};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Gravitation {
    /// `φ = 0`, `A = 0`.
    #[default]
    Zero,
    /// `φ = g0·y`, `A = 0`; gravity `(0, −g0, 0)`.
    UniformGravity { g0: f64 },
    /// `φ = 0`, `A = Ω₀ × (x − c)` with `Ω₀ = (0, 0, omega)` and `c` the box
    /// centre.
    RigidRotation { omega: f64 },
}

impl Gravitation {
    /// Builds a preset from its id and named parameters.
    pub fn from_preset(id: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |name: &str| {
            params.get(name).copied().ok_or_else(|| {
                Error::config(
                    format!("gravitation.parameters.{name}"),
                    format!("preset `{id}` requires `{name}`"),
                )
            })
        };
        match id {
            "zero" => Ok(Gravitation::Zero),
            "uniform_gravity" => Ok(Gravitation::UniformGravity { g0: get("g0")? }),
            "rigid_rotation" => Ok(Gravitation::RigidRotation {
                omega: get("omega")?,
            }),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Gravitation::Zero => "zero",
            Gravitation::UniformGravity { .. } => "uniform_gravity",
            Gravitation::RigidRotation { .. } => "rigid_rotation",
        }
    }

    /// Whether the sampled potentials are periodic on the box.
    pub fn is_periodic(&self) -> bool {
        match self {
            Gravitation::Zero => true,
            Gravitation::UniformGravity { g0 } => *g0 == 0.0,
            Gravitation::RigidRotation { omega } => *omega == 0.0,
        }
    }

    fn centre(grid: &Grid2P) -> (f64, f64) {
        (0.5 * grid.lx, 0.5 * grid.ly)
    }

    pub fn phi(&self, grid: &Grid2P, _t: f64) -> ScalarField {
        match *self {
            Gravitation::UniformGravity { g0 } => ScalarField::from_fn(*grid, |_, y| g0 * y),
            _ => ScalarField::zeros(*grid),
        }
    }

    pub fn dphi_dt(&self, grid: &Grid2P, _t: f64) -> ScalarField {
        ScalarField::zeros(*grid)
    }

    pub fn grad_phi(&self, grid: &Grid2P, _t: f64) -> VectorField {
        match *self {
            Gravitation::UniformGravity { g0 } => VectorField::constant(*grid, [0.0, g0, 0.0]),
            _ => VectorField::zeros(*grid),
        }
    }

    pub fn vector_potential(&self, grid: &Grid2P, _t: f64) -> VectorField {
        match *self {
            Gravitation::RigidRotation { omega } => {
                let (cx, cy) = Self::centre(grid);
                VectorField::from_fn(*grid, |x, y| [-omega * (y - cy), omega * (x - cx), 0.0])
            }
            _ => VectorField::zeros(*grid),
        }
    }

    pub fn da_dt(&self, grid: &Grid2P, _t: f64) -> VectorField {
        VectorField::zeros(*grid)
    }

    /// Analytic Jacobian of `A`, entry `(i, j) = ∂_j A_i`.
    pub fn grad_a(&self, grid: &Grid2P, _t: f64) -> TensorField {
        let mut out = TensorField::zeros(*grid);
        if let Gravitation::RigidRotation { omega } = *self {
            out.get_mut(0, 1).fill(-omega);
            out.get_mut(1, 0).fill(omega);
        }
        out
    }

    /// `g = −∇φ − ∂A/∂t`.
    pub fn eval_gravity(&self, grid: &Grid2P, t: f64) -> VectorField {
        let mut g = -&self.grad_phi(grid, t);
        g -= &self.da_dt(grid, t);
        g
    }

    /// `Ω = ½ ∇×A`, taken from the analytic Jacobian of `A`.
    pub fn eval_coriolis_vector(&self, grid: &Grid2P, t: f64) -> VectorField {
        let ja = self.grad_a(grid, t);
        let n = grid.len();
        let mut c = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for k in 0..n {
            c[0][k] = 0.5 * (ja.get(2, 1)[k] - ja.get(1, 2)[k]);
            c[1][k] = 0.5 * (ja.get(0, 2)[k] - ja.get(2, 0)[k]);
            c[2][k] = 0.5 * (ja.get(1, 0)[k] - ja.get(0, 1)[k]);
        }
        VectorField::from_components(*grid, c).expect("grid-sized components")
    }

    /// `ρ (g − 2 Ω × v)`.
    pub fn gravitation_force(&self, rho: &ScalarField, v: &VectorField, t: f64) -> VectorField {
        let grid = v.grid();
        let g = self.eval_gravity(grid, t);
        let omega = self.eval_coriolis_vector(grid, t);
        let mut f = g;
        f.axpy(-2.0, &omega.cross(v));
        f.scale_by(rho)
    }
}
