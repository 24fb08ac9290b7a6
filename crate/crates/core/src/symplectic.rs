//! Phase points `ζ = (v, ∂π/∂t)`, the canonical symplectic form, and the
//! split of a phase velocity into its reversible part and the irreversible
//! remainder `ζ_I = (v_I, π_I)`.
//!
//! With a potential that depends on `v` only, the symplectic polar of `ζ_I`
//! is the classical conjugate `φ*(−π_I)` when `v_I = 0` and `+∞` otherwise.

use crate::balance::{pi_i_residual, FluidState, Momentum};
use crate::dissipation::{phi, phi_star, ConjugateSolve};
use crate::error::{Error, Result};
use crate::fields::{inner, ScalarField, VectorField};
use crate::gravitation::Gravitation;

/// Relative tolerance on `v_I` below which the polar is finite.
pub const DEFAULT_V_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub v: VectorField,
    pub pidot: VectorField,
}

impl PhasePoint {
    pub fn new(v: VectorField, pidot: VectorField) -> Result<Self> {
        v.grid().check_same(pidot.grid())?;
        Ok(Self { v, pidot })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            v: &self.v * a,
            pidot: &self.pidot * a,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            v: &self.v + &other.v,
            pidot: &self.pidot + &other.pidot,
        }
    }
}

/// `ω(ζ, ζ') = ∫ (v·∂π'/∂t − ∂π/∂t·v')`.
pub fn omega(z: &PhasePoint, zp: &PhasePoint) -> Result<f64> {
    Ok(inner(&z.v, &zp.pidot)? - inner(&z.pidot, &zp.v)?)
}

#[derive(Debug, Clone)]
pub struct PhaseDecomposition {
    pub v_i: VectorField,
    pub pi_i: VectorField,
    /// Largest velocity magnitude of the interval, for relative tolerances.
    pub v_scale: f64,
}

impl PhaseDecomposition {
    pub fn as_phase_point(&self) -> PhasePoint {
        PhasePoint {
            v: self.v_i.clone(),
            pidot: self.pi_i.clone(),
        }
    }
}

/// `ζ_I = ζ − X_H` on one interval: `v_I = v − π/ρ + A` (averaged over the
/// endpoints) and the barotropic momentum residual `π_I`.
pub fn decompose(
    prev: &FluidState,
    next: &FluidState,
    pi_prev: &Momentum,
    pi_next: &Momentum,
    grav: &Gravitation,
    pressure: Option<&ScalarField>,
) -> Result<PhaseDecomposition> {
    let endpoint = |s: &FluidState, pi: &Momentum| -> Result<VectorField> {
        pi.pi.grid().check_same(s.grid())?;
        let mut vi = &s.v - &pi.pi.div_by(&s.rho);
        vi += &grav.vector_potential(s.grid(), s.t);
        Ok(vi)
    };
    let v_i = &(&endpoint(prev, pi_prev)? + &endpoint(next, pi_next)?) * 0.5;
    let pi_i = pi_i_residual(prev, next, grav, pressure)?;
    let v_scale = prev.v.max_norm().max(next.v.max_norm());
    Ok(PhaseDecomposition { v_i, pi_i, v_scale })
}

#[derive(Debug, Clone, Copy)]
pub struct PolarValue {
    pub value: f64,
    /// Norm of the null-space part removed from `−π_I` before conjugation.
    pub discarded: f64,
}

/// `Φ*ω(ζ_I) = φ*(−π_I)` when `‖v_I‖∞ ≤ v_tol·scale`; otherwise an
/// [`Error::InfinitePolar`] carrying `‖v_I‖∞`.
pub fn symplectic_polar(
    zi: &PhaseDecomposition,
    mu: f64,
    cfg: &ConjugateSolve,
    v_tol: f64,
) -> Result<PolarValue> {
    let v_i_norm = zi.v_i.max_norm();
    let limit = v_tol * zi.v_scale.max(f64::MIN_POSITIVE);
    if v_i_norm > limit {
        return Err(Error::InfinitePolar { v_i_norm, limit });
    }
    let mut f = -&zi.pi_i;
    let discarded = f.project_range();
    Ok(PolarValue {
        value: phi_star(&f, mu, cfg)?,
        discarded,
    })
}

/// `φ(v) + Φ*ω(ζ_I) − ω(ζ_I, ζ)`, nonnegative and zero exactly when the
/// irreversible part is generated by the dissipation potential.
pub fn constitutive_gap(
    z: &PhasePoint,
    zi: &PhaseDecomposition,
    mu: f64,
    cfg: &ConjugateSolve,
) -> Result<f64> {
    let polar = symplectic_polar(zi, mu, cfg, DEFAULT_V_TOL)?;
    Ok(phi(&z.v, mu) + polar.value - omega(&zi.as_phase_point(), z)?)
}
