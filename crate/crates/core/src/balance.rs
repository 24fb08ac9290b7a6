//! Reversible balance laws evaluated on one time interval `[t_prev, t_next]`.
//!
//! All interval residuals are centred at the interval midpoint: densities
//! and velocities are averaged, time derivatives are the forward difference
//! across the interval. This gives second-order consistency in time to match
//! the central differences in space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{advect, div_vector, grad_scalar, Grid2P, ScalarField, TensorField, VectorField};
use crate::gravitation::Gravitation;

/// Equation of state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Eos {
    /// Constant density; the pressure is a Lagrange multiplier supplied by
    /// the caller.
    Incompressible { rho0: f64 },
    /// `p = p0 (ρ/ρ0)^γ`.
    BarotropicPower { p0: f64, rho0: f64, gamma: f64 },
}

impl Eos {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Eos::Incompressible { rho0 } => {
                if !(rho0 > 0.0 && rho0.is_finite()) {
                    return Err(Error::InvalidParameter(format!("rho0 must be > 0, got {rho0}")));
                }
            }
            Eos::BarotropicPower { p0, rho0, gamma } => {
                if !(rho0 > 0.0 && rho0.is_finite()) {
                    return Err(Error::InvalidParameter(format!("rho0 must be > 0, got {rho0}")));
                }
                if !(p0 > 0.0 && p0.is_finite()) {
                    return Err(Error::InvalidParameter(format!("p0 must be > 0, got {p0}")));
                }
                if !(gamma >= 1.0 && gamma.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "gamma must be >= 1, got {gamma}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn rho0(&self) -> f64 {
        match *self {
            Eos::Incompressible { rho0 } | Eos::BarotropicPower { rho0, .. } => rho0,
        }
    }

    pub fn is_incompressible(&self) -> bool {
        matches!(self, Eos::Incompressible { .. })
    }

    /// `None` for the incompressible kind.
    pub fn pressure(&self, rho: &ScalarField) -> Option<ScalarField> {
        match *self {
            Eos::Incompressible { .. } => None,
            Eos::BarotropicPower { p0, rho0, gamma } => {
                Some(rho.map(|r| p0 * (r / rho0).powf(gamma)))
            }
        }
    }

    /// Specific internal energy `e(ρ)` with `de/dρ = p/ρ²`, zero at `ρ0`.
    pub fn internal_energy(&self, rho: &ScalarField) -> ScalarField {
        match *self {
            Eos::Incompressible { .. } => ScalarField::zeros(*rho.grid()),
            Eos::BarotropicPower { p0, rho0, gamma } => {
                if gamma == 1.0 {
                    rho.map(|r| p0 / rho0 * (r / rho0).ln())
                } else {
                    let c = p0 / (rho0 * (gamma - 1.0));
                    rho.map(|r| c * ((r / rho0).powf(gamma - 1.0) - 1.0))
                }
            }
        }
    }

    /// `c = sqrt(γ p / ρ)`; zero for the incompressible kind.
    pub fn sound_speed(&self, rho: f64) -> f64 {
        match *self {
            Eos::Incompressible { .. } => 0.0,
            Eos::BarotropicPower { p0, rho0, gamma } => {
                (gamma * p0 * (rho / rho0).powf(gamma) / rho).sqrt()
            }
        }
    }
}

/// Velocity and density at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub t: f64,
    pub v: VectorField,
    pub rho: ScalarField,
    pub eos: Eos,
}

impl FluidState {
    pub fn new(t: f64, v: VectorField, rho: ScalarField, eos: Eos) -> Result<Self> {
        v.grid().check_same(rho.grid())?;
        let min = rho.min();
        if !(min > 0.0) {
            return Err(Error::NonPositiveDensity { min });
        }
        Ok(Self { t, v, rho, eos })
    }

    /// Constant-density state for the incompressible kind.
    pub fn homogeneous(t: f64, v: VectorField, eos: Eos) -> Result<Self> {
        let rho = ScalarField::constant(*v.grid(), eos.rho0());
        Self::new(t, v, rho, eos)
    }

    pub fn grid(&self) -> &Grid2P {
        self.v.grid()
    }

    pub fn pressure(&self) -> Option<ScalarField> {
        self.eos.pressure(&self.rho)
    }

    /// `½ ∫ ρ |v|²`.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.v.dot(&self.v).mul(&self.rho).integral()
    }

    pub fn mass(&self) -> f64 {
        self.rho.integral()
    }
}

/// Generalized linear momentum field `π`.
#[derive(Debug, Clone, PartialEq)]
pub struct Momentum {
    pub pi: VectorField,
}

impl Momentum {
    /// `π = ρ (v + A)`.
    pub fn from_state(state: &FluidState, grav: &Gravitation) -> Self {
        let mut w = state.v.clone();
        w += &grav.vector_potential(state.grid(), state.t);
        Self {
            pi: w.scale_by(&state.rho),
        }
    }
}

/// Midpoint quantities of one interval.
#[derive(Debug, Clone)]
pub struct Midpoint {
    pub dt: f64,
    pub t: f64,
    pub rho: ScalarField,
    pub v: VectorField,
    /// `(v_next − v_prev)/dt`.
    pub accel: VectorField,
}

impl Midpoint {
    pub fn new(prev: &FluidState, next: &FluidState) -> Result<Self> {
        prev.grid().check_same(next.grid())?;
        let dt = next.t - prev.t;
        if !(dt > 0.0) {
            return Err(Error::NonPositiveDt(dt));
        }
        let rho = &(&prev.rho + &next.rho) * 0.5;
        let v = &(&prev.v + &next.v) * 0.5;
        let accel = &(&next.v - &prev.v) * (1.0 / dt);
        Ok(Self {
            dt,
            t: 0.5 * (prev.t + next.t),
            rho,
            v,
            accel,
        })
    }

    /// `Dv/Dt = (v_next − v_prev)/dt + (v̄·∇)v̄`.
    pub fn material_derivative(&self) -> VectorField {
        let mut a = self.accel.clone();
        a += &advect(&self.v, &self.v);
        a
    }
}

/// Interval-averaged pressure: the caller's field if given, otherwise the
/// equation of state averaged over the endpoints.
pub fn midpoint_pressure(
    prev: &FluidState,
    next: &FluidState,
    pressure: Option<&ScalarField>,
) -> Result<ScalarField> {
    if let Some(p) = pressure {
        p.grid().check_same(prev.grid())?;
        return Ok(p.clone());
    }
    match (prev.pressure(), next.pressure()) {
        (Some(a), Some(b)) => Ok(&(&a + &b) * 0.5),
        _ => Err(Error::MissingPressure),
    }
}

/// `(ρ_next − ρ_prev)/dt + ∇·(ρ̄ v̄)`.
pub fn mass_residual(prev: &FluidState, next: &FluidState) -> Result<ScalarField> {
    let m = Midpoint::new(prev, next)?;
    let mut r = &(&next.rho - &prev.rho) * (1.0 / m.dt);
    r += &div_vector(&m.v.scale_by(&m.rho));
    Ok(r)
}

pub fn material_derivative(prev: &FluidState, next: &FluidState) -> Result<VectorField> {
    Ok(Midpoint::new(prev, next)?.material_derivative())
}

/// Irreversible momentum residual `π_I = ρ Dv/Dt + ∇p − ρ(g − 2Ω×v)` at the
/// interval midpoint.
pub fn pi_i_residual(
    prev: &FluidState,
    next: &FluidState,
    grav: &Gravitation,
    pressure: Option<&ScalarField>,
) -> Result<VectorField> {
    let m = Midpoint::new(prev, next)?;
    let p = midpoint_pressure(prev, next, pressure)?;
    let mut r = m.material_derivative().scale_by(&m.rho);
    r += &grad_scalar(&p);
    r -= &grav.gravitation_force(&m.rho, &m.v, m.t);
    Ok(r)
}

/// Reduced momentum balance `−ρ Dv/Dt + ∇·σ_R + ρ(g − 2Ω×v)` with `σ_R = −pI`.
pub fn reduced_momentum_residual(
    prev: &FluidState,
    next: &FluidState,
    grav: &Gravitation,
    pressure: Option<&ScalarField>,
) -> Result<VectorField> {
    Ok(-&pi_i_residual(prev, next, grav, pressure)?)
}

/// Component `j` is `∇·(v q_j)`.
fn div_flux(v: &VectorField, q: &VectorField) -> VectorField {
    let grid = *v.grid();
    let comps: [Vec<f64>; 3] = std::array::from_fn(|j| {
        let qj = q.component(j);
        let flux = v.scale_by(&qj);
        div_vector(&flux).into_values()
    });
    VectorField::from_components(grid, comps).expect("grid-sized components")
}

/// `(v·∇)A` from the analytic Jacobian of `A`.
fn advect_analytic(v: &VectorField, ja: &TensorField) -> VectorField {
    let grid = *v.grid();
    let comps: [Vec<f64>; 3] = std::array::from_fn(|j| {
        (0..grid.len())
            .map(|k| (0..3).map(|i| v.comp(i)[k] * ja.get(j, i)[k]).sum())
            .collect()
    });
    VectorField::from_components(grid, comps).expect("grid-sized components")
}

/// `(∇A)·v`, component `j = Σ_i v_i ∂_j A_i`.
fn grad_a_dot(v: &VectorField, ja: &TensorField) -> VectorField {
    let grid = *v.grid();
    let comps: [Vec<f64>; 3] = std::array::from_fn(|j| {
        (0..grid.len())
            .map(|k| (0..3).map(|i| v.comp(i)[k] * ja.get(i, j)[k]).sum())
            .collect()
    });
    VectorField::from_components(grid, comps).expect("grid-sized components")
}

/// Momentum balance before any use of mass balance:
/// `−∂π/∂t + ∇·(σ_R − v⊗π) + ρ((∇A)·v − ∇φ)`.
///
/// `∇·(v⊗π)` is split as `∇·(v⊗(π − ρA)) + ∇·(ρv) A + ρ(v·∇)A` so that only
/// the periodic part is differenced on the grid.
pub fn raw_momentum_residual(
    prev: &FluidState,
    next: &FluidState,
    pi_prev: &Momentum,
    pi_next: &Momentum,
    grav: &Gravitation,
    pressure: Option<&ScalarField>,
) -> Result<VectorField> {
    let m = Midpoint::new(prev, next)?;
    pi_prev.pi.grid().check_same(prev.grid())?;
    pi_next.pi.grid().check_same(prev.grid())?;
    let grid = *prev.grid();
    let p = midpoint_pressure(prev, next, pressure)?;
    let a_mid = grav.vector_potential(&grid, m.t);
    let ja = grav.grad_a(&grid, m.t);

    let pi_bar = &(&pi_prev.pi + &pi_next.pi) * 0.5;
    let periodic = &pi_bar - &a_mid.scale_by(&m.rho);
    let rho_v = m.v.scale_by(&m.rho);

    let mut flux = div_flux(&m.v, &periodic);
    flux += &a_mid.scale_by(&div_vector(&rho_v));
    flux += &advect_analytic(&m.v, &ja).scale_by(&m.rho);

    let mut r = &(&pi_next.pi - &pi_prev.pi) * (-1.0 / m.dt);
    r -= &grad_scalar(&p);
    r -= &flux;
    let mut body = grad_a_dot(&m.v, &ja);
    body -= &grav.grad_phi(&grid, m.t);
    r += &body.scale_by(&m.rho);
    Ok(r)
}

/// `raw − reduced + mass_residual·(v̄ + A)` with `π = ρ(v + A)`; vanishes in
/// the continuum, so on the grid it measures consistency error only.
pub fn appendix_b_gap(
    prev: &FluidState,
    next: &FluidState,
    grav: &Gravitation,
    pressure: Option<&ScalarField>,
) -> Result<VectorField> {
    let pi_prev = Momentum::from_state(prev, grav);
    let pi_next = Momentum::from_state(next, grav);
    let raw = raw_momentum_residual(prev, next, &pi_prev, &pi_next, grav, pressure)?;
    let reduced = reduced_momentum_residual(prev, next, grav, pressure)?;
    let m = Midpoint::new(prev, next)?;
    let mass = mass_residual(prev, next)?;
    let mut w = m.v.clone();
    w += &grav.vector_potential(prev.grid(), m.t);
    let mut gap = &raw - &reduced;
    gap += &w.scale_by(&mass);
    Ok(gap)
}

/// Energy balance residual
/// `∂H/∂t + ∇·(Hv − σ_R·v) − ρ(∂φ/∂t − ∂A/∂t·v)` with
/// `H = ½ρ|π/ρ − A|² + ρ(φ + e)`.
pub fn energy_residual(
    prev: &FluidState,
    next: &FluidState,
    pi_prev: &Momentum,
    pi_next: &Momentum,
    grav: &Gravitation,
    pressure: Option<&ScalarField>,
) -> Result<ScalarField> {
    let m = Midpoint::new(prev, next)?;
    let grid = *prev.grid();
    let p = midpoint_pressure(prev, next, pressure)?;

    // Periodic part of H (kinetic + internal) at one endpoint.
    let periodic_h = |s: &FluidState, pi: &Momentum| -> ScalarField {
        let w = &pi.pi.div_by(&s.rho) - &grav.vector_potential(&grid, s.t);
        let kin = w.dot(&w).mul(&s.rho).map(|e| 0.5 * e);
        &kin + &s.eos.internal_energy(&s.rho).mul(&s.rho)
    };
    let hp = periodic_h(prev, pi_prev);
    let hn = periodic_h(next, pi_next);
    let pot_p = grav.phi(&grid, prev.t).mul(&prev.rho);
    let pot_n = grav.phi(&grid, next.t).mul(&next.rho);

    let mut dh = &(&hn - &hp) * (1.0 / m.dt);
    dh += &(&(&pot_n - &pot_p) * (1.0 / m.dt));

    let h_bar = &(&hp + &hn) * 0.5;
    let mut r = dh;
    r += &div_vector(&m.v.scale_by(&(&h_bar + &p)));
    // ∇·(ρφv) = φ ∇·(ρv) + ρ v·∇φ
    let phi_mid = grav.phi(&grid, m.t);
    let rho_v = m.v.scale_by(&m.rho);
    r += &phi_mid.mul(&div_vector(&rho_v));
    r += &rho_v.dot(&grav.grad_phi(&grid, m.t));

    let mut source = grav.dphi_dt(&grid, m.t);
    source -= &grav.da_dt(&grid, m.t).dot(&m.v);
    r -= &source.mul(&m.rho);
    Ok(r)
}
