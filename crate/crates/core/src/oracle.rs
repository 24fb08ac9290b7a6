//! Reference trajectories: analytic solutions and explicit second-order
//! Runge-Kutta steppers sharing the spatial operators of the functional.
//!
//! The incompressible stepper projects after each stage. The compressible
//! stepper advances `(ρ, ρv)` in divergence form so that mass and, without
//! gravitation, momentum are conserved to round-off.

use serde::{Deserialize, Serialize};

use crate::balance::{Eos, FluidState};
use crate::dissipation::apply_k;
use crate::error::{Error, Result};
use crate::fields::{advect, div_vector, grad_scalar, Grid2P, ScalarField, VectorField};
use crate::gravitation::Gravitation;
use crate::sben::{leray_project, Path};
use crate::synth;

/// Stability fractions of the explicit scheme: advective/acoustic CFL and
/// the share of the real-axis limit used for viscous terms.
pub const CFL: f64 = 0.3;
pub const DIFFUSION_SAFETY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum Case {
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
    },
    ShearDecay {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Taylor-Green start in a frame rotating at `omega`.
    RigidRotation {
        omega: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `ρ = ρ₀(1 + a cos x cos y)`, `v = a·(Taylor-Green)`.
    CompressibleSmooth {
        #[serde(default = "small")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn small() -> f64 {
    0.01
}

impl Case {
    pub fn id(&self) -> &'static str {
        match self {
            Case::TaylorGreen { .. } => "taylor_green",
            Case::ShearDecay { .. } => "shear_decay",
            Case::RigidRotation { .. } => "rigid_rotation",
            Case::CompressibleSmooth { .. } => "compressible_smooth",
        }
    }

    pub fn is_compressible(&self) -> bool {
        matches!(self, Case::CompressibleSmooth { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Horizon {
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl Horizon {
    pub fn dt(&self) -> f64 {
        self.t_end / self.n as f64
    }
}

/// A reference problem: initial state, material data and time horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSpec {
    pub case: Case,
    pub grid: Grid2P,
    pub eos: Eos,
    pub mu: f64,
    pub grav: Gravitation,
    pub horizon: Horizon,
}

impl CaseSpec {
    pub fn new(case: Case, grid: Grid2P, eos: Eos, mu: f64, grav: Gravitation, horizon: Horizon) -> Result<Self> {
        eos.validate()?;
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("viscosity must be >= 0, got {mu}")));
        }
        if horizon.n == 0 || !(horizon.t_end > 0.0) {
            return Err(Error::InvalidParameter("time horizon needs T > 0 and N >= 1".into()));
        }
        if case.is_compressible() == eos.is_incompressible() {
            return Err(Error::InvalidParameter(format!(
                "case `{}` does not match the equation of state",
                case.id()
            )));
        }
        let grav = match case {
            Case::RigidRotation { omega, .. } => match grav {
                Gravitation::Zero => Gravitation::RigidRotation { omega },
                Gravitation::RigidRotation { omega: w } if w == omega => grav,
                _ => {
                    return Err(Error::InvalidParameter(
                        "rigid_rotation case needs the matching rigid_rotation preset".into(),
                    ))
                }
            },
            _ => grav,
        };
        Ok(Self {
            case,
            grid,
            eos,
            mu,
            grav,
            horizon,
        })
    }

    pub fn nu(&self) -> f64 {
        self.mu / self.eos.rho0()
    }

    pub fn initial_state(&self) -> Result<FluidState> {
        let g = self.grid;
        match self.case {
            Case::TaylorGreen { amplitude } | Case::RigidRotation { amplitude, .. } => {
                Ok(taylor_green_analytic(0.0, self.nu(), amplitude, self.eos, g)?.0)
            }
            Case::ShearDecay { amplitude } => shear_decay_analytic(0.0, self.nu(), amplitude, self.eos, g),
            Case::CompressibleSmooth { amplitude } => {
                let (kx, ky) = wavenumbers(&g);
                let rho0 = self.eos.rho0();
                let rho = ScalarField::from_fn(g, |x, y| rho0 * (1.0 + amplitude * (kx * x).cos() * (ky * y).cos()));
                let v = VectorField::from_fn(g, |x, y| {
                    [
                        amplitude * (kx * x).sin() * (ky * y).cos(),
                        -amplitude * (kx * x).cos() * (ky * y).sin(),
                        0.0,
                    ]
                });
                FluidState::new(0.0, v, rho, self.eos)
            }
        }
    }

    /// Oracle trajectory sampled at the `N + 1` instants of the horizon.
    pub fn reference_path(&self) -> Result<Path> {
        let mut state = self.initial_state()?;
        let dt = self.horizon.dt();
        let mut states = vec![state.clone()];
        for k in 0..self.horizon.n {
            let limit = stable_dt(&state, self.mu);
            let sub = (dt / limit).ceil().max(1.0) as usize;
            let h = dt / sub as f64;
            for _ in 0..sub {
                state = if self.eos.is_incompressible() {
                    step_incompressible(&state, h, self.mu, &self.grav)?
                } else {
                    step_compressible(&state, h, self.mu, &self.grav)?
                };
            }
            // Pin sample times to the uniform grid.
            state.t = (k + 1) as f64 * dt;
            states.push(state.clone());
        }
        Path::new(states)
    }

    /// Initial state replicated over every instant.
    pub fn frozen_path(&self) -> Result<Path> {
        let s0 = self.initial_state()?;
        let dt = self.horizon.dt();
        let states = (0..=self.horizon.n)
            .map(|k| FluidState {
                t: k as f64 * dt,
                ..s0.clone()
            })
            .collect();
        Path::new(states)
    }
}

fn wavenumbers(g: &Grid2P) -> (f64, f64) {
    (2.0 * std::f64::consts::PI / g.lx, 2.0 * std::f64::consts::PI / g.ly)
}

fn require_2pi(g: &Grid2P) -> Result<()> {
    let tp = 2.0 * std::f64::consts::PI;
    if (g.lx - tp).abs() > 1e-12 * tp || (g.ly - tp).abs() > 1e-12 * tp {
        return Err(Error::InvalidGrid(format!(
            "Taylor-Green needs a (2π)² box, got {} x {}",
            g.lx, g.ly
        )));
    }
    Ok(())
}

/// `v = a(sin x cos y, −cos x sin y, 0)e^{−2νt}` with
/// `p = ρ₀a²(cos 2x + cos 2y)/4·e^{−4νt}`.
pub fn taylor_green_analytic(t: f64, nu: f64, amplitude: f64, eos: Eos, grid: Grid2P) -> Result<(FluidState, ScalarField)> {
    require_2pi(&grid)?;
    let a = amplitude * (-2.0 * nu * t).exp();
    let v = VectorField::from_fn(grid, |x, y| [a * x.sin() * y.cos(), -a * x.cos() * y.sin(), 0.0]);
    let rho0 = eos.rho0();
    let p = ScalarField::from_fn(grid, |x, y| rho0 * a * a * ((2.0 * x).cos() + (2.0 * y).cos()) / 4.0);
    Ok((FluidState::homogeneous(t, v, eos)?, p))
}

/// `v = (a sin(ky)e^{−νk²t}, 0, 0)`, the lowest shear mode of the box.
pub fn shear_decay_analytic(t: f64, nu: f64, amplitude: f64, eos: Eos, grid: Grid2P) -> Result<FluidState> {
    let (_, ky) = wavenumbers(&grid);
    let a = amplitude * (-nu * ky * ky * t).exp();
    FluidState::homogeneous(t, VectorField::from_fn(grid, |_, y| [a * (ky * y).sin(), 0.0, 0.0]), eos)
}

/// Largest explicit step the oracle accepts for this state.
pub fn stable_dt(state: &FluidState, mu: f64) -> f64 {
    let g = state.grid();
    let h = g.dx().min(g.dy());
    let c = match state.eos {
        Eos::Incompressible { .. } => 0.0,
        eos => eos.sound_speed(state.rho.max()),
    };
    let speed = state.v.max_norm() + c;
    // Largest eigenvalue of K/ρ is below (4/3)(μ/ρ)·2/h²; Heun is stable
    // on the real axis down to −2.
    let nu = mu / state.rho.min();
    let diff_limit = DIFFUSION_SAFETY * 2.0 / ((4.0 / 3.0) * nu * 2.0 / (h * h)).max(f64::MIN_POSITIVE);
    let adv_limit = if speed > 0.0 { CFL * h / speed } else { f64::INFINITY };
    adv_limit.min(diff_limit)
}

fn check_dt(state: &FluidState, dt: f64, mu: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let limit = stable_dt(state, mu);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Unstable { dt, suggested: limit });
    }
    Ok(())
}

/// `−(v·∇)v − K(v)/ρ₀ + g − 2Ω×v` with the constant part of `g` dropped:
/// on the torus it is balanced by a hydrostatic pressure.
fn rhs_incompressible(v: &VectorField, t: f64, mu: f64, rho0: f64, grav: &Gravitation) -> VectorField {
    let grid = v.grid();
    let mut f = -&advect(v, v);
    f.axpy(-1.0 / rho0, &apply_k(v, mu));
    let mut g = grav.eval_gravity(grid, t);
    g.project_range();
    f += &g;
    f.axpy(-2.0, &grav.eval_coriolis_vector(grid, t).cross(v));
    f
}

/// One Heun step of the incompressible equations, projecting after each
/// stage.
pub fn step_incompressible(state: &FluidState, dt: f64, mu: f64, grav: &Gravitation) -> Result<FluidState> {
    if !state.eos.is_incompressible() {
        return Err(Error::Unsupported("incompressible step needs an incompressible state".into()));
    }
    check_dt(state, dt, mu)?;
    let rho0 = state.eos.rho0();
    let v0 = &state.v;
    let k1 = rhs_incompressible(v0, state.t, mu, rho0, grav);
    let mut v1 = v0.clone();
    v1.axpy(dt, &k1);
    let (v1, _) = leray_project(&v1)?;
    let k2 = rhs_incompressible(&v1, state.t + dt, mu, rho0, grav);
    let mut v2 = &(v0 + &v1) * 0.5;
    v2.axpy(0.5 * dt, &k2);
    let (v2, _) = leray_project(&v2)?;
    FluidState::homogeneous(state.t + dt, v2, state.eos)
}

/// Time derivatives of `(ρ, m = ρv)`.
fn rhs_compressible(
    rho: &ScalarField,
    m: &VectorField,
    t: f64,
    mu: f64,
    eos: &Eos,
    grav: &Gravitation,
) -> Result<(ScalarField, VectorField)> {
    let min = rho.min();
    if !(min > 0.0) {
        return Err(Error::NonPositiveDensity { min });
    }
    let grid = *rho.grid();
    let v = m.div_by(rho);
    let drho = -&div_vector(m);
    let vx = v.component(0);
    let vy = v.component(1);
    let zero = ScalarField::zeros(grid);
    let comps: [Vec<f64>; 3] = std::array::from_fn(|i| {
        let mi = m.component(i);
        div_vector(&VectorField::from_scalars(&vx.mul(&mi), &vy.mul(&mi), &zero)).into_values()
    });
    let flux = VectorField::from_components(grid, comps)?;
    let p = eos.pressure(rho).ok_or(Error::MissingPressure)?;
    let mut dm = -&flux;
    dm -= &grad_scalar(&p);
    dm -= &apply_k(&v, mu);
    dm += &grav.gravitation_force(rho, &v, t);
    Ok((drho, dm))
}

/// One Heun step of the barotropic equations in divergence form.
pub fn step_compressible(state: &FluidState, dt: f64, mu: f64, grav: &Gravitation) -> Result<FluidState> {
    if state.eos.is_incompressible() {
        return Err(Error::Unsupported("compressible step needs a barotropic state".into()));
    }
    check_dt(state, dt, mu)?;
    let eos = state.eos;
    let rho0 = &state.rho;
    let m0 = state.v.scale_by(rho0);
    let (dr1, dm1) = rhs_compressible(rho0, &m0, state.t, mu, &eos, grav)?;
    let rho1 = rho0 + &(&dr1 * dt);
    let mut m1 = m0.clone();
    m1.axpy(dt, &dm1);
    let (dr2, dm2) = rhs_compressible(&rho1, &m1, state.t + dt, mu, &eos, grav)?;
    let rho2 = &(&(rho0 + &rho1) + &(&dr2 * dt)) * 0.5;
    let mut m2 = &(&m0 + &m1) * 0.5;
    m2.axpy(0.5 * dt, &dm2);
    let min = rho2.min();
    if !(min > 0.0) {
        return Err(Error::NonPositiveDensity { min });
    }
    FluidState::new(state.t + dt, m2.div_by(&rho2), rho2, eos)
}

/// Adds `rel·rms(v_k)` of seeded noise to every free slice; solenoidal for
/// the incompressible kind.
pub fn perturb_path(path: &Path, rel: f64, seed: u64, kmax: usize) -> Result<Path> {
    let mut rng = synth::rng(seed);
    let grid = *path.grid();
    let free: Vec<VectorField> = path.states[1..]
        .iter()
        .map(|s| {
            let noise = if path.is_incompressible() {
                synth::solenoidal(grid, &mut rng, kmax)
            } else {
                synth::smooth_vector(grid, &mut rng, kmax)
            };
            let mut v = s.v.clone();
            v.axpy(rel * s.v.rms(), &noise);
            v
        })
        .collect();
    path.with_free_velocities(&free)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::inner;
    use std::f64::consts::PI;

    const INC: Eos = Eos::Incompressible { rho0: 1.0 };
    const GAS: Eos = Eos::BarotropicPower {
        p0: 1.0,
        rho0: 1.0,
        gamma: 1.4,
    };

    fn spec(case: Case, n: usize, eos: Eos, mu: f64, t_end: f64, steps: usize) -> CaseSpec {
        let grid = Grid2P::periodic_2pi(n).unwrap();
        CaseSpec::new(case, grid, eos, mu, Gravitation::Zero, Horizon { t_end, n: steps }).unwrap()
    }

    #[test]
    fn taylor_green_energy_and_decay() {
        let g = Grid2P::periodic_2pi(32).unwrap();
        let (s, _) = taylor_green_analytic(0.0, 0.1, 1.0, INC, g).unwrap();
        assert!((s.kinetic_energy() - PI * PI).abs() < 1e-12);
        let (s1, _) = taylor_green_analytic(1.0, 0.1, 1.0, INC, g).unwrap();
        assert!((s1.kinetic_energy() - PI * PI * (-0.4f64).exp()).abs() < 1e-12);
        let (s2, _) = taylor_green_analytic(3.0, 0.0, 1.0, INC, g).unwrap();
        assert_eq!(s2.v, s.v);
        let bad = Grid2P::new(16, 16, 1.0, 1.0).unwrap();
        assert!(taylor_green_analytic(0.0, 0.1, 1.0, INC, bad).is_err());
    }

    #[test]
    fn incompressible_taylor_green_matches_analytic() {
        let g = Grid2P::periodic_2pi(64).unwrap();
        let nu = 0.1;
        let mut s = taylor_green_analytic(0.0, nu, 1.0, INC, g).unwrap().0;
        let mut e_prev = s.kinetic_energy();
        for _ in 0..500 {
            s = step_incompressible(&s, 2e-3, nu, &Gravitation::Zero).unwrap();
            let e = s.kinetic_energy();
            assert!(e < e_prev);
            e_prev = e;
        }
        let (exact, _) = taylor_green_analytic(1.0, nu, 1.0, INC, g).unwrap();
        let err = (&s.v - &exact.v).norm_l2() / exact.v.norm_l2();
        assert!(err < 0.01, "relative L2 error {err}");
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let g = Grid2P::periodic_2pi(16).unwrap();
        let grav = Gravitation::RigidRotation { omega: 0.7 };
        let s = FluidState::homogeneous(0.0, VectorField::zeros(g), INC).unwrap();
        let s1 = step_incompressible(&s, 0.01, 0.1, &grav).unwrap();
        assert_eq!(s1.v.max_abs(), 0.0);
        let c = FluidState::homogeneous(0.0, VectorField::zeros(g), GAS).unwrap();
        let c1 = step_compressible(&c, 0.01, 0.1, &grav).unwrap();
        assert_eq!(c1.v.max_abs(), 0.0);
        assert_eq!(c1.rho, c.rho);
    }

    #[test]
    fn incompressible_step_conserves_momentum() {
        let g = Grid2P::periodic_2pi(16).unwrap();
        let mut v = synth::solenoidal(g, &mut synth::rng(2), 3);
        v += &VectorField::constant(g, [0.2, -0.1, 0.05]);
        let mut s = FluidState::homogeneous(0.0, v, INC).unwrap();
        let p0 = s.v.mean();
        for _ in 0..20 {
            s = step_incompressible(&s, 0.01, 0.05, &Gravitation::Zero).unwrap();
        }
        for (a, b) in s.v.mean().iter().zip(p0) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(div_vector(&s.v).max_abs() < 1e-10);
    }

    #[test]
    fn unstable_step_is_rejected() {
        let g = Grid2P::periodic_2pi(16).unwrap();
        let s = taylor_green_analytic(0.0, 0.1, 1.0, INC, g).unwrap().0;
        match step_incompressible(&s, 1.0, 0.1, &Gravitation::Zero) {
            Err(Error::Unstable { suggested, .. }) => assert!(suggested < 1.0),
            other => panic!("expected instability error, got {other:?}"),
        }
    }

    #[test]
    fn compressible_mass_is_conserved_over_many_steps() {
        let sp = spec(Case::CompressibleSmooth { amplitude: 0.01 }, 16, GAS, 0.05, 1.0, 1);
        let mut s = sp.initial_state().unwrap();
        let m0 = s.mass();
        let dt = 0.5 * stable_dt(&s, sp.mu);
        for _ in 0..1000 {
            s = step_compressible(&s, dt, sp.mu, &Gravitation::Zero).unwrap();
        }
        assert!((s.mass() - m0).abs() <= 1e-12 * m0);
    }

    /// Amplitude of the `cos x cos y` density mode.
    fn acoustic_amplitude(s: &FluidState) -> f64 {
        let g = *s.grid();
        let mode = ScalarField::from_fn(g, |x, y| x.cos() * y.cos());
        let d = &s.rho - &ScalarField::constant(g, s.rho.mean());
        crate::fields::inner_scalar(&d, &mode).unwrap() / crate::fields::inner_scalar(&mode, &mode).unwrap()
    }

    #[test]
    fn acoustic_wave_decays_only_with_viscosity() {
        let g = Grid2P::periodic_2pi(16).unwrap();
        let amp = 1e-3;
        let rho = ScalarField::from_fn(g, |x, y| 1.0 + amp * x.cos() * y.cos());
        let start = FluidState::new(0.0, VectorField::zeros(g), rho, GAS).unwrap();
        // Compare at whole periods of the standing wave.
        let c = GAS.sound_speed(1.0);
        let omega = c * (2.0 * (g.dx().sin() / g.dx()).powi(2)).sqrt();
        let period = 2.0 * PI / omega;
        let run = |mu: f64| {
            let steps = (period / (0.5 * stable_dt(&start, mu))).ceil() as usize * 3;
            let dt = 3.0 * period / steps as f64;
            let mut s = start.clone();
            for _ in 0..steps {
                s = step_compressible(&s, dt, mu, &Gravitation::Zero).unwrap();
            }
            acoustic_amplitude(&s) / amp
        };
        let viscous = run(0.05);
        let inviscid = run(0.0);
        assert!(viscous < 0.9, "viscous ratio {viscous}");
        assert!((inviscid - 1.0).abs() < 0.01, "inviscid ratio {inviscid}");
        assert!(inviscid > viscous);
    }

    #[test]
    fn reference_path_is_uniform_and_divergence_free() {
        let sp = spec(Case::TaylorGreen { amplitude: 1.0 }, 16, INC, 0.1, 1.0, 8);
        let p = sp.reference_path().unwrap();
        assert_eq!(p.states.len(), 9);
        assert!((p.dt() - 0.125).abs() < 1e-15);
        assert!(p.max_divergence() < 1e-10);
        // Central differences decay the mode at the rate 2ν(sin h/h)².
        let h = p.grid().dx();
        let nu_h = 0.1 * (h.sin() / h).powi(2);
        let (exact, _) = taylor_green_analytic(1.0, nu_h, 1.0, INC, *p.grid()).unwrap();
        let last = &p.states[8].v;
        let err = (last - &exact.v).norm_l2() / exact.v.norm_l2();
        assert!(err < 1e-3, "relative error {err}");
        assert!(inner(last, last).unwrap() < inner(&p.states[0].v, &p.states[0].v).unwrap());
    }

    #[test]
    fn shear_mode_decays_at_the_viscous_rate() {
        let sp = spec(Case::ShearDecay { amplitude: 1.0 }, 32, INC, 0.2, 1.0, 20);
        let p = sp.reference_path().unwrap();
        let h = sp.grid.dy();
        let exact = shear_decay_analytic(1.0, 0.2 * (h.sin() / h).powi(2), 1.0, INC, sp.grid).unwrap();
        let err = (&p.states[20].v - &exact.v).max_abs();
        assert!(err < 1e-4, "shear error {err}");
    }

    #[test]
    fn rotating_case_sets_its_preset() {
        let grid = Grid2P::periodic_2pi(16).unwrap();
        let h = Horizon { t_end: 1.0, n: 4 };
        let sp = CaseSpec::new(Case::RigidRotation { omega: 0.5, amplitude: 1.0 }, grid, INC, 0.1, Gravitation::Zero, h)
            .unwrap();
        assert_eq!(sp.grav, Gravitation::RigidRotation { omega: 0.5 });
        assert!(CaseSpec::new(
            Case::RigidRotation { omega: 0.5, amplitude: 1.0 },
            grid,
            INC,
            0.1,
            Gravitation::UniformGravity { g0: 1.0 },
            h
        )
        .is_err());
        assert!(CaseSpec::new(Case::TaylorGreen { amplitude: 1.0 }, grid, GAS, 0.1, Gravitation::Zero, h).is_err());
    }
}
