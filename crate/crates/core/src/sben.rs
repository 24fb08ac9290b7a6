//! Space-time assembly of the functional `Π`, its adjoint gradient and the
//! path minimizer.
//!
//! A [`Path`] samples the flow at `N + 1` equally spaced instants. Each
//! interval contributes `dt·[φ(v̄) + φ*(f) + ⟨s, v̄⟩]` where `v̄` is the
//! midpoint velocity, `s = ρ̄ Dv/Dt + ∇p̄ − ρ̄g` and `f = −s − 2ρ̄ Ω×v̄` with
//! its non-range part removed. For the incompressible kind `p̄` is absent
//! and `f` is also Leray projected, which eliminates pressure from the
//! functional; the pressure is recovered afterwards as the potential of the
//! gradient part of the constitutive residual.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance::{midpoint_pressure, FluidState, Midpoint, Momentum};
use crate::dissipation::{apply_k, conjugate, phi, ConjugateSolve};
use crate::error::{Error, Result};
use crate::fields::{div_vector, grad_scalar, inner, Grid2P, ScalarField, VectorField};
use crate::gravitation::Gravitation;
use crate::krylov;
use crate::symplectic::{decompose, DEFAULT_V_TOL};

/// Relative residual of the Poisson solve inside [`leray_project`].
pub const LERAY_TOL: f64 = 1e-12;
const LERAY_MAX_ITER: usize = 20_000;

/// Velocity history on uniformly spaced instants; `states[0]` is pinned.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub states: Vec<FluidState>,
    /// Recovered pressure per interval (incompressible kind only).
    pub pressures: Option<Vec<ScalarField>>,
}

impl Path {
    pub fn new(states: Vec<FluidState>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidParameter("a path needs at least two states".into()));
        }
        let first = &states[0];
        let dt = states[1].t - first.t;
        if !(dt > 0.0) {
            return Err(Error::NonPositiveDt(dt));
        }
        for (k, s) in states.iter().enumerate() {
            first.grid().check_same(s.grid())?;
            if s.eos != first.eos {
                return Err(Error::InvalidParameter(format!("state {k} has a different equation of state")));
            }
            let want = first.t + k as f64 * dt;
            if (s.t - want).abs() > 1e-9 * dt.max(want.abs()) {
                return Err(Error::InvalidParameter(format!(
                    "time samples must be uniform: t[{k}] = {}, expected {want}",
                    s.t
                )));
            }
        }
        Ok(Self { states, pressures: None })
    }

    pub fn with_pressures(mut self, pressures: Vec<ScalarField>) -> Result<Self> {
        if pressures.len() != self.n_intervals() {
            return Err(Error::InvalidParameter(format!(
                "expected {} interval pressures, got {}",
                self.n_intervals(),
                pressures.len()
            )));
        }
        for p in &pressures {
            self.grid().check_same(p.grid())?;
        }
        self.pressures = Some(pressures);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid2P {
        self.states[0].grid()
    }

    pub fn n_intervals(&self) -> usize {
        self.states.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.states[1].t - self.states[0].t
    }

    pub fn is_incompressible(&self) -> bool {
        self.states[0].eos.is_incompressible()
    }

    pub fn velocities(&self) -> Vec<&VectorField> {
        self.states.iter().map(|s| &s.v).collect()
    }

    /// Same instants and densities with new free velocities `v_1..v_N`.
    pub fn with_free_velocities(&self, free: &[VectorField]) -> Result<Path> {
        if free.len() != self.n_intervals() {
            return Err(Error::InvalidParameter(format!(
                "expected {} free slices, got {}",
                self.n_intervals(),
                free.len()
            )));
        }
        let mut states = self.states.clone();
        for (s, v) in states[1..].iter_mut().zip(free) {
            s.v.grid().check_same(v.grid())?;
            s.v = v.clone();
        }
        Ok(Path { states, pressures: None })
    }

    /// Largest `‖∇·v_k‖∞` over the slices.
    pub fn max_divergence(&self) -> f64 {
        self.states.iter().map(|s| div_vector(&s.v).max_abs()).fold(0.0, f64::max)
    }

    pub fn max_velocity(&self) -> f64 {
        self.states.iter().map(|s| s.v.max_norm()).fold(0.0, f64::max)
    }
}

/// `v = v_df + ∇q` with `∇·v_df = 0`; `q` has zero mean.
pub fn leray_project(v: &VectorField) -> Result<(VectorField, ScalarField)> {
    let grid = *v.grid();
    let mut rhs = div_vector(v);
    rhs.project_range();
    // −Δq = −∇·v with Δ = ∇·∇ on the same stencils, so ∇·(v − ∇q) = 0.
    let b: Vec<f64> = rhs.values().iter().map(|x| -x).collect();
    let (q, _) = krylov::cg(
        "pressure Poisson solve",
        |x: &[f64]| {
            let s = ScalarField::from_vec(grid, x.to_vec()).expect("grid-sized");
            div_vector(&grad_scalar(&s)).into_values().into_iter().map(|y| -y).collect()
        },
        &b,
        LERAY_TOL,
        LERAY_MAX_ITER,
    )?;
    let mut q = ScalarField::from_vec(grid, q).expect("grid-sized");
    q.project_range();
    let v_df = v - &grad_scalar(&q);
    Ok((v_df, q))
}

/// Projection onto the free subspace of a slice: Leray projection for the
/// incompressible kind, then removal of the constant and checkerboard modes.
fn project_free(v: &VectorField, incompressible: bool) -> Result<VectorField> {
    let mut w = if incompressible { leray_project(v)?.0 } else { v.clone() };
    w.project_range();
    Ok(w)
}

/// Relative L2 distance `(Σ‖a_k − b_k‖²)^½ / (Σ‖b_k‖²)^½` over all slices.
pub fn relative_l2_distance(a: &Path, b: &Path) -> Result<f64> {
    if a.states.len() != b.states.len() {
        return Err(Error::InvalidParameter("paths have different lengths".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.states.iter().zip(&b.states) {
        let d = &x.v - &y.v;
        num += inner(&d, &d)?;
        den += inner(&y.v, &y.v)?;
    }
    Ok((num / den.max(f64::MIN_POSITIVE)).sqrt())
}

/// Recomputes `ρ_1..ρ_N` from `ρ_0` and the velocities through the midpoint
/// mass balance `(ρ_{k+1} − ρ_k)/dt + ∇·(½(ρ_k + ρ_{k+1}) v̄) = 0`.
pub fn slave_density(path: &Path) -> Result<Path> {
    let dt = path.dt();
    let mut states = path.states.clone();
    for k in 0..path.n_intervals() {
        let vbar = &(&states[k].v + &states[k + 1].v) * 0.5;
        let rho_k = states[k].rho.clone();
        let scale = rho_k.max_abs();
        let mut next = rho_k.clone();
        let mut converged = false;
        let mut change = f64::INFINITY;
        for _ in 0..500 {
            let rbar = &(&rho_k + &next) * 0.5;
            let cand = &rho_k - &(&div_vector(&vbar.scale_by(&rbar)) * dt);
            change = (&cand - &next).max_abs();
            next = cand;
            if change <= 1e-14 * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NotConverged {
                what: "density fixed point",
                iterations: 500,
                residual: change / scale,
            });
        }
        let s = &states[k + 1];
        states[k + 1] = FluidState::new(s.t, s.v.clone(), next, s.eos)?;
    }
    Ok(Path { states, pressures: None })
}

/// Terms of one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalTerms {
    pub t_mid: f64,
    pub phi: f64,
    pub phi_star: f64,
    pub pairing: f64,
    /// `phi + phi_star + pairing`.
    pub gap: f64,
    /// Norm of the part of `f` removed before conjugation.
    pub projected_out: f64,
    /// `‖ρ̄ Dv/Dt + ∇p − ρ̄(g − 2Ω×v̄) + K(v̄)‖∞`, pressure recovered for the
    /// incompressible kind.
    pub ns_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbenReport {
    pub kind: String,
    pub intervals: Vec<IntervalTerms>,
    /// `Σ dt·gap`.
    pub total: f64,
    /// `Σ dt·φ(v̄)`, the scale relative tolerances refer to.
    pub phi_scale: f64,
    pub iterations: usize,
    pub pi_history: Vec<f64>,
    pub grad_norm_history: Vec<f64>,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopReason>,
}

impl SbenReport {
    pub fn max_ns_residual(&self) -> f64 {
        self.intervals.iter().map(|i| i.ns_residual).fold(0.0, f64::max)
    }

    pub fn min_gap(&self) -> f64 {
        self.intervals.iter().map(|i| i.gap).fold(f64::INFINITY, f64::min)
    }
}

/// Everything one interval needs for the value and the gradient.
struct IntervalEval {
    terms: IntervalTerms,
    mid: Midpoint,
    /// `K⁺ f`, the maximiser of the conjugate.
    y: VectorField,
    /// `ρ̄(a + (v̄·∇)v̄) + ∇p̄ − ρ̄g`.
    s: VectorField,
    /// Gradient part of `f_raw − K v̄` (incompressible kind).
    pressure: Option<ScalarField>,
}

fn eval_interval(
    prev: &FluidState,
    next: &FluidState,
    mu: f64,
    grav: &Gravitation,
    cfg: &ConjugateSolve,
) -> Result<IntervalEval> {
    let incompressible = prev.eos.is_incompressible();
    let mid = Midpoint::new(prev, next)?;
    let grid = *prev.grid();

    let mut s = mid.material_derivative().scale_by(&mid.rho);
    s -= &grav.eval_gravity(&grid, mid.t).scale_by(&mid.rho);
    if !incompressible {
        s += &grad_scalar(&midpoint_pressure(prev, next, None)?);
        let zi = decompose(
            prev,
            next,
            &Momentum::from_state(prev, grav),
            &Momentum::from_state(next, grav),
            grav,
            None,
        )?;
        let limit = DEFAULT_V_TOL * zi.v_scale.max(f64::MIN_POSITIVE);
        if zi.v_i.max_norm() > limit {
            return Err(Error::InfinitePolar {
                v_i_norm: zi.v_i.max_norm(),
                limit,
            });
        }
    }
    let coriolis = grav.eval_coriolis_vector(&grid, mid.t);
    let mut f_raw = -&s;
    f_raw.axpy(-2.0, &coriolis.cross(&mid.v).scale_by(&mid.rho));

    let f = project_free(&f_raw, incompressible)?;
    let projected_out = (&f_raw - &f).norm_l2();
    let c = conjugate(&f, mu, cfg)?;
    let phi_v = phi(&mid.v, mu);
    let pairing = inner(&s, &mid.v)?;

    let kv = apply_k(&mid.v, mu);
    let (ns, pressure) = if incompressible {
        let (_, q) = leray_project(&(&f_raw - &kv))?;
        ((&f - &kv).max_norm(), Some(q))
    } else {
        ((&f_raw - &kv).max_norm(), None)
    };

    Ok(IntervalEval {
        terms: IntervalTerms {
            t_mid: mid.t,
            phi: phi_v,
            phi_star: c.value,
            pairing,
            gap: phi_v + c.value + pairing,
            projected_out,
            ns_residual: ns,
        },
        mid,
        y: c.maximiser,
        s,
        pressure,
    })
}

fn eval_all(path: &Path, mu: f64, grav: &Gravitation, cfg: &ConjugateSolve) -> Result<Vec<IntervalEval>> {
    (0..path.n_intervals())
        .into_par_iter()
        .map(|k| eval_interval(&path.states[k], &path.states[k + 1], mu, grav, cfg))
        .collect()
}

fn report_from(kind: &str, path: &Path, evals: &[IntervalEval], started: Instant) -> SbenReport {
    let dt = path.dt();
    let intervals: Vec<IntervalTerms> = evals.iter().map(|e| e.terms).collect();
    SbenReport {
        kind: kind.to_string(),
        total: intervals.iter().map(|t| dt * t.gap).sum(),
        phi_scale: intervals.iter().map(|t| dt * t.phi).sum(),
        intervals,
        iterations: 0,
        pi_history: Vec::new(),
        grad_norm_history: Vec::new(),
        wall_time_s: started.elapsed().as_secs_f64(),
        stop: None,
    }
}

fn kind_name(path: &Path) -> &'static str {
    if path.is_incompressible() {
        "incompressible"
    } else {
        "compressible"
    }
}

/// `Π` for a constant-density, divergence-free path.
pub fn assemble_pi_incompressible(
    path: &Path,
    mu: f64,
    grav: &Gravitation,
    cfg: &ConjugateSolve,
) -> Result<SbenReport> {
    if !path.is_incompressible() {
        return Err(Error::Unsupported("incompressible assembly needs an incompressible equation of state".into()));
    }
    let started = Instant::now();
    let evals = eval_all(path, mu, grav, cfg)?;
    Ok(report_from("incompressible", path, &evals, started))
}

/// `Π` for a barotropic path whose density obeys the mass balance.
pub fn assemble_pi_compressible(
    path: &Path,
    mu: f64,
    grav: &Gravitation,
    cfg: &ConjugateSolve,
) -> Result<SbenReport> {
    if path.is_incompressible() {
        return Err(Error::Unsupported("compressible assembly needs a barotropic equation of state".into()));
    }
    let started = Instant::now();
    let evals = eval_all(path, mu, grav, cfg)?;
    Ok(report_from("compressible", path, &evals, started))
}

/// Dispatches on the equation of state of the path.
pub fn assemble_pi(path: &Path, mu: f64, grav: &Gravitation, cfg: &ConjugateSolve) -> Result<SbenReport> {
    if path.is_incompressible() {
        assemble_pi_incompressible(path, mu, grav, cfg)
    } else {
        assemble_pi_compressible(path, mu, grav, cfg)
    }
}

/// Per-interval pressure, the Lagrange multiplier of `∇·v = 0`.
pub fn recover_pressures(path: &Path, mu: f64, grav: &Gravitation, cfg: &ConjugateSolve) -> Result<Vec<ScalarField>> {
    if !path.is_incompressible() {
        return Err(Error::Unsupported("pressure recovery applies to the incompressible kind".into()));
    }
    Ok(eval_all(path, mu, grav, cfg)?
        .into_iter()
        .map(|e| e.pressure.expect("incompressible interval has a pressure"))
        .collect())
}

/// Head loss of one interval: the density `(ρ̄ Dv/Dt + ∇p̄ − ρ̄g)·v̄` and
/// its integral.
#[derive(Debug, Clone)]
pub struct HeadLoss {
    pub density: ScalarField,
    pub total: f64,
}

pub fn head_loss(
    prev: &FluidState,
    next: &FluidState,
    grav: &Gravitation,
    pressure: Option<&ScalarField>,
) -> Result<HeadLoss> {
    let mid = Midpoint::new(prev, next)?;
    let p = midpoint_pressure(prev, next, pressure)?;
    let mut s = mid.material_derivative().scale_by(&mid.rho);
    s += &grad_scalar(&p);
    s -= &grav.eval_gravity(prev.grid(), mid.t).scale_by(&mid.rho);
    let total = inner(&s, &mid.v)?;
    Ok(HeadLoss {
        density: s.dot(&mid.v),
        total,
    })
}

/// `Lᵀz` for `L δ = (δ·∇)v̄ + (v̄·∇)δ`:
/// component `i` is `Σ_j z_j ∂_i v̄_j − Σ_j ∂_j(v̄_j z_i)`.
fn advection_adjoint(vbar: &VectorField, z: &VectorField) -> VectorField {
    let grid = *vbar.grid();
    let vx = vbar.component(0);
    let vy = vbar.component(1);
    let comps: [Vec<f64>; 3] = std::array::from_fn(|i| {
        let zi = z.component(i);
        let flux = VectorField::from_scalars(&vx.mul(&zi), &vy.mul(&zi), &ScalarField::zeros(grid));
        let transport = div_vector(&flux);
        let mut out = vec![0.0; grid.len()];
        if i < 2 {
            let di = |s: &ScalarField| grad_scalar(s).component(i);
            for j in 0..3 {
                let dv = di(&vbar.component(j));
                for (o, (a, b)) in out.iter_mut().zip(z.comp(j).iter().zip(dv.values())) {
                    *o += a * b;
                }
            }
        }
        for (o, t) in out.iter_mut().zip(transport.values()) {
            *o -= t;
        }
        out
    });
    VectorField::from_components(grid, comps).expect("grid-sized components")
}

/// Value and projected gradient of `Π` with respect to `v_1..v_N`.
#[derive(Debug, Clone)]
pub struct PathGradient {
    pub value: f64,
    pub phi_scale: f64,
    pub slices: Vec<VectorField>,
}

/// Exact gradient of the discrete `Π` in the grid inner product, projected
/// onto the free subspace of each slice. Density and pressure are held
/// fixed for the compressible kind.
pub fn gradient_pi(path: &Path, mu: f64, grav: &Gravitation, cfg: &ConjugateSolve) -> Result<PathGradient> {
    let (value, phi_scale, slices, _) = value_and_gradient(path, mu, grav, cfg)?;
    Ok(PathGradient { value, phi_scale, slices })
}

fn value_and_gradient(
    path: &Path,
    mu: f64,
    grav: &Gravitation,
    cfg: &ConjugateSolve,
) -> Result<(f64, f64, Vec<VectorField>, Vec<IntervalEval>)> {
    let incompressible = path.is_incompressible();
    let grid = *path.grid();
    let dt = path.dt();
    let evals = eval_all(path, mu, grav, cfg)?;

    let parts: Vec<(VectorField, VectorField)> = evals
        .par_iter()
        .map(|e| {
            let m = &e.mid;
            let z = (&m.v - &e.y).scale_by(&m.rho);
            let mut g_v = apply_k(&m.v, mu);
            g_v += &advection_adjoint(&m.v, &z);
            let omega = grav.eval_coriolis_vector(&grid, m.t);
            g_v.axpy(2.0, &omega.cross(&e.y).scale_by(&m.rho));
            g_v += &e.s;
            (z, g_v)
        })
        .collect();

    let mut raw = vec![VectorField::zeros(grid); path.n_intervals() + 1];
    for (k, (g_a, g_v)) in parts.iter().enumerate() {
        raw[k + 1].axpy(0.5 * dt, g_v);
        raw[k + 1] += g_a;
        raw[k].axpy(0.5 * dt, g_v);
        raw[k] -= g_a;
    }
    let slices = raw[1..]
        .par_iter()
        .map(|g| project_free(g, incompressible))
        .collect::<Result<Vec<_>>>()?;

    let value = evals.iter().map(|e| dt * e.terms.gap).sum();
    let phi_scale = evals.iter().map(|e| dt * e.terms.phi).sum();
    Ok((value, phi_scale, slices, evals))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizerConfig {
    pub max_iter: usize,
    /// Stop once `Π ≤ tol_pi·Σ dt φ(v̄)` of the starting path.
    pub tol_pi: f64,
    /// Stop once `‖∇Π‖ ≤ tol_g·‖∇Π₀‖`.
    pub tol_g: f64,
    pub restart: usize,
    pub armijo: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol_pi: 1e-8,
            tol_g: 1e-6,
            restart: 20,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    PiTolerance,
    GradientTolerance,
    MaxIterations,
    LineSearchFailure,
}

#[derive(Debug, Clone)]
pub struct Minimized {
    pub path: Path,
    pub report: SbenReport,
    pub stop: StopReason,
}

fn dot_slices(a: &[VectorField], b: &[VectorField]) -> f64 {
    a.iter().zip(b).map(|(x, y)| inner(x, y).expect("slices share the grid")).sum()
}

fn step(x: &[VectorField], d: &[VectorField], alpha: f64) -> Vec<VectorField> {
    x.iter()
        .zip(d)
        .map(|(xi, di)| {
            let mut out = xi.clone();
            out.axpy(alpha, di);
            out
        })
        .collect()
}

/// Nonlinear conjugate gradients (Polak-Ribière+, periodic restarts) with a
/// backtracking Armijo line search on the free subspace. `Π` never increases
/// across accepted steps.
pub fn minimize(
    path0: &Path,
    mu: f64,
    grav: &Gravitation,
    cfg: &ConjugateSolve,
    mcfg: &MinimizerConfig,
) -> Result<Minimized> {
    let started = Instant::now();
    let incompressible = path0.is_incompressible();
    if incompressible {
        let div = path0.max_divergence();
        let scale = path0.max_velocity().max(1.0) / path0.grid().h();
        if div > 1e-8 * scale {
            return Err(Error::InvalidParameter(format!(
                "starting path is not divergence-free (max |div v| = {div:.3e})"
            )));
        }
    }
    let prepare = |p: Path| -> Result<Path> {
        if incompressible {
            Ok(p)
        } else {
            slave_density(&p)
        }
    };

    let mut path = prepare(path0.clone())?;
    let (mut value, phi_scale, mut g, _) = value_and_gradient(&path, mu, grav, cfg)?;
    let tol_pi = mcfg.tol_pi * phi_scale;
    let g0 = dot_slices(&g, &g).sqrt();
    let mut pi_history = vec![value];
    let mut grad_history = vec![g0];
    let mut d: Vec<VectorField> = g.iter().map(|x| -x).collect();
    let mut alpha_prev: Option<f64> = None;
    let mut iterations = 0;

    let stop = loop {
        let gnorm = *grad_history.last().expect("nonempty");
        if value <= tol_pi {
            break StopReason::PiTolerance;
        }
        if gnorm <= mcfg.tol_g * g0 || gnorm == 0.0 {
            break StopReason::GradientTolerance;
        }
        if iterations >= mcfg.max_iter {
            break StopReason::MaxIterations;
        }

        let mut slope = dot_slices(&g, &d);
        if slope >= 0.0 {
            d = g.iter().map(|x| -x).collect();
            slope = -gnorm * gnorm;
        }
        let free: Vec<VectorField> = path.states[1..].iter().map(|s| s.v.clone()).collect();
        let trial = |alpha: f64| -> Result<(Path, f64)> {
            let p = prepare(path.with_free_velocities(&step(&free, &d, alpha))?)?;
            let r = assemble_pi(&p, mu, grav, cfg)?;
            Ok((p, r.total))
        };

        // First trial from the previous step or a Newton-like guess, then a
        // parabola through Π(0), the slope and Π(α₀).
        let mut alpha = alpha_prev.map_or(value / -slope, |a| 2.0 * a);
        let mut accepted: Option<(Path, f64, f64)> = None;
        let (p0, v0) = trial(alpha)?;
        let curv = v0 - value - slope * alpha;
        if curv > 0.0 {
            let a_q = -slope * alpha * alpha / (2.0 * curv);
            if a_q.is_finite() && a_q > 0.0 {
                let (pq, vq) = trial(a_q)?;
                if vq <= value + mcfg.armijo * a_q * slope && vq <= v0 {
                    accepted = Some((pq, vq, a_q));
                }
            }
        }
        if accepted.is_none() && v0 <= value + mcfg.armijo * alpha * slope {
            accepted = Some((p0, v0, alpha));
        }
        let mut backtracks = 0;
        while accepted.is_none() && backtracks < mcfg.max_backtracks {
            alpha *= mcfg.shrink;
            backtracks += 1;
            let (p, v) = trial(alpha)?;
            if v <= value + mcfg.armijo * alpha * slope {
                accepted = Some((p, v, alpha));
            }
        }
        let Some((p_new, _, a)) = accepted else {
            break StopReason::LineSearchFailure;
        };

        path = p_new;
        alpha_prev = Some(a);
        iterations += 1;
        let (v_new, _, g_new, _) = value_and_gradient(&path, mu, grav, cfg)?;
        value = v_new;
        let gg_old = dot_slices(&g, &g);
        let y: Vec<VectorField> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let beta = if iterations % mcfg.restart == 0 {
            0.0
        } else {
            (dot_slices(&g_new, &y) / gg_old).max(0.0)
        };
        d = g_new
            .iter()
            .zip(&d)
            .map(|(gi, di)| {
                let mut out = -gi;
                out.axpy(beta, di);
                out
            })
            .collect();
        g = g_new;
        pi_history.push(value);
        grad_history.push(dot_slices(&g, &g).sqrt());
    };

    let evals = eval_all(&path, mu, grav, cfg)?;
    let mut report = report_from(kind_name(&path), &path, &evals, started);
    report.iterations = iterations;
    report.pi_history = pi_history;
    report.grad_norm_history = grad_history;
    report.stop = Some(stop);
    if incompressible {
        let pressures = evals.into_iter().map(|e| e.pressure.expect("incompressible")).collect();
        path = path.with_pressures(pressures)?;
    }
    Ok(Minimized { path, report, stop })
}
