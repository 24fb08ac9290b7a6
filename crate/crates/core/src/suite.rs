//! Invariant suite behind the `check` command.

use serde::Serialize;

use crate::balance::{appendix_b_gap, Eos, FluidState};
use crate::config::RunConfig;
use crate::dissipation::{apply_k, conjugate, fenchel_gap, phi, sigma_i};
use crate::error::Result;
use crate::fields::{div_vector, grad_scalar, inner, inner_scalar, sym_grad, Grid2P, ScalarField, VectorField};
use crate::gravitation::Gravitation;
use crate::sben::{assemble_pi, leray_project};
use crate::symplectic::{omega, PhasePoint};
use crate::synth::{self, SeededRng};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            pass: value <= limit,
        }
    }

    fn at_least(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            pass: value >= limit,
        }
    }
}

const DRAWS: usize = 10;

fn vec_field(g: Grid2P, r: &mut SeededRng) -> VectorField {
    synth::smooth_vector(g, r, 4)
}

/// Manufactured compressible pair for the momentum-equivalence identity.
fn manufactured_pair(n: usize) -> Result<(FluidState, FluidState)> {
    let g = Grid2P::periodic_2pi(n)?;
    let eos = Eos::BarotropicPower {
        p0: 1.0,
        rho0: 1.0,
        gamma: 1.4,
    };
    let state = |t: f64| -> Result<FluidState> {
        let rho = ScalarField::from_fn(g, |x, y| 1.0 + 0.2 * (x + t).sin() * y.cos());
        let v = VectorField::from_fn(g, |x, y| {
            [
                (y - t).sin() + 0.3 * x.cos(),
                0.5 * (x + 2.0 * y).cos() * (1.0 + t),
                0.2 * (x - y).sin(),
            ]
        });
        FluidState::new(t, v, rho, eos)
    };
    Ok((state(0.0)?, state(0.01)?))
}

pub fn appendix_b_residual(n: usize, grav: &Gravitation) -> Result<f64> {
    let (a, b) = manufactured_pair(n)?;
    Ok(appendix_b_gap(&a, &b, grav, None)?.max_abs())
}

/// Runs every check on the configured grid with seeded random fields.
pub fn run_suite(cfg: &RunConfig) -> Result<Vec<Check>> {
    let g = cfg.grid;
    let mu = cfg.mu;
    let cj = &cfg.conjugate;
    let mut r = synth::rng(cfg.seed);
    let mut out = Vec::new();

    let mut adj: f64 = 0.0;
    let mut sym: f64 = 0.0;
    let mut energy: f64 = 0.0;
    let mut trace: f64 = 0.0;
    for _ in 0..DRAWS {
        let s = synth::smooth_scalar(g, &mut r, 4);
        let u = vec_field(g, &mut r);
        let w = vec_field(g, &mut r);
        let scale = u.norm_l2() * s.norm_l2() / g.h();
        adj = adj.max((inner(&grad_scalar(&s), &u)? + inner_scalar(&s, &div_vector(&u))?).abs() / scale);
        let ku = apply_k(&u, mu);
        let kw = apply_k(&w, mu);
        sym = sym.max((inner(&ku, &w)? - inner(&u, &kw)?).abs() / (ku.norm_l2() * w.norm_l2()));
        let e = 2.0 * phi(&u, mu);
        energy = energy.max((inner(&ku, &u)? - e).abs() / e);
        let st = sigma_i(&sym_grad(&u), mu);
        trace = trace.max(st.trace().max_abs() / st.max_abs());
    }
    out.push(Check::at_most("grad/div adjointness", adj, 1e-12));
    out.push(Check::at_most("K symmetry", sym, 1e-12));
    out.push(Check::at_most("<Kv, v> = 2 phi(v)", energy, 1e-12));
    out.push(Check::at_most("trace of viscous stress", trace, 1e-14));

    let mut min_gap = f64::INFINITY;
    let mut eq_gap: f64 = 0.0;
    let mut conj: f64 = 0.0;
    let mut formulas: f64 = 0.0;
    for _ in 0..DRAWS {
        let v = vec_field(g, &mut r);
        let f = vec_field(g, &mut r);
        let c = conjugate(&f, mu, cj)?;
        let scale = phi(&v, mu) + c.value + 1.0;
        min_gap = min_gap.min(fenchel_gap(&v, &f, mu, cj)? / scale);
        let pv = phi(&v, mu);
        eq_gap = eq_gap.max(fenchel_gap(&v, &apply_k(&v, mu), mu, cj)?.abs() / (pv + 1.0));
        let ck = conjugate(&apply_k(&v, mu), mu, cj)?;
        conj = conj.max((ck.value - pv).abs() / pv);
        formulas = formulas.max((c.via_phi - c.via_pairing).abs() / c.value);
    }
    out.push(Check::at_least("Fenchel gap >= 0", min_gap, -1e-12));
    out.push(Check::at_most("Fenchel equality on K(v)", eq_gap, 1e-8));
    out.push(Check::at_most("phi*(K v) = phi(v)", conj, 1e-8));
    out.push(Check::at_most("conjugate formulas agree", formulas, 1e-10));

    let mut anti: f64 = 0.0;
    let mut bilin: f64 = 0.0;
    let mut coriolis: f64 = 0.0;
    let rot = Gravitation::RigidRotation { omega: 0.7 };
    for _ in 0..DRAWS {
        let z1 = PhasePoint::new(vec_field(g, &mut r), vec_field(g, &mut r))?;
        let z2 = PhasePoint::new(vec_field(g, &mut r), vec_field(g, &mut r))?;
        let zp = PhasePoint::new(vec_field(g, &mut r), vec_field(g, &mut r))?;
        let scale = z1.v.norm_l2() * zp.pidot.norm_l2() + z1.pidot.norm_l2() * zp.v.norm_l2();
        anti = anti.max((omega(&z1, &zp)? + omega(&zp, &z1)?).abs() / scale);
        let a = 1.7;
        let lhs = omega(&z1.scaled(a).add(&z2), &zp)?;
        bilin = bilin.max((lhs - a * omega(&z1, &zp)? - omega(&z2, &zp)?).abs() / scale);
        let v = vec_field(g, &mut r);
        let power = rot.eval_coriolis_vector(&g, 0.0).cross(&v).dot(&v);
        coriolis = coriolis.max(power.max_abs() / (v.max_norm().powi(2) * 0.7));
    }
    out.push(Check::at_most("omega antisymmetry", anti, 1e-12));
    out.push(Check::at_most("omega bilinearity", bilin, 1e-12));
    out.push(Check::at_most("Coriolis power density", coriolis, 1e-12));

    let v = vec_field(g, &mut r);
    let (w, _) = leray_project(&v)?;
    let (w2, _) = leray_project(&w)?;
    out.push(Check::at_most("Leray divergence", div_vector(&w).max_abs() / v.max_abs(), 1e-10));
    out.push(Check::at_most("Leray idempotence", (&w2 - &w).max_abs() / v.max_abs(), 1e-10));

    let n = g.nx.min(g.ny).max(32);
    let e1 = appendix_b_residual(n, &rot)?;
    let e2 = appendix_b_residual(2 * n, &rot)?;
    out.push(Check::at_least("momentum equivalence order", (e1 / e2).log2(), 1.8));

    let spec = cfg.case_spec()?;
    let path = spec.reference_path()?;
    let rep = assemble_pi(&path, mu, &spec.grav, cj)?;
    out.push(Check::at_least(
        "interval gaps >= 0",
        rep.min_gap() / (rep.phi_scale / spec.horizon.t_end),
        -1e-10,
    ));
    out.push(Check::at_most("Pi on reference path / phi scale", rep.total / rep.phi_scale, 1e-3));
    Ok(out)
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
