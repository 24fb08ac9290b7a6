//! Quadratic viscous dissipation and its convex conjugate.
//!
//! The dissipation density is `W(D) = μ[Tr(D²) − ⅓(Tr D)²]`, whose gradient
//! is the traceless viscous stress `σ_I = 2μ(D − ⅓ Tr(D) I)`. The operator
//! `K(v) = −∇·σ_I(∇_s v)` is symmetric positive semi-definite on the torus;
//! its null space is the null space of the central difference (constants and
//! checkerboards), so conjugates are computed on the orthogonal complement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{div_tensor, inner, integrate, sym, sym_grad, ScalarField, SymTensorField, VectorField};
use crate::krylov;

/// Null-space content tolerated in a right-hand side, relative to its norm.
pub const RANGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viscosity {
    pub mu: f64,
}

impl Viscosity {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("viscosity must be > 0, got {mu}")));
        }
        Ok(Self { mu })
    }
}

/// Settings of the iterative inverse of `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConjugateSolve {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ConjugateSolve {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

pub fn w_density(d: &SymTensorField, mu: f64) -> ScalarField {
    let tr = d.trace();
    let tr2 = d.contract(d);
    tr2.zip_map(&tr, |a, t| mu * (a - t * t / 3.0))
}

/// `σ_I = 2μ(D − ⅓ Tr(D) I)`.
pub fn sigma_i(d: &SymTensorField, mu: f64) -> SymTensorField {
    let tr = d.trace();
    let mut s = d.scaled(2.0 * mu);
    for slot in [sym::XX, sym::YY, sym::ZZ] {
        for (v, t) in s.slot_mut(slot).iter_mut().zip(tr.values()) {
            *v -= 2.0 * mu * t / 3.0;
        }
    }
    s
}

/// `φ(v) = ∫ W(∇_s v)`.
pub fn phi(v: &VectorField, mu: f64) -> f64 {
    integrate(&w_density(&sym_grad(v), mu))
}

/// `K(v) = −∇·σ_I(∇_s v)`.
pub fn apply_k(v: &VectorField, mu: f64) -> VectorField {
    -&div_tensor(&sigma_i(&sym_grad(v), mu))
}

/// Zero-mean (null-space free) `v` with `K(v) = f`.
pub fn solve_k(f: &VectorField, mu: f64, cfg: &ConjugateSolve) -> Result<VectorField> {
    let mut rhs = f.clone();
    let removed = rhs.project_range();
    let norm = f.norm_l2();
    if removed > RANGE_TOL * norm && removed > f64::EPSILON {
        return Err(Error::OutsideRange {
            null_norm: removed,
            norm,
        });
    }
    let grid = *f.grid();
    let (x, _) = krylov::cg(
        "conjugate solve",
        |x: &[f64]| apply_k(&VectorField::from_flat(grid, x), mu).to_flat(),
        &rhs.to_flat(),
        cfg.tol,
        cfg.max_iter,
    )?;
    let mut v = VectorField::from_flat(grid, &x);
    v.project_range();
    Ok(v)
}

/// Value of the conjugate together with the two closed forms it must match.
#[derive(Debug, Clone)]
pub struct Conjugate {
    /// `⟨f, w⟩ − φ(w)` at the maximiser `w = K⁻¹f` (sup formula).
    pub value: f64,
    /// `φ(K⁻¹f)`.
    pub via_phi: f64,
    /// `½⟨f, K⁻¹f⟩`.
    pub via_pairing: f64,
    pub maximiser: VectorField,
}

pub fn conjugate(f: &VectorField, mu: f64, cfg: &ConjugateSolve) -> Result<Conjugate> {
    let w = solve_k(f, mu, cfg)?;
    let via_phi = phi(&w, mu);
    let pairing = inner(f, &w)?;
    Ok(Conjugate {
        value: pairing - via_phi,
        via_phi,
        via_pairing: 0.5 * pairing,
        maximiser: w,
    })
}

/// `φ*(f) = sup_v ⟨f, v⟩ − φ(v)`; finite only for `f` in the range of `K`.
pub fn phi_star(f: &VectorField, mu: f64, cfg: &ConjugateSolve) -> Result<f64> {
    Ok(conjugate(f, mu, cfg)?.value)
}

/// Fenchel gap `φ(v) + φ*(f) − ⟨f, v⟩ ≥ 0`.
pub fn fenchel_gap(v: &VectorField, f: &VectorField, mu: f64, cfg: &ConjugateSolve) -> Result<f64> {
    Ok(phi(v, mu) + phi_star(f, mu, cfg)? - inner(f, v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid2P;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid2P {
        Grid2P::periodic_2pi(n).unwrap()
    }

    fn tg(g: Grid2P) -> VectorField {
        VectorField::from_fn(g, |x, y| [x.sin() * y.cos(), -x.cos() * y.sin(), 0.0])
    }

    #[test]
    fn density_examples() {
        let g = grid(4);
        assert_eq!(w_density(&SymTensorField::zeros(g), 2.0).max_abs(), 0.0);
        let dil = SymTensorField::constant(g, [0.3, 0.3, 0.3, 0.0, 0.0, 0.0]);
        assert!(w_density(&dil, 2.0).max_abs() < 1e-15);
        let shear = SymTensorField::constant(g, [0.0, 0.0, 0.0, 0.5, 0.0, 0.0]);
        // Tr(D²) = 2 s², Tr D = 0.
        assert!(w_density(&shear, 2.0).values().iter().all(|&w| (w - 2.0 * 2.0 * 0.25).abs() < 1e-15));
    }

    #[test]
    fn stress_examples() {
        let g = grid(4);
        let mu = 1.5;
        let dil = SymTensorField::constant(g, [0.7, 0.7, 0.7, 0.0, 0.0, 0.0]);
        assert!(sigma_i(&dil, mu).max_abs() < 1e-15);
        let d = 0.4;
        let s = sigma_i(&SymTensorField::constant(g, [d, 0.0, 0.0, 0.0, 0.0, 0.0]), mu);
        let want = [4.0 * mu * d / 3.0, -2.0 * mu * d / 3.0, -2.0 * mu * d / 3.0];
        for (slot, w) in [sym::XX, sym::YY, sym::ZZ].into_iter().zip(want) {
            assert!(s.slot(slot).iter().all(|&v| (v - w).abs() < 1e-15));
        }
    }

    #[test]
    fn taylor_green_dissipation_by_quadrature() {
        // Continuum: ∂x u = cos x cos y = −∂y v and D_xy = 0, so
        // ∫ Tr D² = 2 ∫ cos²x cos²y = 2π² and φ = 2π² μ. Central differences
        // scale the gradients by sin(h)/h.
        let mu = 0.3;
        for n in [16, 32] {
            let g = grid(n);
            let h = g.dx();
            let s = h.sin() / h;
            let want = 2.0 * PI * PI * mu * s * s;
            assert!((phi(&tg(g), mu) - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn k_maps_taylor_green_to_eigenvalue() {
        let g = grid(32);
        let mu = 0.2;
        let h = g.dx();
        let lam = 2.0 * mu * (h.sin() / h).powi(2);
        let kv = apply_k(&tg(g), mu);
        assert!((&kv - &(&tg(g) * lam)).max_abs() < 1e-13);
        assert!((lam - 2.0 * mu).abs() < 2.0 * mu * h * h / 2.0);
    }

    #[test]
    fn k_annihilates_constants_and_has_zero_mean() {
        let g = grid(16);
        assert!(apply_k(&VectorField::constant(g, [1.0, 2.0, 3.0]), 1.0).max_abs() < 1e-14);
        let v = VectorField::from_fn(g, |x, y| [(x + y).sin().exp(), x.cos() * y, (2.0 * y).cos()]);
        let m = apply_k(&v, 0.7).mean();
        assert!(m.iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn solve_k_round_trip_and_eigenmode() {
        let g = grid(16);
        let mu = 0.5;
        let cfg = ConjugateSolve { tol: 1e-13, ..Default::default() };
        let v0 = VectorField::from_fn(g, |x, y| [(x + 2.0 * y).sin(), (3.0 * x).cos() * y.sin(), x.sin()]);
        let mut v0m = v0.clone();
        v0m.project_range();
        let v = solve_k(&apply_k(&v0, mu), mu, &cfg).unwrap();
        assert!((&v - &v0m).norm_l2() <= 1e-10 * v0m.norm_l2());

        let zero = solve_k(&VectorField::zeros(g), mu, &cfg).unwrap();
        assert_eq!(zero.max_abs(), 0.0);

        let h = g.dx();
        let lam = 2.0 * mu * (h.sin() / h).powi(2);
        let w = solve_k(&(&tg(g) * lam), mu, &cfg).unwrap();
        assert!((&w - &tg(g)).max_abs() < 1e-10);
    }

    #[test]
    fn solve_k_rejects_mean() {
        let g = grid(8);
        let f = VectorField::constant(g, [1.0, 0.0, 0.0]);
        assert!(matches!(
            solve_k(&f, 1.0, &ConjugateSolve::default()),
            Err(Error::OutsideRange { .. })
        ));
    }

    #[test]
    fn conjugate_formulas_agree_and_scale_quadratically() {
        let g = grid(16);
        let mu = 0.4;
        let cfg = ConjugateSolve::default();
        let f = apply_k(&VectorField::from_fn(g, |x, y| [y.sin(), (x - y).cos(), 0.2 * x.cos()]), mu);
        let c = conjugate(&f, mu, &cfg).unwrap();
        assert!((c.via_phi - c.via_pairing).abs() <= 1e-10 * c.value);
        assert!((c.value - c.via_phi).abs() <= 1e-10 * c.value);
        let c2 = phi_star(&(&f * 2.0), mu, &cfg).unwrap();
        assert!((c2 - 4.0 * c.value).abs() < 1e-9 * c2);
        assert_eq!(phi_star(&VectorField::zeros(g), mu, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn fenchel_equality_on_the_graph_of_k() {
        let g = grid(16);
        let mu = 0.25;
        let v = VectorField::from_fn(g, |x, y| [(2.0 * x).sin() * y.cos(), x.cos(), (x + y).sin()]);
        let gap = fenchel_gap(&v, &apply_k(&v, mu), mu, &ConjugateSolve::default()).unwrap();
        assert!(gap.abs() <= 1e-8 * (phi(&v, mu) + 1.0));
        let f = VectorField::from_fn(g, |x, _| [x.sin(), 0.0, 0.0]);
        assert!(phi_star(&f, mu, &ConjugateSolve::default()).unwrap() > 0.0);
    }

    #[test]
    fn viscosity_must_be_positive() {
        assert!(Viscosity::new(0.0).is_err());
        assert!(Viscosity::new(-1.0).is_err());
        assert!(Viscosity::new(0.1).is_ok());
    }
}
