//! Seeded smooth random fields built from low Fourier modes.
//!
//! Every generator omits the `k = 0` mode, so the fields have zero mean, and
//! uses wavenumbers well below Nyquist, so they carry no checkerboard
//! content. Solenoidal fields are formed as the discrete curl of a random
//! stream function and are therefore divergence-free to round-off under the
//! grid's own divergence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::{curl, Grid2P, ScalarField, VectorField};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sum of modes with `0 < |k| ≤ kmax`, coefficients decaying like
/// `1/(1 + |k|²)`, normalised to unit RMS.
pub fn smooth_scalar(grid: Grid2P, rng: &mut impl Rng, kmax: usize) -> ScalarField {
    let kmax = kmax.max(1).min(grid.nx.min(grid.ny) / 4).max(1) as i64;
    let mut modes = Vec::new();
    for kx in -kmax..=kmax {
        for ky in 0..=kmax {
            if ky == 0 && kx <= 0 {
                continue;
            }
            let k2 = (kx * kx + ky * ky) as f64;
            if k2 > (kmax * kmax) as f64 {
                continue;
            }
            let a = rng.gen_range(-1.0..1.0) / (1.0 + k2);
            let b = rng.gen_range(-1.0..1.0) / (1.0 + k2);
            modes.push((kx as f64, ky as f64, a, b));
        }
    }
    let (wx, wy) = (
        2.0 * std::f64::consts::PI / grid.lx,
        2.0 * std::f64::consts::PI / grid.ly,
    );
    let s = ScalarField::from_fn(grid, |x, y| {
        modes
            .iter()
            .map(|&(kx, ky, a, b)| {
                let th = kx * wx * x + ky * wy * y;
                a * th.cos() + b * th.sin()
            })
            .sum()
    });
    let rms = s.rms();
    if rms > 0.0 {
        &s * (1.0 / rms)
    } else {
        s
    }
}

/// Three independent smooth components.
pub fn smooth_vector(grid: Grid2P, rng: &mut impl Rng, kmax: usize) -> VectorField {
    let x = smooth_scalar(grid, rng, kmax);
    let y = smooth_scalar(grid, rng, kmax);
    let z = smooth_scalar(grid, rng, kmax);
    VectorField::from_scalars(&x, &y, &z)
}

/// Planar solenoidal field `curl(0, 0, ψ)` normalised to unit RMS.
pub fn solenoidal(grid: Grid2P, rng: &mut impl Rng, kmax: usize) -> VectorField {
    let psi = smooth_scalar(grid, rng, kmax);
    let zero = ScalarField::zeros(grid);
    let v = curl(&VectorField::from_scalars(&zero, &zero, &psi));
    let rms = v.rms();
    &v * (1.0 / rms)
}
