//! Space-time minimum principle for dissipative flow on periodic grids.
//!
//! A candidate velocity history is scored by a nonnegative functional that
//! combines the viscous dissipation potential, its convex conjugate
//! evaluated on the inviscid momentum residual, and the power of that
//! residual. The functional vanishes exactly on Navier-Stokes trajectories,
//! so evaluating it measures constitutive error and minimizing it recovers
//! the flow.
//!
//! Modules, bottom-up:
//! - [`fields`]: periodic grid fields and central-difference calculus.
//! - [`gravitation`]: gravity and Coriolis fields from analytic potentials.
//! - [`balance`]: mass, momentum and energy residuals on a time interval.
//! - [`dissipation`]: viscous potential, stress, the operator `K` and the
//!   conjugate `φ*`.
//! - [`symplectic`]: phase points, the canonical form and the
//!   reversible/irreversible split.
//! - [`sben`]: space-time assembly, adjoint gradient and the path minimizer.
//! - [`oracle`]: reference time steppers and analytic solutions.
//! - [`io`], [`config`], [`suite`]: file formats, run configuration and the
//!   invariant suite used by the command line.

pub mod balance;
pub mod config;
pub mod dissipation;
pub mod error;
pub mod fields;
pub mod gravitation;
pub mod io;
pub mod krylov;
pub mod oracle;
pub mod sben;
pub mod suite;
pub mod symplectic;
pub mod synth;

pub use error::{Error, Result};
