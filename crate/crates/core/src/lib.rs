//! Finite-volume toolkit for the 1D degenerate convection-diffusion problem
//!
//! ```text
//!     u_t + f(u)_x - phi(u)_xx = 0        on (a,b) x (0,T)
//!     b(u) - (f(u) - phi(u)_x) . eta = 0  at x = a and x = b
//! ```
//!
//! `phi` is non-decreasing and may vanish on `[0, u_c]` (degenerate zone),
//! `b` is a non-decreasing boundary flux, and `eta` is the outward normal
//! (-1 at `a`, +1 at `b`). The crate provides:
//!
//! - [`problem`]: problem data, structural validation, and checks of the
//!   well-posedness hypotheses (compatibility at 0, factorization of `b`
//!   through `phi`, boundary-flux dominance, non-degeneracy of `f`).
//! - [`numflux`]: monotone two-point numerical fluxes (Godunov, Rusanov,
//!   Engquist-Osher) and their Kruzhkov entropy fluxes.
//! - [`fv_solver`]: the explicit monotone finite-volume scheme, with a
//!   vanishing-viscosity variant.
//! - [`stationary`]: the stationary problem `u + (f(u) - phi(u)_x)_x = g`
//!   and the resolvent map, both solved by damped pseudo-time marching.
//! - [`diagnostics`]: numerical certificates (maximum principle, discrete
//!   entropy residuals, L1 contraction, integral-solution inequality,
//!   boundary-layer indicator, viscosity-independent energy norms).
//! - [`presets`]: ready-made scenarios used across tests and the CLI.
//! - [`io`]: deterministic CSV and gnuplot exports.

pub mod diagnostics;
mod error;
pub mod fv_solver;
pub mod io;
pub mod numflux;
pub mod presets;
pub mod problem;
pub mod stationary;

pub use error::CoreError;
