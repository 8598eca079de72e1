//! Energy-conservative finite element solver for the BBM-BBM (regularised
//! shallow water) Boussinesq system
//!
//! ```text
//! η_t + [(1+η)u]_x − η_xxt/6 = 0
//! u_t + η_x + u u_x − u_xxt/6 = 0
//! ```
//!
//! on a bounded interval with periodic or reflective (η_x = u = 0) walls.
//!
//! Space is discretised by continuous Lagrange elements in a mixed
//! formulation that carries L²-projected derivatives as extra unknowns; time
//! is advanced by explicit Runge–Kutta with an optional relaxation step that
//! keeps the discrete energy exactly constant. Solitary-wave initial data come
//! from a Galerkin Petviashvili iteration.
//!
//! Module map:
//!
//! * [`fem`] meshes, Lagrange spaces, quadrature and matrix assembly
//! * [`linalg`] banded direct solvers, including the saddle-point blocks
//! * [`functionals`] mass, momentum, impulse, energy and relaxation coefficients
//! * [`semidisc`] the conservative (mixed) and standard Galerkin right-hand sides
//! * [`timeint`] Butcher tableaux, RK stepping and relaxation
//! * [`waves`] exact travelling wave, manufactured solutions, Petviashvili solver
//! * [`diagnostics`] error norms, convergence rates, wave tracking, invariant drift
//! * [`experiments`] scripted numerical studies
//! * [`io`] CSV tables, wave files, config files and value parsers
//! * [`gates`] acceptance criteria with pinned tolerances

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod functionals;
pub mod gates;
pub mod io;
pub mod linalg;
pub mod semidisc;
pub mod timeint;
pub mod waves;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
