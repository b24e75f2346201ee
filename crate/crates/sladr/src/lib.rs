//! Fully semi-Lagrangian solvers for advection-diffusion-reaction
//! equations and systems on structured Cartesian grids and unstructured
//! triangular meshes.
//!
//! Both the advective and the diffusive part of the operator are treated
//! along generalized (stochastic) characteristics: each node is updated
//! from interpolated values at a small set of weighted departure points,
//! so no global linear system is ever assembled and the per-step
//! trajectory work is shared across all transported species. First-order
//! (`SL1`) and second-order (`SL2`, Crank-Nicolson in time; `SL2s`,
//! decoupled substepping) steppers are provided, together with a
//! ghost-layer extrapolation treatment of Dirichlet boundaries, Eulerian
//! finite-difference reference solvers, and the benchmark suites used to
//! produce convergence tables.

pub mod boundary;
pub mod characteristics;
pub mod error;
pub mod geom;
pub mod interp;
pub mod mesh;
pub mod model;
pub mod onedim;
pub mod oracle;
pub mod output;
pub mod schemes;

pub mod bench;

pub use error::{Error, Result};
