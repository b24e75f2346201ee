//! Error type shared by all solver components.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh file {path}, line {line}: {msg}")]
    MeshParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh has no boundary edges, projection onto the domain is undefined")]
    EmptyBoundary,

    #[error("point ({x}, {y}) lies outside the computational domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("trajectory fixed point did not converge at dof {dof} (residual {residual:.3e} after {iters} iterations)")]
    FixedPointDiverged {
        dof: usize,
        residual: f64,
        iters: usize,
    },

    #[error("reaction solve did not converge at node {node} (residual {residual:.3e})")]
    ReactionDiverged { node: usize, residual: f64 },

    #[error("time step {dt} violates the stability limit; admissible dt <= {dt_max}")]
    UnstableTimeStep { dt: f64, dt_max: f64 },

    #[error("ghost layer thickness {h} exceeds half the domain thickness {half_thickness}")]
    GhostLayerTooThick { h: f64, half_thickness: f64 },

    #[error("ghost dof ({x}, {y}) of element {element} lies outside the computational domain")]
    GhostDofOutside { element: usize, x: f64, y: f64 },

    #[error("projection ({x}, {y}) is not covered by any ghost element (layer too thin for this time step)")]
    OutsideGhostLayer { x: f64, y: f64 },

    #[error("unknown problem '{name}'; valid names: {valid}")]
    UnknownProblem { name: String, valid: String },

    #[error("unknown benchmark suite '{name}'; valid suites: {valid}")]
    UnknownSuite { name: String, valid: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("relative error is undefined: reference field has zero norm")]
    ZeroReferenceNorm,

    #[error("convergence rate is undefined for errors ({coarse}, {fine}) and ratio {ratio}")]
    InvalidRateInput { coarse: f64, fine: f64, ratio: f64 },

    #[error("non-finite value at dof {dof}, species {species}, after step {step}")]
    NonFinite {
        dof: usize,
        species: usize,
        step: usize,
    },

    #[error("bad raster file {path}: {msg}")]
    BadRaster { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
