//! Feet of the generalized characteristics.
//!
//! Each grid node is updated from values at K departure points per time
//! step. The trajectories solve `dX = -u ds + sigma dW` backwards over
//! one step; the Wiener increment is replaced by a deterministic
//! displacement set:
//!
//! * first order: the four points `z + sqrt(4 nu dt) (+-e_j)` with equal
//!   weights 1/4, around an explicit Euler (substepped) foot `z`;
//! * second order: nine displacements `sqrt(3 dt) sigma e_k` with weights
//!   4/9 (center), 1/9 (edges), 1/36 (corners), combined with an implicit
//!   trapezoidal trajectory solved per displacement (coupled variant) or
//!   added after one substepped trapezoidal trajectory (decoupled
//!   variant).
//!
//! The nine-point set matches the first two moments and the fourth moment
//! of the Gaussian increment, which is what yields weak second order.

use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::model::Velocity;

/// Relative tolerance of the trajectory fixed point iterations.
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 25;

/// The nine second-order displacement directions: center, edges, corners.
pub const E_SECOND: [Point; 9] = [
    Point::new(0.0, 0.0),
    Point::new(0.0, 1.0),
    Point::new(0.0, -1.0),
    Point::new(1.0, 0.0),
    Point::new(-1.0, 0.0),
    Point::new(1.0, 1.0),
    Point::new(1.0, -1.0),
    Point::new(-1.0, 1.0),
    Point::new(-1.0, -1.0),
];

/// Weights of the nine-point set as exact fractions.
pub const ALPHA_SECOND_RATIONAL: [(u32, u32); 9] = [
    (4, 9),
    (1, 9),
    (1, 9),
    (1, 9),
    (1, 9),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
];

pub const ALPHA_SECOND: [f64; 9] = [
    4.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
];

pub const E_FIRST: [Point; 4] = [
    Point::new(1.0, 0.0),
    Point::new(-1.0, 0.0),
    Point::new(0.0, 1.0),
    Point::new(0.0, -1.0),
];

pub const ALPHA_FIRST: [f64; 4] = [0.25, 0.25, 0.25, 0.25];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeOrder {
    First,
    Second,
}

/// Offsets and weights replacing the Wiener increment for one scheme
/// order and time step.
#[derive(Clone, Debug)]
pub struct DisplacementSet {
    pub order: SchemeOrder,
    pub offsets: Vec<Point>,
    pub weights: Vec<f64>,
    /// `sqrt(4 nu dt)` (first order) or `sqrt(3 dt) * sqrt(2 nu)` (second).
    pub amplitude: f64,
}

impl DisplacementSet {
    pub fn first_order(nu: f64, dt: f64) -> Self {
        let amplitude = (4.0 * nu * dt).sqrt();
        Self {
            order: SchemeOrder::First,
            offsets: E_FIRST.iter().map(|&e| e * amplitude).collect(),
            weights: ALPHA_FIRST.to_vec(),
            amplitude,
        }
    }

    pub fn second_order(nu: f64, dt: f64) -> Self {
        let amplitude = (3.0 * dt).sqrt() * (2.0 * nu).sqrt();
        Self {
            order: SchemeOrder::Second,
            offsets: E_SECOND.iter().map(|&e| e * amplitude).collect(),
            weights: ALPHA_SECOND.to_vec(),
            amplitude,
        }
    }

    pub fn k(&self) -> usize {
        self.offsets.len()
    }
}

/// Explicit Euler backward trajectory over `m` substeps, velocity frozen
/// at the step start time `t_n`.
pub fn feet_euler_substep(x: Point, t_n: f64, dt: f64, m: usize, u: &dyn Velocity) -> Point {
    let m = m.max(1);
    let dtau = dt / m as f64;
    let mut y = x;
    for _ in 0..m {
        y = y - u.eval(y, t_n) * dtau;
    }
    y
}

/// Implicit trapezoidal backward trajectory over `m` substeps with
/// decreasing times; each substep is solved by fixed point iteration.
/// Returns the foot and the total iteration count.
pub fn feet_trapezoid_substep(
    x: Point,
    t_np1: f64,
    dt: f64,
    m: usize,
    u: &dyn Velocity,
    dof: usize,
) -> Result<(Point, u32)> {
    let m = m.max(1);
    let dtau = dt / m as f64;
    let mut y = x;
    let mut total_iters = 0u32;
    for q in 0..m {
        let t_q = t_np1 - q as f64 * dtau;
        let t_q1 = t_np1 - (q + 1) as f64 * dtau;
        let u_q = u.eval(y, t_q);
        let mut next = y - u_q * dtau;
        let mut residual = f64::INFINITY;
        for it in 0..FIXED_POINT_MAX_ITER {
            let candidate = y - (u_q + u.eval(next, t_q1)) * (0.5 * dtau);
            residual = candidate.dist(next);
            next = candidate;
            total_iters += 1;
            if residual <= FIXED_POINT_TOL * (1.0 + next.norm()) {
                break;
            }
            if it + 1 == FIXED_POINT_MAX_ITER {
                return Err(Error::FixedPointDiverged {
                    dof,
                    residual,
                    iters: FIXED_POINT_MAX_ITER,
                });
            }
        }
        let _ = residual;
        y = next;
    }
    Ok((y, total_iters))
}

/// One coupled second-order foot: solves
/// `z = x - dt/2 (u(x, t_{n+1}) + u(z, t_n)) + offset`
/// by fixed point on the displacement `z - x`, starting from the explicit
/// Euler displacement.
pub fn feet_implicit_second_order(
    x: Point,
    t_np1: f64,
    dt: f64,
    u: &dyn Velocity,
    offset: Point,
    dof: usize,
) -> Result<(Point, u32)> {
    let t_n = t_np1 - dt;
    let u_x = u.eval(x, t_np1);
    solve_displacement(x, u_x, t_n, dt, offset, u, dof)
}

fn solve_displacement(
    x: Point,
    u_x: Point,
    t_n: f64,
    dt: f64,
    offset: Point,
    u: &dyn Velocity,
    dof: usize,
) -> Result<(Point, u32)> {
    let mut delta = offset - u_x * dt;
    let mut iters = 0u32;
    loop {
        let candidate = offset - (u_x + u.eval(x + delta, t_n)) * (0.5 * dt);
        let residual = candidate.dist(delta);
        delta = candidate;
        iters += 1;
        if residual <= FIXED_POINT_TOL * (1.0 + delta.norm()) {
            return Ok((x + delta, iters));
        }
        if iters as usize >= FIXED_POINT_MAX_ITER {
            return Err(Error::FixedPointDiverged {
                dof,
                residual,
                iters: FIXED_POINT_MAX_ITER,
            });
        }
    }
}

/// Trajectory variant of one scheme step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeetVariant {
    /// Euler substepped foot plus first-order displacements.
    Sl1 { substeps: usize },
    /// Fully coupled implicit trapezoidal feet, one per displacement.
    Sl2,
    /// Trapezoidal substepped foot, displacements added afterwards.
    Sl2s { substeps: usize },
}

impl FeetVariant {
    pub fn k(&self) -> usize {
        match self {
            FeetVariant::Sl1 { .. } => 4,
            _ => 9,
        }
    }
}

/// All departure points of one time step: `feet[dof * k + j]` is the
/// j-th foot of `dof`. Construction cost is independent of the number of
/// transported species.
#[derive(Clone, Debug)]
pub struct FeetTable {
    pub k: usize,
    pub feet: Vec<Point>,
    /// Total fixed point iterations spent on trajectories this step.
    pub fixed_point_iters: u64,
}

pub fn build_feet_table(
    coords: &[Point],
    t_np1: f64,
    dt: f64,
    variant: FeetVariant,
    u: &dyn Velocity,
    nu: f64,
) -> Result<FeetTable> {
    let k = variant.k();
    let mut feet = vec![Point::default(); coords.len() * k];
    let iters = AtomicU64::new(0);
    let t_n = t_np1 - dt;

    feet.par_chunks_mut(k)
        .zip(coords.par_iter())
        .enumerate()
        .try_for_each(|(dof, (out, &x))| -> Result<()> {
            match variant {
                FeetVariant::Sl1 { substeps } => {
                    let set = DisplacementSet::first_order(nu, dt);
                    let z = feet_euler_substep(x, t_n, dt, substeps, u);
                    for (o, &d) in out.iter_mut().zip(&set.offsets) {
                        *o = z + d;
                    }
                }
                FeetVariant::Sl2 => {
                    let amplitude = (6.0 * nu * dt).sqrt();
                    let u_x = u.eval(x, t_np1);
                    let mut local = 0u64;
                    for (o, &e) in out.iter_mut().zip(&E_SECOND) {
                        let (z, it) =
                            solve_displacement(x, u_x, t_n, dt, e * amplitude, u, dof)?;
                        *o = z;
                        local += it as u64;
                    }
                    iters.fetch_add(local, Ordering::Relaxed);
                }
                FeetVariant::Sl2s { substeps } => {
                    let amplitude = (6.0 * nu * dt).sqrt();
                    let (y, it) = feet_trapezoid_substep(x, t_np1, dt, substeps, u, dof)?;
                    iters.fetch_add(it as u64, Ordering::Relaxed);
                    for (o, &e) in out.iter_mut().zip(&E_SECOND) {
                        *o = y + e * amplitude;
                    }
                }
            }
            Ok(())
        })?;

    Ok(FeetTable {
        k,
        feet,
        fixed_point_iters: iters.load(Ordering::Relaxed),
    })
}
