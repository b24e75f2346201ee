//! One-dimensional periodic variant of the second-order stepper, with a
//! fine-grid finite-difference oracle. Used by the analysis tests: in one
//! dimension the displacement set reduces to the three feet
//! `z_0, z_+, z_-` with weights 2/3, 1/6, 1/6, and the error estimate
//! `K_T (dt^2 + dx^p / dt)` can be verified directly on problems with a
//! scalar drift `u(x)` and a smooth reaction.

use crate::error::{Error, Result};
use crate::interp::{cubic1d_eval, Grid1D};

const FIXED_POINT_TOL: f64 = 1e-13;
const MAX_ITER: usize = 60;

/// Feet of the three one-dimensional characteristics at `x`:
/// `z = x - dt/2 (u(x) + u(z)) + e sqrt(6 nu dt)` for `e` in {0, +1, -1}.
pub fn feet_1d(x: f64, dt: f64, nu: f64, u: &impl Fn(f64) -> f64) -> Result<[f64; 3]> {
    let off = (6.0 * nu * dt).sqrt();
    let mut feet = [0.0; 3];
    for (slot, e) in feet.iter_mut().zip([0.0, 1.0, -1.0]) {
        let gamma = e * off;
        let ux = u(x);
        let mut z = x - dt * ux + gamma;
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let next = x - 0.5 * dt * (ux + u(z)) + gamma;
            let done = (next - z).abs() <= FIXED_POINT_TOL * (1.0 + next.abs());
            z = next;
            if done {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::FixedPointDiverged {
                dof: 0,
                residual: f64::NAN,
                iters: MAX_ITER,
            });
        }
        *slot = z;
    }
    Ok(feet)
}

/// One Crank-Nicolson step on a periodic grid with cubic interpolation:
/// `c_i - dt/2 f(c_i) = sum_k alpha_k [v_k + dt/2 f(v_k)]`, the scalar
/// implicit relation solved by Newton iteration.
pub fn sl2_step_1d(
    grid: &Grid1D,
    values: &[f64],
    dt: f64,
    nu: f64,
    u: &impl Fn(f64) -> f64,
    f: &impl Fn(f64) -> f64,
    fp: &impl Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    let weights = [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
    let mut out = vec![0.0; grid.n];
    for i in 0..grid.n {
        let x = grid.node(i);
        let feet = feet_1d(x, dt, nu, u)?;
        let mut rhs = 0.0;
        for (z, w) in feet.into_iter().zip(weights) {
            let v = cubic1d_eval(grid, values, z);
            rhs += w * (v + 0.5 * dt * f(v));
        }
        // Newton on g(c) = c - dt/2 f(c) - rhs.
        let mut c = rhs;
        let mut ok = false;
        for _ in 0..MAX_ITER {
            let g = c - 0.5 * dt * f(c) - rhs;
            if g.abs() <= 1e-13 * (1.0 + rhs.abs()) {
                ok = true;
                break;
            }
            let dg = 1.0 - 0.5 * dt * fp(c);
            c -= g / dg;
        }
        if !ok {
            return Err(Error::ReactionDiverged {
                node: i,
                residual: f64::NAN,
            });
        }
        out[i] = c;
    }
    Ok(out)
}

/// Fourth-order finite differences + RK4 on a periodic 1D grid, the
/// reference integrator for the order checks.
pub fn fd4_rk4_solve_1d(
    grid: &Grid1D,
    c0: &[f64],
    t_final: f64,
    nu: f64,
    u: &impl Fn(f64) -> f64,
    f: &impl Fn(f64) -> f64,
) -> Vec<f64> {
    let n = grid.n;
    let h = grid.dx;
    let umax = grid
        .nodes()
        .iter()
        .map(|&x| u(x).abs())
        .fold(0.0, f64::max);
    let mut dt = 0.5 * (h * h / (4.0 * nu).max(1e-300)).min(if umax > 0.0 {
        h / umax
    } else {
        f64::INFINITY
    });
    let n_steps = (t_final / dt).ceil() as usize;
    dt = t_final / n_steps as f64;

    let rhs = |c: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let at = |k: isize| c[(i as isize + k).rem_euclid(n as isize) as usize];
            let cx = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
            let cxx =
                (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h);
            out[i] = -u(grid.node(i)) * cx + nu * cxx + f(at(0));
        }
    };

    let mut c = c0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for _ in 0..n_steps {
        rhs(&c, &mut k1);
        for i in 0..n {
            tmp[i] = c[i] + 0.5 * dt * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = c[i] + 0.5 * dt * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = c[i] + dt * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..n {
            c[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    c
}

/// Relative l2 distance between two dof vectors.
pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

/// Error of the 1D stepper at `t_final` against the fine oracle, for a
/// drift `sin(x)`, reaction `sin(c)` and datum `sin(x)`.
pub fn sl2_1d_error(n: usize, dt: f64, nu: f64, t_final: f64) -> Result<f64> {
    let length = 2.0 * std::f64::consts::PI;
    let grid = Grid1D::new(0.0, length, n);
    let u = |x: f64| x.sin();
    let f = |c: f64| c.sin();
    let fp = |c: f64| c.cos();
    let mut c: Vec<f64> = grid.nodes().iter().map(|&x| x.sin()).collect();
    let n_steps = (t_final / dt).round() as usize;
    for _ in 0..n_steps {
        c = sl2_step_1d(&grid, &c, dt, nu, &u, &f, &fp)?;
    }

    let fine = Grid1D::new(0.0, length, 1024);
    let c0_fine: Vec<f64> = fine.nodes().iter().map(|&x| x.sin()).collect();
    let reference_fine = fd4_rk4_solve_1d(&fine, &c0_fine, t_final, nu, &u, &f);
    let reference: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| cubic1d_eval(&fine, &reference_fine, x))
        .collect();
    Ok(rel_l2(&c, &reference))
}
