//! Eulerian finite-difference reference solvers.
//!
//! Method-of-lines discretizations on structured grids, used both as the
//! comparison baselines (second/fourth order in space with explicit
//! Runge-Kutta time stepping) and, at high refinement with RK4, as the
//! reference-solution generator for problems without a closed form.
//! Fourth-order runs use an upwind-biased six-point stencil for the
//! advective derivative and the centered five-point fourth-order stencil
//! for the diffusive one.
//!
//! Reference fields are cached on disk in the raster format, keyed by a
//! content hash of the problem and resolution.

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::interp::Interpolator;
use crate::mesh::StructuredGrid;
use crate::model::{BoundaryKind, ProblemSpec, ReactionTerm, Velocity, VelocityField, MAX_SPECIES};
use crate::output::{read_raster, write_raster};

pub const DEFAULT_SAFETY: f64 = 0.8;
/// Refuse reference grids above this memory footprint.
const MEMORY_BUDGET_BYTES: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceOrder {
    Two,
    Four,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeScheme {
    Rk2,
    Rk3,
    Rk4,
}

// One-dimensional stencils on uniform spacing `h`, written on padded rows
// so no index wrapping happens in the hot loops.

#[inline]
pub fn grad2(m1: f64, p1: f64, h: f64) -> f64 {
    (p1 - m1) / (2.0 * h)
}

#[inline]
pub fn lap2(m1: f64, c: f64, p1: f64, h: f64) -> f64 {
    (p1 - 2.0 * c + m1) / (h * h)
}

#[inline]
pub fn grad4(m2: f64, m1: f64, p1: f64, p2: f64, h: f64) -> f64 {
    (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)
}

#[inline]
pub fn lap4(m2: f64, m1: f64, c: f64, p1: f64, p2: f64, h: f64) -> f64 {
    (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h)
}

/// Upwind-biased six-point first derivative for positive wind; mirror the
/// arguments for negative wind.
#[inline]
pub fn grad_upwind_biased(m3: f64, m2: f64, m1: f64, c: f64, p1: f64, p2: f64, h: f64) -> f64 {
    (-2.0 * m3 + 15.0 * m2 - 60.0 * m1 + 20.0 * c + 30.0 * p1 - 3.0 * p2) / (60.0 * h)
}

const PAD: usize = 3;

pub struct FdScheme<'p> {
    pub problem: &'p ProblemSpec,
    pub grid: StructuredGrid,
    pub space: SpaceOrder,
    pub time: TimeScheme,
    pub safety: f64,
}

impl<'p> FdScheme<'p> {
    pub fn new(problem: &'p ProblemSpec, grid: StructuredGrid, space: SpaceOrder, time: TimeScheme) -> Self {
        Self {
            problem,
            grid,
            space,
            time,
            safety: DEFAULT_SAFETY,
        }
    }

    /// Largest stable step: `safety * min(dx / max|u|, dx^2 / (4 nu))`.
    pub fn admissible_dt(&self) -> f64 {
        let h = self.grid.dx.min(self.grid.dy);
        let umax = self.problem.velocity.max_component_speed(&self.problem.domain);
        let adv = if umax > 0.0 { h / umax } else { f64::INFINITY };
        let diff = if self.problem.nu > 0.0 {
            h * h / (4.0 * self.problem.nu)
        } else {
            f64::INFINITY
        };
        self.safety * adv.min(diff)
    }

    pub fn check_dt(&self, dt: f64) -> Result<()> {
        let dt_max = self.admissible_dt();
        if dt > dt_max {
            return Err(Error::UnstableTimeStep { dt, dt_max });
        }
        Ok(())
    }

    fn mx(&self) -> usize {
        self.grid.dofs_x()
    }

    fn my(&self) -> usize {
        self.grid.dofs_y()
    }

    /// Copy one species into a padded buffer, filling the pad ring (and,
    /// on Dirichlet problems, the boundary nodes) by wrap or from the
    /// extended boundary data at time `t`.
    fn pad_species(&self, c: &[f64], s: usize, t: f64, padded: &mut [f64]) {
        let mx = self.mx();
        let my = self.my();
        let w = mx + 2 * PAD;
        let periodic = self.grid.periodic_x;
        for jj in 0..my + 2 * PAD {
            let j = jj as isize - PAD as isize;
            for ii in 0..w {
                let i = ii as isize - PAD as isize;
                let inside = i >= 0 && i < mx as isize && j >= 0 && j < my as isize;
                padded[jj * w + ii] = if periodic {
                    let iw = i.rem_euclid(mx as isize) as usize;
                    let jw = j.rem_euclid(my as isize) as usize;
                    c[jw * mx + iw]
                } else if inside {
                    let (iu, ju) = (i as usize, j as usize);
                    let dof = ju * mx + iu;
                    if self.grid.is_boundary_dof(dof) {
                        let p = self.grid.dof_coord(dof);
                        (self.problem.boundary_value)(p, t, s)
                    } else {
                        c[dof]
                    }
                } else {
                    let p = Point::new(
                        self.grid.xmin + i as f64 * self.grid.dx,
                        self.grid.ymin + j as f64 * self.grid.dy,
                    );
                    (self.problem.boundary_value)(p, t, s)
                };
            }
        }
    }

    /// Method-of-lines right-hand side for all species of the state `c`
    /// at time `t`.
    pub fn rhs(&self, c: &[f64], t: f64, out: &mut [f64]) {
        let mx = self.mx();
        let my = self.my();
        let n = mx * my;
        let s_count = self.problem.n_species;
        let w = mx + 2 * PAD;
        let mut padded = vec![0.0; w * (my + 2 * PAD)];
        let advect = !matches!(self.problem.velocity, VelocityField::Zero);
        let (dx, dy) = (self.grid.dx, self.grid.dy);
        let nu = self.problem.nu;

        for s in 0..s_count {
            self.pad_species(&c[s * n..(s + 1) * n], s, t, &mut padded);
            let out_s = &mut out[s * n..(s + 1) * n];
            let velocity = &self.problem.velocity;
            let grid = &self.grid;
            let space = self.space;
            let padded_ref = &padded;
            out_s
                .par_chunks_mut(mx)
                .enumerate()
                .for_each(|(j, row)| {
                    let base = (j + PAD) * w + PAD;
                    for (i, o) in row.iter_mut().enumerate() {
                        let idx = base + i;
                        let cc = padded_ref[idx];
                        let lap = match space {
                            SpaceOrder::Two => {
                                lap2(padded_ref[idx - 1], cc, padded_ref[idx + 1], dx)
                                    + lap2(padded_ref[idx - w], cc, padded_ref[idx + w], dy)
                            }
                            SpaceOrder::Four => {
                                lap4(
                                    padded_ref[idx - 2],
                                    padded_ref[idx - 1],
                                    cc,
                                    padded_ref[idx + 1],
                                    padded_ref[idx + 2],
                                    dx,
                                ) + lap4(
                                    padded_ref[idx - 2 * w],
                                    padded_ref[idx - w],
                                    cc,
                                    padded_ref[idx + w],
                                    padded_ref[idx + 2 * w],
                                    dy,
                                )
                            }
                        };
                        let mut rhs = nu * lap;
                        if advect {
                            let p = grid.dof_coord(j * mx + i);
                            let u = velocity.eval(p, t);
                            let (cx, cy) = match space {
                                SpaceOrder::Two => (
                                    grad2(padded_ref[idx - 1], padded_ref[idx + 1], dx),
                                    grad2(padded_ref[idx - w], padded_ref[idx + w], dy),
                                ),
                                SpaceOrder::Four => {
                                    let cx = if u.x >= 0.0 {
                                        grad_upwind_biased(
                                            padded_ref[idx - 3],
                                            padded_ref[idx - 2],
                                            padded_ref[idx - 1],
                                            cc,
                                            padded_ref[idx + 1],
                                            padded_ref[idx + 2],
                                            dx,
                                        )
                                    } else {
                                        -grad_upwind_biased(
                                            padded_ref[idx + 3],
                                            padded_ref[idx + 2],
                                            padded_ref[idx + 1],
                                            cc,
                                            padded_ref[idx - 1],
                                            padded_ref[idx - 2],
                                            dx,
                                        )
                                    };
                                    let cy = if u.y >= 0.0 {
                                        grad_upwind_biased(
                                            padded_ref[idx - 3 * w],
                                            padded_ref[idx - 2 * w],
                                            padded_ref[idx - w],
                                            cc,
                                            padded_ref[idx + w],
                                            padded_ref[idx + 2 * w],
                                            dy,
                                        )
                                    } else {
                                        -grad_upwind_biased(
                                            padded_ref[idx + 3 * w],
                                            padded_ref[idx + 2 * w],
                                            padded_ref[idx + w],
                                            cc,
                                            padded_ref[idx - w],
                                            padded_ref[idx - 2 * w],
                                            dy,
                                        )
                                    };
                                    (cx, cy)
                                }
                            };
                            rhs -= u.x * cx + u.y * cy;
                        }
                        *o = rhs;
                    }
                });
        }

        // Reaction couples species pointwise.
        if self.problem.reaction != ReactionTerm::None {
            let reaction = &self.problem.reaction;
            let mut state = [0.0; MAX_SPECIES];
            let mut f = [0.0; MAX_SPECIES];
            for node in 0..n {
                for s in 0..s_count {
                    state[s] = c[s * n + node];
                }
                reaction.eval(&state[..s_count], &mut f[..s_count]);
                for s in 0..s_count {
                    out[s * n + node] += f[s];
                }
            }
        }
    }

    fn impose_dirichlet(&self, c: &mut [f64], t: f64) {
        if self.problem.boundary == BoundaryKind::Periodic {
            return;
        }
        let n = self.mx() * self.my();
        for s in 0..self.problem.n_species {
            for dof in 0..n {
                if self.grid.is_boundary_dof(dof) {
                    c[s * n + dof] =
                        (self.problem.boundary_value)(self.grid.dof_coord(dof), t, s);
                }
            }
        }
    }

    /// One explicit step from time `t`.
    pub fn step(&self, c: &mut Vec<f64>, t: f64, dt: f64) -> Result<()> {
        self.check_dt(dt)?;
        let len = c.len();
        match self.time {
            TimeScheme::Rk2 => {
                let mut k1 = vec![0.0; len];
                self.rhs(c, t, &mut k1);
                let mut mid: Vec<f64> = c.iter().zip(&k1).map(|(a, k)| a + dt * k).collect();
                self.impose_dirichlet(&mut mid, t + dt);
                let mut k2 = vec![0.0; len];
                self.rhs(&mid, t + dt, &mut k2);
                for i in 0..len {
                    c[i] += 0.5 * dt * (k1[i] + k2[i]);
                }
            }
            TimeScheme::Rk3 => {
                // Strong-stability-preserving three-stage scheme.
                let mut k = vec![0.0; len];
                self.rhs(c, t, &mut k);
                let mut u1: Vec<f64> = c.iter().zip(&k).map(|(a, k)| a + dt * k).collect();
                self.impose_dirichlet(&mut u1, t + dt);
                self.rhs(&u1, t + dt, &mut k);
                let mut u2: Vec<f64> = c
                    .iter()
                    .zip(u1.iter().zip(&k))
                    .map(|(a, (b, k))| 0.75 * a + 0.25 * (b + dt * k))
                    .collect();
                self.impose_dirichlet(&mut u2, t + 0.5 * dt);
                self.rhs(&u2, t + 0.5 * dt, &mut k);
                for i in 0..len {
                    c[i] = c[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * k[i]);
                }
            }
            TimeScheme::Rk4 => {
                let mut k1 = vec![0.0; len];
                let mut k2 = vec![0.0; len];
                let mut k3 = vec![0.0; len];
                let mut k4 = vec![0.0; len];
                let mut tmp = vec![0.0; len];
                self.rhs(c, t, &mut k1);
                for i in 0..len {
                    tmp[i] = c[i] + 0.5 * dt * k1[i];
                }
                self.impose_dirichlet(&mut tmp, t + 0.5 * dt);
                self.rhs(&tmp, t + 0.5 * dt, &mut k2);
                for i in 0..len {
                    tmp[i] = c[i] + 0.5 * dt * k2[i];
                }
                self.impose_dirichlet(&mut tmp, t + 0.5 * dt);
                self.rhs(&tmp, t + 0.5 * dt, &mut k3);
                for i in 0..len {
                    tmp[i] = c[i] + dt * k3[i];
                }
                self.impose_dirichlet(&mut tmp, t + dt);
                self.rhs(&tmp, t + dt, &mut k4);
                for i in 0..len {
                    c[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        self.impose_dirichlet(c, t + dt);
        Ok(())
    }

    /// Initial dof vector from the problem datum.
    pub fn initial_state(&self) -> Vec<f64> {
        let n = self.mx() * self.my();
        let mut c = vec![0.0; n * self.problem.n_species];
        for s in 0..self.problem.n_species {
            for dof in 0..n {
                c[s * n + dof] = (self.problem.initial)(self.grid.dof_coord(dof), s);
            }
        }
        c
    }

    /// Integrate to `t_final` with `n_steps` uniform steps.
    pub fn run(&self, n_steps: usize) -> Result<Vec<f64>> {
        let dt = self.problem.t_final / n_steps as f64;
        let mut c = self.initial_state();
        for step in 0..n_steps {
            self.step(&mut c, step as f64 * dt, dt)?;
        }
        Ok(c)
    }
}

/// A fine-grid field to compare against, with cubic restriction onto
/// arbitrary dof sets.
pub struct ReferenceField {
    pub grid: StructuredGrid,
    pub n_species: usize,
    pub values: Vec<f64>,
}

impl ReferenceField {
    /// Species-major values at `coords` via bicubic interpolation.
    pub fn restrict_to(&self, coords: &[Point]) -> Vec<f64> {
        let interp = Interpolator::Bicubic(&self.grid);
        let n = self.grid.n_dofs();
        let mut out = Vec::with_capacity(coords.len() * self.n_species);
        for s in 0..self.n_species {
            let vals = &self.values[s * n..(s + 1) * n];
            for &p in coords {
                out.push(interp.eval(vals, p).expect("reference covers the domain"));
            }
        }
        out
    }
}

/// Run (or load from cache) a fourth-order RK4 reference for `problem` on
/// an `n_cells` x `n_cells` grid with time step at most `dt_cap`.
pub fn make_reference(
    problem: &ProblemSpec,
    n_cells: usize,
    dt_cap: f64,
    cache_dir: Option<&Path>,
) -> Result<ReferenceField> {
    let ((xmin, xmax), (ymin, ymax)) = problem.domain.bounds();
    let periodic = problem.boundary == BoundaryKind::Periodic;
    let grid = StructuredGrid::new((xmin, xmax), (ymin, ymax), n_cells, n_cells, periodic)?;
    let n = grid.n_dofs();
    if n * problem.n_species * 8 > MEMORY_BUDGET_BYTES {
        return Err(Error::InvalidConfig(format!(
            "reference grid {n_cells}x{n_cells} exceeds the memory budget; use a smaller fine grid"
        )));
    }

    let scheme = FdScheme::new(problem, grid.clone(), SpaceOrder::Four, TimeScheme::Rk4);
    let dt = dt_cap.min(scheme.admissible_dt());
    let n_steps = (problem.t_final / dt).ceil() as usize;

    let cache_path = cache_dir.map(|dir| reference_cache_path(dir, problem, n_cells, n_steps));
    if let Some(path) = &cache_path {
        if let Ok((rx, ry, rs, values)) = read_raster(path) {
            if rx == grid.dofs_x() && ry == grid.dofs_y() && rs == problem.n_species {
                return Ok(ReferenceField {
                    grid,
                    n_species: problem.n_species,
                    values,
                });
            }
        }
    }

    let values = scheme.run(n_steps)?;
    if let Some(path) = &cache_path {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        write_raster(path, grid.dofs_x(), grid.dofs_y(), problem.n_species, &values)?;
    }
    Ok(ReferenceField {
        grid,
        n_species: problem.n_species,
        values,
    })
}

fn reference_cache_path(dir: &Path, problem: &ProblemSpec, n_cells: usize, n_steps: usize) -> PathBuf {
    let ((xmin, xmax), (ymin, ymax)) = problem.domain.bounds();
    let mut hasher = Sha256::new();
    hasher.update(format!(
        "{}|{xmin},{xmax},{ymin},{ymax}|nu={}|S={}|T={}|n={n_cells}|steps={n_steps}|fd4rk4",
        problem.name, problem.nu, problem.n_species, problem.t_final
    ));
    let digest = hasher.finalize();
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("sladr-ref-{hex}.raster"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_problem, Domain};
    use std::sync::Arc;

    fn constant_problem() -> ProblemSpec {
        ProblemSpec {
            name: "const".into(),
            domain: Domain::rect(0.0, 1.0, 0.0, 1.0),
            velocity: VelocityField::Zero,
            nu: 0.05,
            reaction: ReactionTerm::None,
            n_species: 1,
            initial: Arc::new(|_, _| 3.5),
            boundary_value: Arc::new(|_, _, _| 3.5),
            exact: None,
            t_final: 1.0,
            boundary: BoundaryKind::Periodic,
        }
    }

    #[test]
    fn stencils_differentiate_polynomials_exactly() {
        let h = 0.1;
        let sample = |f: &dyn Fn(f64) -> f64, k: isize| f(k as f64 * h);
        // Gradients are exact up to their formal order, Laplacians one
        // degree beyond.
        let check = |f: &dyn Fn(f64) -> f64, df: f64, d2f: f64, deg: u32| {
            let g2 = grad2(sample(f, -1), sample(f, 1), h);
            let g4 = grad4(sample(f, -2), sample(f, -1), sample(f, 1), sample(f, 2), h);
            let gu = grad_upwind_biased(
                sample(f, -3),
                sample(f, -2),
                sample(f, -1),
                sample(f, 0),
                sample(f, 1),
                sample(f, 2),
                h,
            );
            let l2v = lap2(sample(f, -1), sample(f, 0), sample(f, 1), h);
            let l4 = lap4(sample(f, -2), sample(f, -1), sample(f, 0), sample(f, 1), sample(f, 2), h);
            if deg <= 2 {
                assert!((g2 - df).abs() < 1e-11, "grad2 deg {deg}");
            }
            if deg <= 4 {
                assert!((g4 - df).abs() < 1e-11, "grad4 deg {deg}");
                assert!((gu - df).abs() < 1e-11, "upwind deg {deg}");
            }
            if deg <= 3 {
                assert!((l2v - d2f).abs() < 1e-10, "lap2 deg {deg}");
            }
            if deg <= 5 {
                assert!((l4 - d2f).abs() < 1e-10, "lap4 deg {deg}");
            }
        };
        check(&|_| 4.0, 0.0, 0.0, 0);
        check(&|x| x, 1.0, 0.0, 1);
        check(&|x| x * x, 0.0, 2.0, 2);
        check(&|x| x.powi(3), 0.0, 0.0, 3);
        check(&|x| x.powi(4), 0.0, 0.0, 4);
        check(&|x| x.powi(5), 0.0, 0.0, 5);
    }

    #[test]
    fn identity_without_physics_and_constant_preservation() {
        let mut problem = constant_problem();
        problem.nu = 0.0;
        let grid = StructuredGrid::new((0.0, 1.0), (0.0, 1.0), 16, 16, true).unwrap();
        let scheme = FdScheme::new(&problem, grid, SpaceOrder::Four, TimeScheme::Rk4);
        let c0 = scheme.initial_state();
        let mut c = c0.clone();
        scheme.step(&mut c, 0.0, 0.01).unwrap();
        assert_eq!(c, c0);

        let problem = constant_problem();
        let grid = StructuredGrid::new((0.0, 1.0), (0.0, 1.0), 16, 16, true).unwrap();
        let scheme = FdScheme::new(&problem, grid, SpaceOrder::Two, TimeScheme::Rk2);
        let mut c = scheme.initial_state();
        let dt = scheme.admissible_dt();
        scheme.step(&mut c, 0.0, dt).unwrap();
        for v in c {
            assert!((v - 3.5).abs() < 1e-13);
        }
    }

    #[test]
    fn heat_decay_matches_fourier_symbol() {
        // c0 = sin(2 pi x) on a periodic grid decays like
        // exp(-4 pi^2 nu t); the fourth-order run must track it closely.
        let problem = ProblemSpec {
            name: "heat".into(),
            domain: Domain::rect(0.0, 1.0, 0.0, 1.0),
            velocity: VelocityField::Zero,
            nu: 0.02,
            reaction: ReactionTerm::None,
            n_species: 1,
            initial: Arc::new(|p, _| (2.0 * std::f64::consts::PI * p.x).sin()),
            boundary_value: Arc::new(|_, _, _| 0.0),
            exact: None,
            t_final: 0.5,
            boundary: BoundaryKind::Periodic,
        };
        let grid = StructuredGrid::new((0.0, 1.0), (0.0, 1.0), 64, 64, true).unwrap();
        let scheme = FdScheme::new(&problem, grid.clone(), SpaceOrder::Four, TimeScheme::Rk4);
        let n_steps = (problem.t_final / scheme.admissible_dt()).ceil() as usize;
        let c = scheme.run(n_steps).unwrap();
        let decay = (-4.0 * std::f64::consts::PI.powi(2) * problem.nu * problem.t_final).exp();
        let mut worst: f64 = 0.0;
        for dof in 0..grid.n_dofs() {
            let x = grid.dof_coord(dof).x;
            let exact = decay * (2.0 * std::f64::consts::PI * x).sin();
            worst = worst.max((c[dof] - exact).abs());
        }
        assert!(worst < 1e-6 * decay.max(1e-3), "worst error {worst}");
    }

    #[test]
    fn unstable_step_is_rejected_with_admissible_value() {
        let problem = constant_problem();
        let grid = StructuredGrid::new((0.0, 1.0), (0.0, 1.0), 32, 32, true).unwrap();
        let scheme = FdScheme::new(&problem, grid, SpaceOrder::Four, TimeScheme::Rk4);
        let mut c = scheme.initial_state();
        let bad = 10.0 * scheme.admissible_dt();
        match scheme.step(&mut c, 0.0, bad) {
            Err(Error::UnstableTimeStep { dt_max, .. }) => {
                assert!(dt_max < bad);
            }
            other => panic!("expected stability error, got {other:?}"),
        }
    }

    #[test]
    fn reference_cache_roundtrip() {
        let problem = builtin_problem("allen_cahn(0.05)").unwrap();
        let dir = tempfile::tempdir().unwrap();
        // Tiny run, twice: second call must hit the cache and agree.
        let a = make_reference(&problem, 24, 1e-2, Some(dir.path())).unwrap();
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        let b = make_reference(&problem, 24, 1e-2, Some(dir.path())).unwrap();
        assert_eq!(a.values, b.values);
    }
}
