//! Time steppers treating advection and diffusion along generalized
//! characteristics.
//!
//! One step updates every dof `i` from interpolated values
//! `v_k = I_p[c^n](z_k)` at its K departure points:
//!
//! * `SL1` (first order, off-centering `theta` in [1/2, 1]):
//!   `c_i - theta dt f(c_i) = (1/4) sum_k [v_k + (1 - theta) dt f(v_k)]`
//!   over the four-point displacement set around the Euler foot;
//! * `SL2` (Crank-Nicolson, second order):
//!   `c_i - dt/2 f(c_i) = sum_k alpha_k [v_k + dt/2 f(v_k)]`
//!   over the nine-point set with coupled implicit trajectories;
//! * `SL2s`: same update on the decoupled substepped trajectories.
//!
//! In the `Reduced` evaluation mode the nonlinear term on the right is
//! evaluated once at `ctilde = sum_k alpha_k v_k` instead of at every
//! foot, trading one reaction evaluation per foot for a small splitting
//! term proportional to `nu f''(c) |grad c|^2 dt^2` per step.
//!
//! The nodewise implicit relation `c - w dt f(c) = A` is solved by Newton
//! iteration with the analytic jacobian, which keeps large reaction time
//! steps usable where a plain fixed point would stall.
//!
//! Feet leaving a Dirichlet domain are valued either from the
//! (extended) boundary data directly or through the ghost-layer
//! extrapolation; periodic domains wrap. Dirichlet dofs on the boundary
//! itself carry the boundary data exactly.

use rayon::prelude::*;

use crate::boundary::{build_ghost_layer, GhostLayer, GhostThickness, DEFAULT_C_H};
use crate::characteristics::{build_feet_table, FeetVariant, ALPHA_SECOND};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::interp::Interpolator;
use crate::mesh::GridFunction;
use crate::model::{
    BoundaryKind, CountingVelocity, ProblemSpec, ReactionTerm, Velocity, MAX_SPECIES,
};

pub const NEWTON_MAX_ITER: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Sl1,
    Sl2,
    Sl2s,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Sl1 => "sl1",
            Variant::Sl2 => "sl2",
            Variant::Sl2s => "sl2s",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonlinearMode {
    /// Reaction evaluated at every foot value.
    Full,
    /// Reaction evaluated once at the weighted mean of the foot values.
    Reduced,
}

/// How feet leaving a Dirichlet domain are valued.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExteriorMode {
    /// Ghost layer on triangulations, extended data on structured grids.
    Auto,
    /// Always evaluate the (extended) Dirichlet data at the exterior point.
    Data,
}

#[derive(Clone, Copy, Debug)]
pub struct SchemeConfig {
    pub variant: Variant,
    /// Off-centering of the SL1 reaction terms.
    pub theta: f64,
    pub dt: f64,
    /// Trajectory substeps for SL1/SL2s; `None` picks the smallest count
    /// with `dtau * L_u <= 0.5`.
    pub substeps: Option<usize>,
    pub nonlinear: NonlinearMode,
    /// Ghost layer sizing for Dirichlet runs on triangulations.
    pub ghost: GhostThickness,
    pub exterior: ExteriorMode,
}

impl SchemeConfig {
    pub fn new(variant: Variant, dt: f64) -> Self {
        Self {
            variant,
            theta: 1.0,
            dt,
            substeps: None,
            nonlinear: NonlinearMode::Full,
            ghost: GhostThickness::RelativeToDt { c_h: DEFAULT_C_H },
            exterior: ExteriorMode::Auto,
        }
    }

    pub fn with_substeps(mut self, m: usize) -> Self {
        self.substeps = Some(m);
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_nonlinear(mut self, mode: NonlinearMode) -> Self {
        self.nonlinear = mode;
        self
    }

    pub fn with_ghost(mut self, ghost: GhostThickness) -> Self {
        self.ghost = ghost;
        self
    }

    pub fn with_exterior(mut self, exterior: ExteriorMode) -> Self {
        self.exterior = exterior;
        self
    }
}

/// Per-run counters and per-step field bounds.
#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub steps: usize,
    pub velocity_evals: u64,
    pub trajectory_fixed_point_iters: u64,
    pub newton_iters: u64,
    /// One entry per step: (min, max) per species.
    pub bounds: Vec<Vec<(f64, f64)>>,
}

enum ExteriorPolicy {
    /// Periodic wrap; interpolation never fails.
    Periodic,
    /// Evaluate the (extended) Dirichlet data at the exterior point.
    DirichletData,
    /// Project onto the boundary and extrapolate from the ghost layer.
    Ghost(GhostLayer),
}

pub struct Solver<'p> {
    pub problem: &'p ProblemSpec,
    pub interp: Interpolator<'p>,
    pub config: SchemeConfig,
    coords: Vec<Point>,
    dirichlet_dofs: Vec<bool>,
    policy: ExteriorPolicy,
    state: GridFunction,
    step_index: usize,
    substeps: usize,
    pub diag: Diagnostics,
}

impl<'p> Solver<'p> {
    pub fn new(
        problem: &'p ProblemSpec,
        interp: Interpolator<'p>,
        config: SchemeConfig,
    ) -> Result<Self> {
        if !(config.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt = {} must be positive", config.dt)));
        }
        if !(0.5..=1.0).contains(&config.theta) {
            return Err(Error::InvalidConfig(format!(
                "theta = {} outside [1/2, 1]",
                config.theta
            )));
        }
        if problem.reaction == ReactionTerm::Lotka4 && problem.n_species != 4 {
            return Err(Error::InvalidConfig(
                "the four-species reaction needs n_species = 4".into(),
            ));
        }
        if problem.n_species > MAX_SPECIES {
            return Err(Error::InvalidConfig(format!(
                "n_species = {} exceeds the supported maximum {MAX_SPECIES}",
                problem.n_species
            )));
        }
        let l_u = problem.velocity.lipschitz();
        if matches!(config.variant, Variant::Sl2) && config.dt * l_u >= 1.999 {
            // Contraction of the trajectory fixed point needs dt L_u / 2 < 1.
            return Err(Error::UnstableTimeStep {
                dt: config.dt,
                dt_max: 1.999 / l_u,
            });
        }

        let policy = match problem.boundary {
            BoundaryKind::Periodic => match interp.grid() {
                Some(g) if g.periodic_x && g.periodic_y => ExteriorPolicy::Periodic,
                _ => {
                    return Err(Error::InvalidConfig(
                        "periodic problems need a periodic structured grid".into(),
                    ))
                }
            },
            BoundaryKind::Dirichlet => match (config.exterior, interp.trimesh()) {
                (ExteriorMode::Auto, Some(_)) => {
                    let h = config.ghost.thickness(config.dt);
                    ExteriorPolicy::Ghost(build_ghost_layer(&problem.domain, h)?)
                }
                _ => ExteriorPolicy::DirichletData,
            },
        };

        let coords = interp.dof_coords();
        let dirichlet_dofs = match problem.boundary {
            BoundaryKind::Dirichlet => interp.boundary_dof_flags(),
            BoundaryKind::Periodic => vec![false; coords.len()],
        };
        let state = GridFunction::from_fn(&coords, problem.n_species, |p, s| (problem.initial)(p, s));
        let substeps = config
            .substeps
            .unwrap_or_else(|| ((config.dt * l_u / 0.5).ceil() as usize).max(1));

        Ok(Self {
            problem,
            interp,
            config,
            coords,
            dirichlet_dofs,
            policy,
            state,
            step_index: 0,
            substeps,
            diag: Diagnostics::default(),
        })
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.config.dt
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn state(&self) -> &GridFunction {
        &self.state
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn ghost_layer(&self) -> Option<&GhostLayer> {
        match &self.policy {
            ExteriorPolicy::Ghost(l) => Some(l),
            _ => None,
        }
    }

    fn feet_variant(&self) -> FeetVariant {
        match self.config.variant {
            Variant::Sl1 => FeetVariant::Sl1 {
                substeps: self.substeps,
            },
            Variant::Sl2 => FeetVariant::Sl2,
            Variant::Sl2s => FeetVariant::Sl2s {
                substeps: self.substeps,
            },
        }
    }

    /// Advance one time step.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.config.dt;
        let t_n = self.time();
        let t_np1 = t_n + dt;
        let s_count = self.problem.n_species;
        let reaction = &self.problem.reaction;

        let counting = CountingVelocity::new(&self.problem.velocity);
        let feet = build_feet_table(
            &self.coords,
            t_np1,
            dt,
            self.feet_variant(),
            &counting,
            self.problem.nu,
        )?;
        self.diag.velocity_evals += counting.count();
        self.diag.trajectory_fixed_point_iters += feet.fixed_point_iters;

        // Ghost dofs are filled from c^n and b(., t_n) once per step.
        let ghost_values: Vec<Vec<f64>> = match &self.policy {
            ExteriorPolicy::Ghost(layer) => (0..s_count)
                .map(|s| {
                    layer.populate(&self.interp, self.state.species(s), &|p| {
                        (self.problem.boundary_value)(p, t_n, s)
                    })
                })
                .collect::<Result<_>>()?,
            _ => Vec::new(),
        };

        let k = feet.k;
        let weights: &[f64] = match self.config.variant {
            Variant::Sl1 => &[0.25; 4],
            _ => &ALPHA_SECOND,
        };
        let theta = self.config.theta;
        let state = &self.state;
        let interp = &self.interp;
        let policy = &self.policy;
        let problem = self.problem;
        let coords = &self.coords;
        let dirichlet = &self.dirichlet_dofs;
        let nonlinear = self.config.nonlinear;
        let variant = self.config.variant;

        let results: Result<Vec<([f64; MAX_SPECIES], u32)>> = (0..coords.len())
            .into_par_iter()
            .map(|i| {
                let mut out = [0.0; MAX_SPECIES];
                if dirichlet[i] {
                    for (s, o) in out.iter_mut().enumerate().take(s_count) {
                        *o = (problem.boundary_value)(coords[i], t_np1, s);
                    }
                    return Ok((out, 0));
                }

                // Weighted combinations of foot values and reaction terms.
                let mut mean = [0.0; MAX_SPECIES];
                let mut mean_f = [0.0; MAX_SPECIES];
                let mut v = [0.0; MAX_SPECIES];
                let mut fv = [0.0; MAX_SPECIES];
                let needs_foot_reaction = *reaction != ReactionTerm::None
                    && nonlinear == NonlinearMode::Full
                    && !(variant == Variant::Sl1 && theta == 1.0);
                for j in 0..k {
                    let z = feet.feet[i * k + j];
                    let w = weights[j];
                    match interp.stencil(interp.wrap(z)) {
                        Ok(st) => {
                            for (s, vs) in v.iter_mut().enumerate().take(s_count) {
                                *vs = st.apply(state.species(s));
                            }
                        }
                        Err(_) => match policy {
                            ExteriorPolicy::Periodic => {
                                return Err(Error::OutsideDomain { x: z.x, y: z.y })
                            }
                            ExteriorPolicy::DirichletData => {
                                for (s, vs) in v.iter_mut().enumerate().take(s_count) {
                                    *vs = (problem.boundary_value)(z, t_n, s);
                                }
                            }
                            ExteriorPolicy::Ghost(layer) => {
                                let mesh = interp.trimesh().expect("ghost policy on trimesh");
                                let proj = mesh.project_onto_domain(z)?;
                                let elem = layer.select_element(proj)?;
                                for (s, vs) in v.iter_mut().enumerate().take(s_count) {
                                    *vs = layer.eval(elem, z, &ghost_values[s]);
                                }
                            }
                        },
                    }
                    for s in 0..s_count {
                        mean[s] += w * v[s];
                    }
                    if needs_foot_reaction {
                        reaction.eval(&v[..s_count], &mut fv[..s_count]);
                        for s in 0..s_count {
                            mean_f[s] += w * fv[s];
                        }
                    }
                }

                // Right-hand side and implicit reaction weight.
                let mut rhs = [0.0; MAX_SPECIES];
                let w_implicit = match variant {
                    Variant::Sl1 => theta,
                    _ => 0.5,
                };
                match (variant, nonlinear) {
                    (Variant::Sl1, NonlinearMode::Full) => {
                        for s in 0..s_count {
                            rhs[s] = mean[s] + (1.0 - theta) * dt * mean_f[s];
                        }
                    }
                    (Variant::Sl1, NonlinearMode::Reduced) => {
                        reaction.eval(&mean[..s_count], &mut fv[..s_count]);
                        for s in 0..s_count {
                            rhs[s] = mean[s] + (1.0 - theta) * dt * fv[s];
                        }
                    }
                    (_, NonlinearMode::Full) => {
                        for s in 0..s_count {
                            rhs[s] = mean[s] + 0.5 * dt * mean_f[s];
                        }
                    }
                    (_, NonlinearMode::Reduced) => {
                        reaction.eval(&mean[..s_count], &mut fv[..s_count]);
                        for s in 0..s_count {
                            rhs[s] = mean[s] + 0.5 * dt * fv[s];
                        }
                    }
                }

                let iters = solve_reaction_implicit(
                    &rhs[..s_count],
                    dt,
                    w_implicit,
                    reaction,
                    i,
                    &mut out[..s_count],
                )?;
                Ok((out, iters))
            })
            .collect();
        let results = results?;

        let mut newton_total = 0u64;
        for s in 0..s_count {
            let slice = self.state.species_mut(s);
            for (i, (vals, _)) in results.iter().enumerate() {
                slice[i] = vals[s];
            }
        }
        for (_, iters) in &results {
            newton_total += *iters as u64;
        }
        self.diag.newton_iters += newton_total;

        self.step_index += 1;
        self.state.check_finite(self.step_index)?;
        let mut bounds = Vec::with_capacity(s_count);
        for s in 0..s_count {
            let sl = self.state.species(s);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &x in sl {
                lo = lo.min(x);
                hi = hi.max(x);
            }
            bounds.push((lo, hi));
        }
        self.diag.bounds.push(bounds);
        self.diag.steps += 1;
        Ok(())
    }

    /// Run `n` steps.
    pub fn run(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.step()?;
        }
        Ok(())
    }
}

/// Solve `c - w dt f(c) = a` with Newton iteration (analytic jacobian,
/// simple step halving on residual growth). Returns the iteration count.
pub fn solve_reaction_implicit(
    a: &[f64],
    dt: f64,
    w: f64,
    reaction: &ReactionTerm,
    node: usize,
    out: &mut [f64],
) -> Result<u32> {
    let s = a.len();
    out.copy_from_slice(a);
    if *reaction == ReactionTerm::None || w * dt == 0.0 {
        return Ok(0);
    }
    let wdt = w * dt;
    let norm_a = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-12 * (1.0 + norm_a);

    let mut f = [0.0; MAX_SPECIES];
    let mut g = [0.0; MAX_SPECIES];
    let mut jac = [0.0; MAX_SPECIES * MAX_SPECIES];
    let mut delta = [0.0; MAX_SPECIES];

    let residual = |c: &[f64], f: &mut [f64], g: &mut [f64]| -> f64 {
        reaction.eval(c, f);
        let mut n2 = 0.0;
        for i in 0..s {
            g[i] = c[i] - wdt * f[i] - a[i];
            n2 += g[i] * g[i];
        }
        n2.sqrt()
    };

    let mut res = residual(out, &mut f[..s], &mut g[..s]);
    for it in 0..NEWTON_MAX_ITER {
        if res <= tol {
            return Ok(it as u32);
        }
        reaction.jacobian(&out[..s], &mut jac[..s * s]);
        // System matrix I - w dt J.
        let mut m = [0.0; MAX_SPECIES * MAX_SPECIES];
        for i in 0..s {
            for j in 0..s {
                m[i * s + j] = if i == j { 1.0 } else { 0.0 } - wdt * jac[i * s + j];
            }
        }
        delta[..s].copy_from_slice(&g[..s]);
        if !solve_dense(s, &mut m[..s * s], &mut delta[..s]) {
            return Err(Error::ReactionDiverged {
                node,
                residual: res,
            });
        }
        // Damped update: halve until the residual stops growing.
        let mut lambda = 1.0;
        for _ in 0..5 {
            let mut trial = [0.0; MAX_SPECIES];
            for i in 0..s {
                trial[i] = out[i] - lambda * delta[i];
            }
            let trial_res = residual(&trial[..s], &mut f[..s], &mut g[..s]);
            if trial_res <= res || lambda <= 0.0625 {
                out[..s].copy_from_slice(&trial[..s]);
                res = trial_res;
                break;
            }
            lambda *= 0.5;
        }
    }
    if res <= tol {
        Ok(NEWTON_MAX_ITER as u32)
    } else {
        Err(Error::ReactionDiverged {
            node,
            residual: res,
        })
    }
}

/// In-place Gaussian elimination with partial pivoting for the small
/// per-node systems; `b` receives the solution. Returns false on a
/// (numerically) singular matrix.
fn solve_dense(n: usize, a: &mut [f64], b: &mut [f64]) -> bool {
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return false;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut x = b[col];
        for j in col + 1..n {
            x -= a[col * n + j] * b[j];
        }
        b[col] = x / a[col * n + col];
    }
    true
}
