//! Problem definitions: velocity fields, reaction terms with analytic
//! jacobians, and the built-in benchmark problems with their initial,
//! boundary and (where available) exact solutions.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::Point;

/// Velocity field evaluation. Implementations must be cheap: the
/// trajectory solvers call this inside fixed point iterations.
pub trait Velocity: Sync {
    fn eval(&self, p: Point, t: f64) -> Point;
    /// Bound on the spatial Lipschitz constant, used to size substeps and
    /// to check the fixed point contraction condition.
    fn lipschitz(&self) -> f64;
}

#[derive(Clone, Debug)]
pub enum VelocityField {
    Zero,
    Constant(Point),
    /// Rigid rotation `u = (-omega (y - cy), omega (x - cx))`.
    Rotation { omega: f64, center: Point },
    /// Potential flow around a disk of radius `r0`:
    /// `u1 = u0 + u0 r0^3 / (2 r^3) - 3 u0 r0^3 (x - x0)^2 / (2 r^5)`,
    /// `u2 = -3 u0 r0^3 (x - x0)(y - y0) / (2 r^5)`.
    PotentialFlowAroundDisk { u0: f64, r0: f64, center: Point },
}

impl Velocity for VelocityField {
    fn eval(&self, p: Point, _t: f64) -> Point {
        match *self {
            VelocityField::Zero => Point::new(0.0, 0.0),
            VelocityField::Constant(u) => u,
            VelocityField::Rotation { omega, center } => {
                Point::new(-omega * (p.y - center.y), omega * (p.x - center.x))
            }
            VelocityField::PotentialFlowAroundDisk { u0, r0, center } => {
                let dx = p.x - center.x;
                let dy = p.y - center.y;
                // The formula is singular at the disk center; clamp the
                // radius so stray evaluations inside the obstacle stay
                // bounded.
                let r2 = (dx * dx + dy * dy).max(0.25 * r0 * r0);
                let r = r2.sqrt();
                let r3 = r2 * r;
                let r5 = r2 * r3;
                let k = u0 * r0 * r0 * r0;
                Point::new(
                    u0 + k / (2.0 * r3) - 3.0 * k * dx * dx / (2.0 * r5),
                    -3.0 * k * dx * dy / (2.0 * r5),
                )
            }
        }
    }

    fn lipschitz(&self) -> f64 {
        match *self {
            VelocityField::Zero | VelocityField::Constant(_) => 0.0,
            VelocityField::Rotation { omega, .. } => omega.abs(),
            // Gradient magnitude peaks at O(u0 / r0) on the disk surface.
            VelocityField::PotentialFlowAroundDisk { u0, r0, .. } => 8.0 * u0.abs() / r0,
        }
    }
}

impl VelocityField {
    /// Largest velocity component magnitude over the domain, the
    /// normalization used for Courant numbers.
    pub fn max_component_speed(&self, domain: &Domain) -> f64 {
        let ((xmin, xmax), (ymin, ymax)) = domain.bounds();
        match *self {
            VelocityField::Zero => 0.0,
            VelocityField::Constant(u) => u.x.abs().max(u.y.abs()),
            VelocityField::Rotation { omega, center } => {
                let mx = (xmin - center.x).abs().max((xmax - center.x).abs());
                let my = (ymin - center.y).abs().max((ymax - center.y).abs());
                omega.abs() * mx.max(my)
            }
            VelocityField::PotentialFlowAroundDisk { u0, .. } => 1.5 * u0.abs(),
        }
    }
}

/// Wrapper counting evaluations; proves that trajectory work does not
/// scale with the number of species.
pub struct CountingVelocity<'a> {
    inner: &'a dyn Velocity,
    count: AtomicU64,
}

impl<'a> CountingVelocity<'a> {
    pub fn new(inner: &'a dyn Velocity) -> Self {
        Self {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

impl Velocity for CountingVelocity<'_> {
    fn eval(&self, p: Point, t: f64) -> Point {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(p, t)
    }

    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }
}

pub const MAX_SPECIES: usize = 4;

/// Reaction terms `f(c_1..c_S)` with analytic jacobians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReactionTerm {
    None,
    /// `f(c) = rate * c` componentwise.
    Linear { rate: f64 },
    /// `f(c) = c - c^3`.
    AllenCahn,
    /// Two coupled prey-predator pairs with weak cross-migration.
    Lotka4,
}

impl ReactionTerm {
    pub fn n_species(&self) -> usize {
        match self {
            ReactionTerm::Lotka4 => 4,
            _ => 1,
        }
    }

    /// `out[k] = f_k(c)`; `c` and `out` hold one value per species.
    pub fn eval(&self, c: &[f64], out: &mut [f64]) {
        match *self {
            ReactionTerm::None => out.fill(0.0),
            ReactionTerm::Linear { rate } => {
                for (o, &v) in out.iter_mut().zip(c) {
                    *o = rate * v;
                }
            }
            ReactionTerm::AllenCahn => {
                for (o, &v) in out.iter_mut().zip(c) {
                    *o = v - v * v * v;
                }
            }
            ReactionTerm::Lotka4 => {
                let (c1, c2, c3, c4) = (c[0], c[1], c[2], c[3]);
                out[0] = (c1 - c1 * c2) - (c1 - c3) / 5.0;
                out[1] = -2.0 * (c2 - c1 * c2) - (c2 - c4) / 5.0;
                out[2] = 2.0 * (c3 - c3 * c4);
                out[3] = -4.0 * (c4 - c3 * c4);
            }
        }
    }

    /// Row-major jacobian `out[k * S + m] = d f_k / d c_m`.
    pub fn jacobian(&self, c: &[f64], out: &mut [f64]) {
        match *self {
            ReactionTerm::None => out.fill(0.0),
            ReactionTerm::Linear { rate } => {
                out.fill(0.0);
                let s = c.len();
                for k in 0..s {
                    out[k * s + k] = rate;
                }
            }
            ReactionTerm::AllenCahn => {
                for (o, &v) in out.iter_mut().zip(c) {
                    *o = 1.0 - 3.0 * v * v;
                }
            }
            ReactionTerm::Lotka4 => {
                let (c1, c2, c3, c4) = (c[0], c[1], c[2], c[3]);
                #[rustfmt::skip]
                let j = [
                    1.0 - c2 - 0.2, -c1,                 0.2,             0.0,
                    2.0 * c2,       -2.0 * (1.0 - c1) - 0.2, 0.0,         0.2,
                    0.0,            0.0,                 2.0 * (1.0 - c4), -2.0 * c3,
                    0.0,            0.0,                 4.0 * c4,        -4.0 * (1.0 - c3),
                ];
                out[..16].copy_from_slice(&j);
            }
        }
    }

    /// Lipschitz bound over the states reached by the built-in problems.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            ReactionTerm::None => 0.0,
            ReactionTerm::Linear { rate } => rate.abs(),
            // |f'(c)| <= 1 + 3 c^2; solutions stay within |c| <= 1.1.
            ReactionTerm::AllenCahn => 5.0,
            // States stay within |c_k| <= 4 in the benchmark window.
            ReactionTerm::Lotka4 => 12.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Rect {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },
    RectWithHole {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
        center: Point,
        radius: f64,
    },
}

impl Domain {
    pub fn rect(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Domain::Rect {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    pub fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        match *self {
            Domain::Rect {
                xmin,
                xmax,
                ymin,
                ymax,
            }
            | Domain::RectWithHole {
                xmin,
                xmax,
                ymin,
                ymax,
                ..
            } => ((xmin, xmax), (ymin, ymax)),
        }
    }

    pub fn hole(&self) -> Option<(Point, f64)> {
        match *self {
            Domain::RectWithHole { center, radius, .. } => Some((center, radius)),
            Domain::Rect { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Periodic,
}

pub type InitialData = Arc<dyn Fn(Point, usize) -> f64 + Send + Sync>;
pub type SpaceTimeField = Arc<dyn Fn(Point, f64, usize) -> f64 + Send + Sync>;

/// Full problem description: domain, coefficients, data and final time.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Domain,
    pub velocity: VelocityField,
    pub nu: f64,
    pub reaction: ReactionTerm,
    pub n_species: usize,
    pub initial: InitialData,
    /// Dirichlet data, defined (at least) on the boundary; the built-in
    /// problems extend it smoothly off the boundary where an exact
    /// solution exists.
    pub boundary_value: SpaceTimeField,
    pub exact: Option<SpaceTimeField>,
    pub t_final: f64,
    pub boundary: BoundaryKind,
}

impl ProblemSpec {
    /// Diffusion coefficient of the underlying stochastic trajectories.
    pub fn sigma(&self) -> f64 {
        (2.0 * self.nu).sqrt()
    }
}

/// Decaying Gaussian solving `c_t = nu (c_xx + c_yy)` on the whole plane
/// with `c(x, y, 0) = exp(-(x^2 + y^2) / (2 sigma0^2))`.
pub fn gaussian_diffusion_exact(x: f64, y: f64, t: f64, nu: f64, sigma0: f64) -> f64 {
    let s2 = sigma0 * sigma0;
    let amp = 1.0 / (1.0 + 2.0 * nu * t / s2);
    amp * (-(x * x + y * y) / (2.0 * (s2 + 2.0 * nu * t))).exp()
}

/// Same Gaussian advected by the rigid rotation of angular velocity
/// `omega` about the origin, starting from center `(x0, y0)`.
pub fn rotating_gaussian_exact(
    x: f64,
    y: f64,
    t: f64,
    nu: f64,
    sigma0: f64,
    omega: f64,
    x0: f64,
    y0: f64,
) -> f64 {
    let (s, c) = (omega * t).sin_cos();
    let cx = x0 * c - y0 * s;
    let cy = x0 * s + y0 * c;
    gaussian_diffusion_exact(x - cx, y - cy, t, nu, sigma0)
}

/// Gaussian advected by the constant field `(ux, uy)`.
pub fn translating_gaussian_exact(
    x: f64,
    y: f64,
    t: f64,
    nu: f64,
    sigma0: f64,
    ux: f64,
    uy: f64,
    x0: f64,
    y0: f64,
) -> f64 {
    gaussian_diffusion_exact(x - x0 - ux * t, y - y0 - uy * t, t, nu, sigma0)
}

pub const PROBLEM_NAMES: &str = "pure_diffusion, solid_rotation, allen_cahn(<nu>), lotka4, \
     bc_diffusion, bc_advection, bc_rotation, nonconvex_channel";

/// Build one of the named benchmark problems. `allen_cahn` takes the
/// diffusivity in parentheses, e.g. `allen_cahn(0.01)`.
pub fn builtin_problem(name: &str) -> Result<ProblemSpec> {
    let unknown = || Error::UnknownProblem {
        name: name.to_string(),
        valid: PROBLEM_NAMES.to_string(),
    };
    if let Some(arg) = name
        .strip_prefix("allen_cahn(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let nu: f64 = arg.trim().parse().map_err(|_| unknown())?;
        if !(nu > 0.0) {
            return Err(unknown());
        }
        return Ok(allen_cahn(nu));
    }
    match name {
        "pure_diffusion" => Ok(pure_diffusion()),
        "solid_rotation" => Ok(solid_rotation()),
        "allen_cahn" => Ok(allen_cahn(0.05)),
        "lotka4" => Ok(lotka4()),
        "bc_diffusion" => Ok(bc_gaussian(VelocityField::Zero, "bc_diffusion")),
        "bc_advection" => Ok(bc_gaussian(
            VelocityField::Constant(Point::new(1.0, 0.0)),
            "bc_advection",
        )),
        "bc_rotation" => Ok(bc_gaussian(
            VelocityField::Rotation {
                omega: 2.0 * std::f64::consts::PI,
                center: Point::new(0.0, 0.0),
            },
            "bc_rotation",
        )),
        "nonconvex_channel" => Ok(nonconvex_channel()),
        _ => Err(unknown()),
    }
}

fn pure_diffusion() -> ProblemSpec {
    let nu = 0.05;
    let sigma0 = 0.1;
    let exact: SpaceTimeField =
        Arc::new(move |p, t, _| gaussian_diffusion_exact(p.x, p.y, t, nu, sigma0));
    let e0 = exact.clone();
    let eb = exact.clone();
    ProblemSpec {
        name: "pure_diffusion".into(),
        domain: Domain::rect(-2.0, 2.0, -2.0, 2.0),
        velocity: VelocityField::Zero,
        nu,
        reaction: ReactionTerm::None,
        n_species: 1,
        initial: Arc::new(move |p, s| e0(p, 0.0, s)),
        boundary_value: eb,
        exact: Some(exact),
        t_final: 1.0,
        boundary: BoundaryKind::Dirichlet,
    }
}

fn solid_rotation() -> ProblemSpec {
    let nu = 0.05;
    let sigma0 = 0.05;
    let omega = 2.0 * std::f64::consts::PI;
    let exact: SpaceTimeField =
        Arc::new(move |p, t, _| rotating_gaussian_exact(p.x, p.y, t, nu, sigma0, omega, 1.0, 0.0));
    let e0 = exact.clone();
    let eb = exact.clone();
    ProblemSpec {
        name: "solid_rotation".into(),
        domain: Domain::rect(-2.0, 2.0, -2.0, 2.0),
        velocity: VelocityField::Rotation {
            omega,
            center: Point::new(0.0, 0.0),
        },
        nu,
        reaction: ReactionTerm::None,
        n_species: 1,
        initial: Arc::new(move |p, s| e0(p, 0.0, s)),
        boundary_value: eb,
        exact: Some(exact),
        t_final: 1.0,
        boundary: BoundaryKind::Dirichlet,
    }
}

fn allen_cahn(nu: f64) -> ProblemSpec {
    use std::f64::consts::PI;
    ProblemSpec {
        name: format!("allen_cahn({nu})"),
        domain: Domain::rect(0.0, 1.0, 0.0, 1.0),
        velocity: VelocityField::Zero,
        nu,
        reaction: ReactionTerm::AllenCahn,
        n_species: 1,
        initial: Arc::new(|p, _| (2.0 * PI * p.x).sin() * (2.0 * PI * p.y).sin()),
        boundary_value: Arc::new(|_, _, _| 0.0),
        exact: None,
        t_final: 2.0,
        boundary: BoundaryKind::Periodic,
    }
}

fn lotka4() -> ProblemSpec {
    use std::f64::consts::PI;
    // Compactly supported cosine bump centered at (-2.5, 0); species 2 and
    // 4 start at three times the bump of species 1 and 3.
    let bump = |p: Point| {
        let r2 = (p.x + 2.5) * (p.x + 2.5) + p.y * p.y;
        if r2 <= 0.25 {
            (2.0 * PI * r2).cos()
        } else {
            0.0
        }
    };
    ProblemSpec {
        name: "lotka4".into(),
        domain: Domain::rect(-5.0, 5.0, -5.0, 5.0),
        velocity: VelocityField::Rotation {
            omega: 2.0 * PI / 10.0,
            center: Point::new(0.0, 0.0),
        },
        nu: 0.01,
        reaction: ReactionTerm::Lotka4,
        n_species: 4,
        initial: Arc::new(move |p, s| if s % 2 == 0 { bump(p) } else { 3.0 * bump(p) }),
        boundary_value: Arc::new(|_, _, _| 0.0),
        exact: None,
        t_final: 5.0,
        boundary: BoundaryKind::Periodic,
    }
}

/// Gaussian initial datum at (0.5, 0) on (-1,1)^2 with the exact solution
/// enforced as time-dependent Dirichlet data.
fn bc_gaussian(velocity: VelocityField, name: &str) -> ProblemSpec {
    let nu = 0.05;
    let sigma0 = 0.1;
    let exact: SpaceTimeField = match velocity {
        VelocityField::Zero => {
            Arc::new(move |p, t, _| gaussian_diffusion_exact(p.x - 0.5, p.y, t, nu, sigma0))
        }
        VelocityField::Constant(u) => Arc::new(move |p, t, _| {
            translating_gaussian_exact(p.x, p.y, t, nu, sigma0, u.x, u.y, 0.5, 0.0)
        }),
        VelocityField::Rotation { omega, .. } => Arc::new(move |p, t, _| {
            rotating_gaussian_exact(p.x, p.y, t, nu, sigma0, omega, 0.5, 0.0)
        }),
        _ => unreachable!("bc problems use zero, constant or rotation fields"),
    };
    let e0 = exact.clone();
    let eb = exact.clone();
    ProblemSpec {
        name: name.into(),
        domain: Domain::rect(-1.0, 1.0, -1.0, 1.0),
        velocity,
        nu,
        reaction: ReactionTerm::None,
        n_species: 1,
        initial: Arc::new(move |p, s| e0(p, 0.0, s)),
        boundary_value: eb,
        exact: Some(exact),
        t_final: 1.0,
        boundary: BoundaryKind::Dirichlet,
    }
}

fn nonconvex_channel() -> ProblemSpec {
    let center = Point::new(0.1, 0.2);
    let radius = 0.05;
    ProblemSpec {
        name: "nonconvex_channel".into(),
        domain: Domain::RectWithHole {
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 0.4,
            center,
            radius,
        },
        velocity: VelocityField::PotentialFlowAroundDisk {
            u0: 0.2,
            r0: radius,
            center,
        },
        nu: 0.001,
        reaction: ReactionTerm::None,
        n_species: 1,
        initial: Arc::new(|_, _| 0.0),
        boundary_value: Arc::new(move |p, _t, _| {
            // Value 1 on the obstacle (with slack covering the
            // polygonalized hole), parabolic profile on the inlet, zero on
            // the remaining walls.
            if p.dist(center) <= 1.2 * radius {
                1.0
            } else if p.x.abs() <= 1e-9 {
                p.y * (0.4 - p.y) * 4.0 / (0.4 * 0.4)
            } else {
                0.0
            }
        }),
        exact: None,
        t_final: 3.0,
        boundary: BoundaryKind::Dirichlet,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_peak_values() {
        assert!((gaussian_diffusion_exact(0.0, 0.0, 0.0, 0.05, 0.1) - 1.0).abs() < 1e-15);
        let v = gaussian_diffusion_exact(0.0, 0.0, 1.0, 0.05, 0.1);
        assert!((v - 1.0 / 11.0).abs() < 1e-14);
        assert!(gaussian_diffusion_exact(50.0, 50.0, 1.0, 0.05, 0.1) < 1e-300);
    }

    #[test]
    fn rotating_gaussian_limits() {
        // t = 0 recovers a Gaussian at the initial center.
        let v0 = rotating_gaussian_exact(1.0, 0.0, 0.0, 0.05, 0.1, 2.0, 1.0, 0.0);
        assert!((v0 - 1.0).abs() < 1e-15);
        // After one full period the center is back: peak equals the pure
        // diffusion amplitude.
        let omega = 2.0 * std::f64::consts::PI;
        let v1 = rotating_gaussian_exact(1.0, 0.0, 1.0, 0.05, 0.1, omega, 1.0, 0.0);
        assert!((v1 - gaussian_diffusion_exact(0.0, 0.0, 1.0, 0.05, 0.1)).abs() < 1e-12);
        // omega = 0 reduces to the translated pure diffusion solution.
        let v2 = rotating_gaussian_exact(0.3, 0.2, 0.7, 0.05, 0.1, 0.0, 1.0, 0.0);
        assert!((v2 - gaussian_diffusion_exact(0.3 - 1.0, 0.2, 0.7, 0.05, 0.1)).abs() < 1e-15);
    }

    #[test]
    fn builtin_parameters_match_their_definitions() {
        let p = builtin_problem("pure_diffusion").unwrap();
        assert_eq!(p.domain, Domain::rect(-2.0, 2.0, -2.0, 2.0));
        assert_eq!(p.nu, 0.05);
        assert_eq!(p.t_final, 1.0);
        assert_eq!((p.initial)(Point::new(0.0, 0.0), 0), 1.0);

        let ac = builtin_problem("allen_cahn(0.01)").unwrap();
        assert_eq!(ac.nu, 0.01);
        assert_eq!(ac.boundary, BoundaryKind::Periodic);
        assert_eq!(ac.t_final, 2.0);
        let v = (ac.initial)(Point::new(0.25, 0.25), 0);
        assert!((v - 1.0).abs() < 1e-12);

        let lk = builtin_problem("lotka4").unwrap();
        assert_eq!(lk.n_species, 4);
        assert_eq!(lk.nu, 0.01);
        assert_eq!(lk.t_final, 5.0);
        let c = Point::new(-2.5, 0.0);
        assert!(((lk.initial)(c, 0) - 1.0).abs() < 1e-12);
        assert!(((lk.initial)(c, 1) - 3.0).abs() < 1e-12);
        match lk.velocity {
            VelocityField::Rotation { omega, .. } => {
                assert!((omega - 2.0 * std::f64::consts::PI / 10.0).abs() < 1e-15)
            }
            _ => panic!("lotka4 should rotate"),
        }

        assert!(builtin_problem("no_such_problem").is_err());
    }

    #[test]
    fn exact_solutions_satisfy_the_pde() {
        // Central finite difference residual of c_t + u.grad c - nu lap c
        // at random interior space-time points.
        let h = 1e-4;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for name in ["pure_diffusion", "solid_rotation", "bc_advection", "bc_rotation"] {
            let prob = builtin_problem(name).unwrap();
            let exact = prob.exact.clone().unwrap();
            let ((xmin, xmax), (ymin, ymax)) = prob.domain.bounds();
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let p = Point::new(
                    rng.gen_range(xmin * 0.5..xmax * 0.5),
                    rng.gen_range(ymin * 0.5..ymax * 0.5),
                );
                let t = rng.gen_range(0.1..prob.t_final);
                let c = |q: Point, tt: f64| exact(q, tt, 0);
                let ct = (c(p, t + h) - c(p, t - h)) / (2.0 * h);
                let cx = (c(Point::new(p.x + h, p.y), t) - c(Point::new(p.x - h, p.y), t)) / (2.0 * h);
                let cy = (c(Point::new(p.x, p.y + h), t) - c(Point::new(p.x, p.y - h), t)) / (2.0 * h);
                let cxx = (c(Point::new(p.x + h, p.y), t) - 2.0 * c(p, t)
                    + c(Point::new(p.x - h, p.y), t))
                    / (h * h);
                let cyy = (c(Point::new(p.x, p.y + h), t) - 2.0 * c(p, t)
                    + c(Point::new(p.x, p.y - h), t))
                    / (h * h);
                let u = prob.velocity.eval(p, t);
                let residual = ct + u.x * cx + u.y * cy - prob.nu * (cxx + cyy);
                worst = worst.max(residual.abs());
            }
            assert!(worst < 1e-4, "{name}: residual {worst}");
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for reaction in [ReactionTerm::AllenCahn, ReactionTerm::Lotka4] {
            let s = reaction.n_species();
            let h = 1e-6;
            for _ in 0..100 {
                let c: Vec<f64> = (0..s).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let mut jac = vec![0.0; s * s];
                reaction.jacobian(&c, &mut jac);
                let mut fp = vec![0.0; s];
                let mut fm = vec![0.0; s];
                for m in 0..s {
                    let mut cp = c.clone();
                    let mut cm = c.clone();
                    cp[m] += h;
                    cm[m] -= h;
                    reaction.eval(&cp, &mut fp);
                    reaction.eval(&cm, &mut fm);
                    for k in 0..s {
                        let fd = (fp[k] - fm[k]) / (2.0 * h);
                        let scale = jac[k * s + m].abs().max(1.0);
                        assert!(
                            (jac[k * s + m] - fd).abs() <= 1e-6 * scale,
                            "{reaction:?} d f_{k} / d c_{m}: {} vs {}",
                            jac[k * s + m],
                            fd
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn channel_boundary_data_cases() {
        let p = builtin_problem("nonconvex_channel").unwrap();
        let b = &p.boundary_value;
        assert_eq!(b(Point::new(0.0, 0.2), 0.0, 0), 1.0); // inlet peak
        assert_eq!(b(Point::new(0.0, 0.0), 0.0, 0), 0.0);
        assert_eq!(b(Point::new(0.15, 0.2), 0.0, 0), 1.0); // hole surface
        assert_eq!(b(Point::new(0.5, 0.0), 0.0, 0), 0.0);
        assert!((1.5 * 0.2 - p.velocity.max_component_speed(&p.domain)).abs() < 1e-12);
    }

    #[test]
    fn counting_velocity_counts() {
        let field = VelocityField::Rotation {
            omega: 1.0,
            center: Point::new(0.0, 0.0),
        };
        let counting = CountingVelocity::new(&field);
        for i in 0..10 {
            counting.eval(Point::new(i as f64, 0.0), 0.0);
        }
        assert_eq!(counting.count(), 10);
    }
}
