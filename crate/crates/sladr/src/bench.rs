//! Benchmark suites: error metrics, convergence rates and the named
//! resolution sweeps producing the convergence tables, written as CSV
//! with `#` metadata comment lines and the header
//! `dx,dt,lambda,mu,l2,linf,p2,pinf`.
//!
//! `lambda` and `mu` are always recomputed from the effective step
//! (`lambda = dt max|u| / dx`, `mu = dt nu / dx^2`), never echoed from
//! the requested values: the step count is rounded so that `N dt` hits
//! the final time exactly, which perturbs the requested parameters
//! slightly.

use std::path::Path;
use std::time::Instant;

use crate::boundary::GhostThickness;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::interp::Interpolator;
use crate::mesh::{gen_channel_trimesh, gen_square_trimesh, StructuredGrid};
use crate::model::{builtin_problem, BoundaryKind, ProblemSpec};
use crate::oracle::{make_reference, ReferenceField};
use crate::schemes::{SchemeConfig, Solver, Variant};

/// Relative l2 and max-norm distances between a computed dof vector and
/// reference values on the same dofs.
pub fn rel_error(values: &[f64], reference: &[f64]) -> Result<(f64, f64)> {
    assert_eq!(values.len(), reference.len());
    let mut num2 = 0.0;
    let mut den2 = 0.0;
    let mut num_inf: f64 = 0.0;
    let mut den_inf: f64 = 0.0;
    for (v, r) in values.iter().zip(reference) {
        num2 += (v - r) * (v - r);
        den2 += r * r;
        num_inf = num_inf.max((v - r).abs());
        den_inf = den_inf.max(r.abs());
    }
    if den2 == 0.0 || den_inf == 0.0 {
        return Err(Error::ZeroReferenceNorm);
    }
    Ok(((num2 / den2).sqrt(), num_inf / den_inf))
}

/// Observed convergence rate `log(e_coarse / e_fine) / log(ratio)`.
pub fn conv_rate(e_coarse: f64, e_fine: f64, ratio: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0 && ratio > 1.0) {
        return Err(Error::InvalidRateInput {
            coarse: e_coarse,
            fine: e_fine,
            ratio,
        });
    }
    Ok((e_coarse / e_fine).ln() / ratio.ln())
}

/// How one row's time step is prescribed.
#[derive(Clone, Copy, Debug)]
pub enum RowTiming {
    Dt(f64),
    /// Parabolic parameter `mu = dt nu / dx^2`.
    Mu(f64),
    /// Courant number `lambda = dt max|u| / dx`.
    Lambda(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct RowSpec {
    pub dx: f64,
    pub timing: RowTiming,
    /// Absolute ghost layer thickness; default is `1.5 sqrt(dt)`.
    pub ghost_h: Option<f64>,
}

impl RowSpec {
    pub const fn mu(dx: f64, mu: f64) -> Self {
        Self {
            dx,
            timing: RowTiming::Mu(mu),
            ghost_h: None,
        }
    }

    pub const fn dt(dx: f64, dt: f64) -> Self {
        Self {
            dx,
            timing: RowTiming::Dt(dt),
            ghost_h: None,
        }
    }

    pub const fn mu_h(dx: f64, mu: f64, h: f64) -> Self {
        Self {
            dx,
            timing: RowTiming::Mu(mu),
            ghost_h: Some(h),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    Structured,
    Triangular,
}

/// Which rows are compared for the rate columns, and which refinement
/// ratio enters the logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// Each row against the previous one, ratio from dx.
    AdjacentDx,
    /// Every row against the first, ratio from dt.
    VsFirstDt,
    /// Row i against row i-2, ratio from dx.
    StrideTwoDx,
}

impl Pairing {
    fn describe(&self) -> &'static str {
        match self {
            Pairing::AdjacentDx => "each row vs previous row, ratio from dx",
            Pairing::VsFirstDt => "each row vs first row, ratio from dt",
            Pairing::StrideTwoDx => "row i vs row i-2, ratio from dx",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchGroup {
    pub problem_name: String,
    pub mesh: MeshKind,
    pub rows: Vec<RowSpec>,
    pub pairing: Pairing,
    pub variants: Vec<Variant>,
}

#[derive(Clone, Debug)]
pub struct Suite {
    pub name: &'static str,
    pub groups: Vec<BenchGroup>,
}

pub const SUITE_NAMES: &[&str] = &[
    "pure_diffusion",
    "solid_rotation",
    "solid_rotation_unstr",
    "allen_cahn",
    "bc_diffusion",
    "bc_advection",
    "bc_rotation",
    "nonconvex_channel",
];

pub fn suite(name: &str) -> Result<Suite> {
    let groups = match name {
        "pure_diffusion" => vec![BenchGroup {
            problem_name: "pure_diffusion".into(),
            mesh: MeshKind::Structured,
            rows: vec![
                RowSpec::mu(0.08, 0.84),
                RowSpec::mu(0.04, 1.6),
                RowSpec::mu(0.02, 3.2),
            ],
            pairing: Pairing::AdjacentDx,
            variants: vec![Variant::Sl1, Variant::Sl2],
        }],
        "solid_rotation" | "solid_rotation_unstr" => {
            let mesh = if name == "solid_rotation" {
                MeshKind::Structured
            } else {
                MeshKind::Triangular
            };
            let variants = if name == "solid_rotation" {
                vec![Variant::Sl1, Variant::Sl2s, Variant::Sl2]
            } else {
                vec![Variant::Sl2s, Variant::Sl2]
            };
            vec![BenchGroup {
                problem_name: "solid_rotation".into(),
                mesh,
                rows: vec![
                    RowSpec::mu(0.04, 1.62),
                    RowSpec::mu(0.04, 0.82),
                    RowSpec::mu(0.02, 3.2),
                    RowSpec::mu(0.02, 1.6),
                ],
                pairing: Pairing::VsFirstDt,
                variants,
            }]
        }
        "allen_cahn" => ["allen_cahn(0.01)", "allen_cahn(0.05)"]
            .iter()
            .map(|p| BenchGroup {
                problem_name: (*p).into(),
                mesh: MeshKind::Structured,
                rows: vec![
                    RowSpec::dt(0.04, 0.1),
                    RowSpec::dt(0.02, 0.05),
                    RowSpec::dt(0.01, 0.025),
                ],
                pairing: Pairing::AdjacentDx,
                variants: vec![Variant::Sl2],
            })
            .collect(),
        "bc_diffusion" | "bc_advection" | "bc_rotation" => vec![BenchGroup {
            problem_name: name.into(),
            mesh: MeshKind::Triangular,
            rows: vec![
                RowSpec::mu_h(0.04, 1.56, 0.5),
                RowSpec::mu_h(0.04, 0.78, 0.5),
                RowSpec::mu_h(0.02, 3.12, 0.33),
                RowSpec::mu_h(0.02, 1.56, 0.33),
            ],
            pairing: Pairing::StrideTwoDx,
            variants: vec![Variant::Sl2],
        }],
        "nonconvex_channel" => vec![],
        _ => {
            return Err(Error::UnknownSuite {
                name: name.into(),
                valid: SUITE_NAMES.join(", "),
            })
        }
    };
    Ok(Suite {
        name: SUITE_NAMES
            .iter()
            .find(|n| **n == name)
            .copied()
            .unwrap_or("custom"),
        groups,
    })
}

#[derive(Clone, Debug)]
pub struct ReportRow {
    pub dx: f64,
    pub dt: f64,
    pub lambda: f64,
    pub mu: f64,
    pub l2: f64,
    pub linf: f64,
    pub p2: Option<f64>,
    pub pinf: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub suite: String,
    pub problem: String,
    pub scheme: &'static str,
    pub mesh: &'static str,
    pub interp: &'static str,
    pub pairing: &'static str,
    pub rows: Vec<ReportRow>,
}

impl ErrorReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# suite={}\n", self.suite));
        out.push_str(&format!("# problem={}\n", self.problem));
        out.push_str(&format!("# scheme={}\n", self.scheme));
        out.push_str(&format!("# mesh={}\n", self.mesh));
        out.push_str(&format!("# interp={}\n", self.interp));
        out.push_str(&format!("# rates={}\n", self.pairing));
        out.push_str("dx,dt,lambda,mu,l2,linf,p2,pinf\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.dx,
                r.dt,
                r.lambda,
                r.mu,
                r.l2,
                r.linf,
                opt(r.p2),
                opt(r.pinf)
            ));
        }
        out
    }
}

/// Effective step count and size: `N = round(T / dt_target)` with
/// `N dt = T` enforced. A step so large that no whole step fits is an
/// error: the final time must be reached.
pub fn resolve_steps(t_final: f64, dt_target: f64) -> Result<(usize, f64)> {
    if !(dt_target > 0.0) || !(t_final > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "cannot split T = {t_final} into steps of dt = {dt_target}"
        )));
    }
    let n = (t_final / dt_target).round() as usize;
    if n == 0 {
        return Err(Error::InvalidConfig(format!(
            "dt = {dt_target} exceeds the final time T = {t_final}; no step would run"
        )));
    }
    Ok((n, t_final / n as f64))
}

fn row_dt_target(problem: &ProblemSpec, row: &RowSpec) -> Result<f64> {
    match row.timing {
        RowTiming::Dt(dt) => Ok(dt),
        RowTiming::Mu(mu) => {
            if problem.nu <= 0.0 {
                return Err(Error::InvalidConfig(
                    "mu-based timing needs a positive diffusivity".into(),
                ));
            }
            Ok(mu * row.dx * row.dx / problem.nu)
        }
        RowTiming::Lambda(lambda) => {
            let umax = problem.velocity.max_component_speed(&problem.domain);
            if umax <= 0.0 {
                return Err(Error::InvalidConfig(
                    "lambda-based timing needs a nonzero velocity".into(),
                ));
            }
            Ok(lambda * row.dx / umax)
        }
    }
}

/// Run one suite group with one scheme variant. `rows` overrides the
/// group's resolution list when non-empty.
pub fn run_group(
    group: &BenchGroup,
    variant: Variant,
    rows: &[RowSpec],
    cache_dir: Option<&Path>,
) -> Result<ErrorReport> {
    let problem = builtin_problem(&group.problem_name)?;
    let rows: Vec<RowSpec> = if rows.is_empty() {
        group.rows.clone()
    } else {
        rows.to_vec()
    };
    let umax = problem.velocity.max_component_speed(&problem.domain);

    // Problems without a closed form are measured against a fine
    // fourth-order reference (quarter dx, one twentieth dt, stability
    // permitting), shared by all rows of the sweep.
    let reference: Option<ReferenceField> = if problem.exact.is_none() {
        let ((xmin, xmax), _) = problem.domain.bounds();
        let width = xmax - xmin;
        let min_dx = rows.iter().map(|r| r.dx).fold(f64::INFINITY, f64::min);
        let mut min_dt = f64::INFINITY;
        for row in &rows {
            let (_, dt) = resolve_steps(problem.t_final, row_dt_target(&problem, row)?)?;
            min_dt = min_dt.min(dt);
        }
        let n_cells = (width / (min_dx / 4.0)).ceil() as usize;
        Some(make_reference(&problem, n_cells, min_dt / 20.0, cache_dir)?)
    } else {
        None
    };

    // The Euler-substepped variant sweeps dt with a fixed trajectory
    // substep count (the largest Courant number of the table), so the
    // substep size is the same in every row and only dt varies.
    let sl1_substeps: Option<usize> = if umax > 0.0 {
        let mut worst = 1.0f64;
        for row in &rows {
            let (_, dt) = resolve_steps(problem.t_final, row_dt_target(&problem, row)?)?;
            worst = worst.max(dt * umax / row.dx);
        }
        Some((worst.ceil() as usize).max(1))
    } else {
        None
    };

    let mut report_rows = Vec::with_capacity(rows.len());
    for row in &rows {
        let start = Instant::now();
        let (n_steps, dt) = resolve_steps(problem.t_final, row_dt_target(&problem, row)?)?;
        let ((xmin, xmax), (ymin, ymax)) = problem.domain.bounds();
        let periodic = problem.boundary == BoundaryKind::Periodic;

        let mut config = SchemeConfig::new(variant, dt);
        if variant == Variant::Sl1 {
            if let Some(m) = sl1_substeps {
                config = config.with_substeps(m);
            }
        }
        if let Some(h) = row.ghost_h {
            config = config.with_ghost(GhostThickness::Absolute { h });
        }

        let (values, coords, lambda, mu) = match group.mesh {
            MeshKind::Structured => {
                let nx = ((xmax - xmin) / row.dx).round() as usize;
                let ny = ((ymax - ymin) / row.dx).round() as usize;
                let grid = StructuredGrid::new((xmin, xmax), (ymin, ymax), nx, ny, periodic)?;
                let mut solver = Solver::new(&problem, Interpolator::Bicubic(&grid), config)?;
                solver.run(n_steps)?;
                (
                    solver.state().values().to_vec(),
                    solver.coords().to_vec(),
                    dt * umax / grid.dx,
                    dt * problem.nu / (grid.dx * grid.dx),
                )
            }
            MeshKind::Triangular => {
                let mesh = gen_square_trimesh(((xmin, xmax), (ymin, ymax)), row.dx)?;
                let mut solver = Solver::new(&problem, Interpolator::TriP2(&mesh), config)?;
                solver.run(n_steps)?;
                (
                    solver.state().values().to_vec(),
                    solver.coords().to_vec(),
                    dt * umax / row.dx,
                    dt * problem.nu / (row.dx * row.dx),
                )
            }
        };

        let reference_values: Vec<f64> = match (&problem.exact, &reference) {
            (Some(exact), _) => {
                let mut out = Vec::with_capacity(coords.len() * problem.n_species);
                for s in 0..problem.n_species {
                    out.extend(coords.iter().map(|&p| exact(p, problem.t_final, s)));
                }
                out
            }
            (None, Some(reference)) => reference.restrict_to(&coords),
            (None, None) => unreachable!("reference prepared above"),
        };
        let (l2, linf) = rel_error(&values, &reference_values)?;
        report_rows.push(ReportRow {
            dx: row.dx,
            dt,
            lambda,
            mu,
            l2,
            linf,
            p2: None,
            pinf: None,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    // Rate columns according to the group's pairing.
    for i in 0..report_rows.len() {
        let partner = match group.pairing {
            Pairing::AdjacentDx => i.checked_sub(1),
            Pairing::VsFirstDt => (i > 0).then_some(0),
            Pairing::StrideTwoDx => i.checked_sub(2),
        };
        let Some(j) = partner else { continue };
        let (coarse, fine) = (report_rows[j].clone(), &mut report_rows[i]);
        let ratio = match group.pairing {
            Pairing::AdjacentDx | Pairing::StrideTwoDx => coarse.dx / fine.dx,
            Pairing::VsFirstDt => coarse.dt / fine.dt,
        };
        if ratio > 1.0 {
            fine.p2 = conv_rate(coarse.l2, fine.l2, ratio).ok();
            fine.pinf = conv_rate(coarse.linf, fine.linf, ratio).ok();
        }
    }

    Ok(ErrorReport {
        suite: group.problem_name.clone(),
        problem: group.problem_name.clone(),
        scheme: variant.as_str(),
        mesh: match group.mesh {
            MeshKind::Structured => "structured",
            MeshKind::Triangular => "triangular",
        },
        interp: match group.mesh {
            MeshKind::Structured => "bicubic",
            MeshKind::Triangular => "p2",
        },
        pairing: group.pairing.describe(),
        rows: report_rows,
    })
}

/// Checkpoint log of the channel-with-obstacle run: field bounds and the
/// concentration along the channel centerline.
#[derive(Clone, Debug)]
pub struct ChannelLog {
    pub sample_xs: Vec<f64>,
    /// One row per checkpoint: time, min, max, centerline values.
    pub rows: Vec<(f64, f64, f64, Vec<f64>)>,
}

impl ChannelLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# suite=nonconvex_channel\n# scheme=sl2\n");
        out.push_str("t,min,max");
        for x in &self.sample_xs {
            out.push_str(&format!(",c(x={x})"));
        }
        out.push('\n');
        for (t, lo, hi, samples) in &self.rows {
            out.push_str(&format!("{t},{lo},{hi}"));
            for v in samples {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Advection around the obstacle in the channel; records bounds and the
/// centerline profile at each checkpoint time.
pub fn run_channel(dt: f64, checkpoints: &[f64], target_h: f64) -> Result<ChannelLog> {
    let problem = builtin_problem("nonconvex_channel")?;
    let (center, radius) = problem.domain.hole().expect("channel has a hole");
    let ((xmin, xmax), (ymin, ymax)) = problem.domain.bounds();
    let mesh = gen_channel_trimesh(((xmin, xmax), (ymin, ymax)), center, radius, target_h)?;
    let interp = Interpolator::TriP2(&mesh);
    let t_final = checkpoints.iter().fold(problem.t_final, |a, &b| a.max(b));
    let (n_steps, dt) = resolve_steps(t_final, dt)?;
    let mut solver = Solver::new(&problem, interp, SchemeConfig::new(Variant::Sl2, dt))?;

    let sample_xs: Vec<f64> = (2..=9).map(|k| k as f64 * 0.1).collect();
    let mut log = ChannelLog {
        sample_xs: sample_xs.clone(),
        rows: Vec::new(),
    };
    let mut next_checkpoint = 0usize;
    for step in 1..=n_steps {
        solver.step()?;
        let t = step as f64 * dt;
        while next_checkpoint < checkpoints.len()
            && t + 0.5 * dt >= checkpoints[next_checkpoint]
        {
            let values = solver.state().species(0);
            let (lo, hi) = solver.diag.bounds.last().unwrap()[0];
            let samples: Vec<f64> = sample_xs
                .iter()
                .map(|&x| interp.eval(values, Point::new(x, 0.2)).unwrap_or(f64::NAN))
                .collect();
            log.rows.push((checkpoints[next_checkpoint], lo, hi, samples));
            next_checkpoint += 1;
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_errors_match_definitions() {
        let r = vec![1.0, 2.0, -1.0];
        assert_eq!(rel_error(&r, &r).unwrap(), (0.0, 0.0));
        let scaled: Vec<f64> = r.iter().map(|x| 1.1 * x).collect();
        let (l2, linf) = rel_error(&scaled, &r).unwrap();
        assert!((l2 - 0.1).abs() < 1e-12 && (linf - 0.1).abs() < 1e-12);
        // Single nonzero reference entry.
        let (_, linf) = rel_error(&[0.0, 2.2], &[0.0, 2.0]).unwrap();
        assert!((linf - 0.1).abs() < 1e-12);
        assert!(rel_error(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn convergence_rates_match_reported_values() {
        let p = conv_rate(3.34e-2, 1.33e-2, 2.0).unwrap();
        assert!((p - 1.33).abs() < 0.005, "{p}");
        let p = conv_rate(2.66e-3, 4.89e-4, 2.0).unwrap();
        assert!((p - 2.44).abs() < 0.005, "{p}");
        assert_eq!(conv_rate(1e-3, 1e-3, 4.0).unwrap(), 0.0);
        assert!(conv_rate(0.0, 1e-3, 2.0).is_err());
        assert!(conv_rate(1e-3, 1e-4, 1.0).is_err());
    }

    #[test]
    fn step_resolution_hits_final_time() {
        let (n, dt) = resolve_steps(1.0, 0.10752).unwrap();
        assert_eq!(n, 9);
        assert!((n as f64 * dt - 1.0).abs() < 1e-15);
        // A step that overshoots the final time cannot be rounded away.
        assert!(resolve_steps(1.0, 3.0).is_err());
    }

    #[test]
    fn suite_lookup() {
        assert!(suite("pure_diffusion").is_ok());
        assert_eq!(suite("allen_cahn").unwrap().groups.len(), 2);
        let err = suite("nope").unwrap_err().to_string();
        assert!(err.contains("pure_diffusion"));
    }

    #[test]
    fn reports_are_deterministic() {
        let group = BenchGroup {
            problem_name: "pure_diffusion".into(),
            mesh: MeshKind::Structured,
            rows: vec![RowSpec::mu(0.2, 0.84), RowSpec::mu(0.1, 1.6)],
            pairing: Pairing::AdjacentDx,
            variants: vec![Variant::Sl2],
        };
        let a = run_group(&group, Variant::Sl2, &[], None).unwrap();
        let b = run_group(&group, Variant::Sl2, &[], None).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.rows[1].p2.is_some());
        assert!(a.to_csv().starts_with("# suite=pure_diffusion\n"));
    }
}
