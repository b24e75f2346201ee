//! Self-validation of the finite-difference reference solver: agreement
//! with closed-form solutions, order under refinement, and qualitative
//! sanity of the reference fields used by the benchmark suites.

use std::path::PathBuf;
use std::sync::Arc;

use sladr::bench::rel_error;
use sladr::geom::Point;
use sladr::model::{
    builtin_problem, gaussian_diffusion_exact, BoundaryKind, Domain, ProblemSpec, ReactionTerm,
    VelocityField,
};
use sladr::oracle::make_reference;

fn cache_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("reference-cache");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Wide decaying Gaussian with the exact solution enforced at the
/// boundary; smooth enough that the fourth-order truncation error sits
/// far below the validation threshold.
fn smooth_diffusion_problem() -> ProblemSpec {
    let nu = 0.05;
    let sigma0 = 0.3;
    let exact: Arc<dyn Fn(Point, f64, usize) -> f64 + Send + Sync> =
        Arc::new(move |p, t, _| gaussian_diffusion_exact(p.x, p.y, t, nu, sigma0));
    let e0 = exact.clone();
    let eb = exact.clone();
    ProblemSpec {
        name: "smooth_diffusion_validation".into(),
        domain: Domain::rect(-2.0, 2.0, -2.0, 2.0),
        velocity: VelocityField::Zero,
        nu,
        reaction: ReactionTerm::None,
        n_species: 1,
        initial: Arc::new(move |p, s| e0(p, 0.0, s)),
        boundary_value: eb,
        exact: Some(exact),
        t_final: 0.5,
        boundary: BoundaryKind::Dirichlet,
    }
}

#[test]
fn reference_agrees_with_exact_solution() {
    let problem = smooth_diffusion_problem();
    let exact = problem.exact.clone().unwrap();
    let reference = make_reference(&problem, 256, f64::INFINITY, Some(&cache_dir())).unwrap();
    let coords = reference.grid.dof_coords();
    let values = reference.restrict_to(&coords);
    let truth: Vec<f64> = coords
        .iter()
        .map(|&p| exact(p, problem.t_final, 0))
        .collect();
    let (l2, _) = rel_error(&values, &truth).unwrap();
    assert!(l2 <= 1e-6, "reference error vs exact: {l2:.3e}");
}

#[test]
fn reference_error_decreases_at_fourth_order() {
    let problem = smooth_diffusion_problem();
    let exact = problem.exact.clone().unwrap();
    let mut errors = Vec::new();
    for n in [48usize, 96] {
        let reference = make_reference(&problem, n, f64::INFINITY, None).unwrap();
        let coords = reference.grid.dof_coords();
        let values = reference.restrict_to(&coords);
        let truth: Vec<f64> = coords
            .iter()
            .map(|&p| exact(p, problem.t_final, 0))
            .collect();
        errors.push(rel_error(&values, &truth).unwrap().0);
    }
    let ratio = errors[0] / errors[1];
    assert!(
        ratio > 8.0,
        "expected roughly 16x error drop per halving, got {ratio:.2} ({errors:?})"
    );
}

#[test]
fn allen_cahn_reference_stays_in_the_invariant_region() {
    let problem = builtin_problem("allen_cahn(0.05)").unwrap();
    let reference = make_reference(&problem, 96, f64::INFINITY, Some(&cache_dir())).unwrap();
    let (lo, hi) = reference
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    assert!(
        lo >= -1.0 - 1e-3 && hi <= 1.0 + 1e-3,
        "reference range [{lo}, {hi}] leaves [-1, 1] by more than 1e-3"
    );
}

#[test]
fn four_species_reference_shows_the_rotated_bumps() {
    // Half a rotation period: the bumps started at (-2.5, 0) should sit
    // near (2.5, 0) at the final time.
    let problem = builtin_problem("lotka4").unwrap();
    let reference = make_reference(&problem, 200, f64::INFINITY, Some(&cache_dir())).unwrap();
    let n = reference.grid.n_dofs();
    for species in [2usize, 3] {
        let vals = &reference.values[species * n..(species + 1) * n];
        let (mut best, mut best_dof) = (f64::NEG_INFINITY, 0);
        for (dof, &v) in vals.iter().enumerate() {
            if v > best {
                best = v;
                best_dof = dof;
            }
        }
        let p = reference.grid.dof_coord(best_dof);
        let target = Point::new(2.5, 0.0);
        assert!(
            p.dist(target) <= 1.5,
            "species {species}: peak {best:.3} at ({}, {}), expected near (2.5, 0)",
            p.x,
            p.y
        );
        assert!(best > 0.05, "species {species}: peak amplitude {best}");
        for &v in vals {
            assert!(v.abs() < 20.0, "species {species} unbounded: {v}");
        }
    }
}
