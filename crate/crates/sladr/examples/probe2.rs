// Development probe: solid rotation with explicit substep choices.
use sladr::bench::{rel_error, resolve_steps};
use sladr::interp::Interpolator;
use sladr::mesh::StructuredGrid;
use sladr::model::builtin_problem;
use sladr::schemes::{SchemeConfig, Solver, Variant};

fn main() {
    let problem = builtin_problem("solid_rotation").unwrap();
    let umax = problem.velocity.max_component_speed(&problem.domain);
    let rows = [(0.04, 1.62), (0.04, 0.82), (0.02, 3.2), (0.02, 1.6)];
    for (variant, m_fixed) in [(Variant::Sl1, Some(17)), (Variant::Sl2s, Some(17)), (Variant::Sl2, None)] {
        println!("=== {:?} substeps {:?}", variant, m_fixed);
        for (dx, mu) in rows {
            let dt_target = mu * dx * dx / problem.nu;
            let (n, dt) = resolve_steps(1.0, dt_target);
            let nx = (4.0 / dx).round() as usize;
            let grid = StructuredGrid::new((-2.0, 2.0), (-2.0, 2.0), nx, nx, false).unwrap();
            let mut config = SchemeConfig::new(variant, dt);
            if let Some(m) = m_fixed { config = config.with_substeps(m); }
            let t0 = std::time::Instant::now();
            let mut solver = Solver::new(&problem, Interpolator::Bicubic(&grid), config).unwrap();
            solver.run(n).unwrap();
            let exact = problem.exact.clone().unwrap();
            let reference: Vec<f64> = solver.coords().iter().map(|&p| exact(p, 1.0, 0)).collect();
            let (l2, linf) = rel_error(solver.state().species(0), &reference).unwrap();
            println!("dx={dx} mu={mu} dt={dt:.5} lam={:.2} N={n}: l2={l2:.4e} linf={linf:.4e}  ({:.1}s)",
                dt * umax / dx, t0.elapsed().as_secs_f64());
        }
    }
}
