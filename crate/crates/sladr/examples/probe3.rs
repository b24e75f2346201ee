// Development probe: boundary treatment variants on the bc tables.
use sladr::bench::{rel_error, resolve_steps};
use sladr::boundary::GhostThickness;
use sladr::interp::Interpolator;
use sladr::mesh::gen_square_trimesh;
use sladr::model::builtin_problem;
use sladr::schemes::{ExteriorMode, SchemeConfig, Solver, Variant};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "bc_diffusion".into());
    let problem = builtin_problem(&name).unwrap();
    let rows = [(0.04, 1.56, 0.5), (0.04, 0.78, 0.5), (0.02, 3.12, 0.33), (0.02, 1.56, 0.33)];
    for (label, use_ghost) in [("ghost", true), ("data", false)] {
        println!("=== {name} {label}");
        for (dx, mu, h) in rows {
            let (n, dt) = resolve_steps(1.0, mu * dx * dx / problem.nu);
            let mesh = gen_square_trimesh(((-1.0, 1.0), (-1.0, 1.0)), dx).unwrap();
            let mut config = SchemeConfig::new(Variant::Sl2, dt);
            config = if use_ghost {
                config.with_ghost(GhostThickness::Absolute { h })
            } else {
                config.with_exterior(ExteriorMode::Data)
            };
            let mut solver = Solver::new(&problem, Interpolator::TriP2(&mesh), config).unwrap();
            solver.run(n).unwrap();
            let exact = problem.exact.clone().unwrap();
            let reference: Vec<f64> = solver.coords().iter().map(|&p| exact(p, 1.0, 0)).collect();
            let (l2, linf) = rel_error(solver.state().species(0), &reference).unwrap();
            println!("dx={dx} mu={mu} h={h}: l2={l2:.4e} linf={linf:.4e}");
        }
    }
}
