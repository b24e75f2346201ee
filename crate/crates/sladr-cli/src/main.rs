//! Command line runner: single problem runs with field dumps, and the
//! benchmark suites producing convergence CSV tables.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use sladr::bench::{run_channel, run_group, suite, SUITE_NAMES};
use sladr::boundary::GhostThickness;
use sladr::interp::Interpolator;
use sladr::mesh::{gen_channel_trimesh, gen_square_trimesh, read_trimesh, StructuredGrid, TriMesh};
use sladr::model::{builtin_problem, BoundaryKind, ProblemSpec};
use sladr::output::{write_field_csv, write_raster};
use sladr::schemes::{SchemeConfig, Solver, Variant};

#[derive(Parser)]
#[command(name = "sladr", about = "Semi-Lagrangian advection-diffusion-reaction solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and dump fields at checkpoint times.
    Run(RunArgs),
    /// Run benchmark suites and write convergence tables as CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in problem name (see `--problem help` for the list).
    #[arg(long)]
    problem: Option<String>,
    /// INI-style config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["sl1", "sl2", "sl2s"])]
    scheme: Option<String>,
    /// SL1 reaction off-centering in [1/2, 1].
    #[arg(long)]
    theta: Option<f64>,
    /// Mesh size (grid spacing or maximum triangle edge).
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Set dt through the parabolic parameter mu = dt nu / dx^2.
    #[arg(long)]
    mu: Option<f64>,
    /// Set dt through the Courant number lambda = dt max|u| / dx.
    #[arg(long)]
    lambda: Option<f64>,
    /// Triangle mesh file (overrides --dx mesh generation).
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, value_parser = ["p1", "p2", "bicubic"])]
    interp: Option<String>,
    /// Ghost layer thickness factor: h = c_h sqrt(dt).
    #[arg(long = "ghost-ch")]
    ghost_ch: Option<f64>,
    /// Absolute ghost layer thickness (overrides --ghost-ch).
    #[arg(long = "ghost-h")]
    ghost_h: Option<f64>,
    /// Output directory (default: $SLADR_OUT or the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated checkpoint times for field dumps.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<f64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite name or `paper-all` for every table.
    #[arg(long)]
    suite: String,
    /// Comma-separated scheme list; defaults to each table's schemes.
    #[arg(long, value_delimiter = ',')]
    variant: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

enum CliError {
    /// Bad invocation: exit code 2, like other argument errors.
    Usage(String),
    /// Failure while solving or writing artifacts: exit code 1.
    Run(String),
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Run(msg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn init_threads(threads: Option<usize>) {
    if let Some(k) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("SLADR_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn parse_variant(name: &str) -> Result<Variant, CliError> {
    match name {
        "sl1" => Ok(Variant::Sl1),
        "sl2" => Ok(Variant::Sl2),
        "sl2s" => Ok(Variant::Sl2s),
        other => Err(CliError::Usage(format!("unknown scheme '{other}' (sl1, sl2, sl2s)"))),
    }
}

enum RunMesh {
    Grid(StructuredGrid),
    Tri(TriMesh),
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, CliError> {
    init_threads(args.threads);
    let flags = RunConfig {
        problem: args.problem.clone(),
        scheme: args.scheme.clone(),
        theta: args.theta,
        dx: args.dx,
        dt: args.dt,
        mu: args.mu,
        lambda: args.lambda,
        mesh: args.mesh.as_ref().map(|p| p.display().to_string()),
        interp: args.interp.clone(),
        ghost_ch: args.ghost_ch,
        ghost_h: args.ghost_h,
        out: args.out.as_ref().map(|p| p.display().to_string()),
        threads: args.threads,
        checkpoints: args.checkpoints.clone(),
    };
    let cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?.overridden_by(&flags),
        None => flags,
    };

    let problem_name = cfg
        .problem
        .clone()
        .ok_or_else(|| CliError::Usage("missing --problem (or problem= in the config file)".into()))?;
    let problem = builtin_problem(&problem_name).map_err(|e| CliError::Usage(e.to_string()))?;

    // Mesh and interpolation choice: triangulations when a mesh file is
    // given or the domain has a hole, tensor grid otherwise.
    let needs_trimesh = cfg.mesh.is_some() || problem.domain.hole().is_some();
    let mut interp_name = cfg
        .interp
        .clone()
        .unwrap_or_else(|| if needs_trimesh { "p2".into() } else { "bicubic".into() });
    if needs_trimesh && interp_name == "bicubic" {
        eprintln!("note: bicubic interpolation needs a structured grid; using p2");
        interp_name = "p2".into();
    }

    let ((xmin, xmax), (ymin, ymax)) = problem.domain.bounds();
    let dx = cfg.dx.unwrap_or(0.025);
    let mesh = if let Some(path) = &cfg.mesh {
        RunMesh::Tri(read_trimesh(Path::new(path)).map_err(|e| e.to_string())?)
    } else if interp_name == "bicubic" {
        let nx = (((xmax - xmin) / dx).round() as usize).max(4);
        let ny = (((ymax - ymin) / dx).round() as usize).max(4);
        RunMesh::Grid(
            StructuredGrid::new(
                (xmin, xmax),
                (ymin, ymax),
                nx,
                ny,
                problem.boundary == BoundaryKind::Periodic,
            )
            .map_err(|e| e.to_string())?,
        )
    } else if let Some((center, radius)) = problem.domain.hole() {
        RunMesh::Tri(
            gen_channel_trimesh(((xmin, xmax), (ymin, ymax)), center, radius, dx)
                .map_err(|e| e.to_string())?,
        )
    } else {
        RunMesh::Tri(
            gen_square_trimesh(((xmin, xmax), (ymin, ymax)), dx).map_err(|e| e.to_string())?,
        )
    };

    // Time step resolution.
    let umax = problem.velocity.max_component_speed(&problem.domain);
    let dt_target = if let Some(dt) = cfg.dt {
        dt
    } else if let Some(mu) = cfg.mu {
        if problem.nu <= 0.0 {
            return Err(CliError::Usage("--mu needs a problem with positive diffusivity".into()));
        }
        mu * dx * dx / problem.nu
    } else if let Some(lambda) = cfg.lambda {
        if umax <= 0.0 {
            return Err(CliError::Usage("--lambda needs a problem with nonzero velocity".into()));
        }
        lambda * dx / umax
    } else {
        return Err(CliError::Usage("one of --dt, --mu, --lambda is required".into()));
    };
    let t_final = problem
        .t_final
        .max(cfg.checkpoints.iter().fold(0.0f64, |a, &b| a.max(b)));
    let (n_steps, dt) =
        sladr::bench::resolve_steps(t_final, dt_target).map_err(|e| CliError::Usage(e.to_string()))?;
    if (dt - dt_target).abs() > 1e-12 * dt_target {
        eprintln!("note: dt adjusted from {dt_target} to {dt} so {n_steps} steps reach t = {t_final}");
    }

    let variant = parse_variant(cfg.scheme.as_deref().unwrap_or("sl2"))?;
    let mut scheme_cfg = SchemeConfig::new(variant, dt);
    if let Some(theta) = cfg.theta {
        scheme_cfg = scheme_cfg.with_theta(theta);
    }
    if let Some(h) = cfg.ghost_h {
        scheme_cfg = scheme_cfg.with_ghost(GhostThickness::Absolute { h });
    } else if let Some(c_h) = cfg.ghost_ch {
        scheme_cfg = scheme_cfg.with_ghost(GhostThickness::RelativeToDt { c_h });
    }

    let dir = out_dir(args.out.clone().or_else(|| cfg.out.clone().map(PathBuf::from)));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    eprintln!("effective configuration:\n{}", cfg.to_config_string());

    let interp = match (&mesh, interp_name.as_str()) {
        (RunMesh::Grid(g), _) => Interpolator::Bicubic(g),
        (RunMesh::Tri(m), "p1") => Interpolator::TriP1(m),
        (RunMesh::Tri(m), _) => Interpolator::TriP2(m),
    };
    let mut solver = Solver::new(&problem, interp, scheme_cfg).map_err(|e| e.to_string())?;

    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut next_cp = 0usize;
    for step in 1..=n_steps {
        solver.step().map_err(|e| e.to_string())?;
        let t = step as f64 * dt;
        while next_cp < checkpoints.len() && t + 0.5 * dt >= checkpoints[next_cp] {
            dump_fields(&dir, &problem, &solver, &mesh, checkpoints[next_cp])?;
            next_cp += 1;
        }
    }

    // Run summary: per-species bounds, plus errors when an exact solution
    // exists.
    let bounds = solver.diag.bounds.last().cloned().unwrap_or_default();
    for (s, (lo, hi)) in bounds.iter().enumerate() {
        println!("species {s}: min = {lo}, max = {hi}");
    }
    if let Some(exact) = &problem.exact {
        let mut reference = Vec::with_capacity(solver.coords().len() * problem.n_species);
        for s in 0..problem.n_species {
            reference.extend(
                solver
                    .coords()
                    .iter()
                    .map(|&p| exact(p, solver.time(), s)),
            );
        }
        let (l2, linf) = sladr::bench::rel_error(solver.state().values(), &reference)
            .map_err(|e| e.to_string())?;
        println!("relative errors vs exact solution: l2 = {l2:.6e}, linf = {linf:.6e}");
    }
    Ok(ExitCode::SUCCESS)
}

fn dump_fields(
    dir: &Path,
    problem: &ProblemSpec,
    solver: &Solver,
    mesh: &RunMesh,
    t: f64,
) -> Result<(), String> {
    let tag = format!("{}_t{}", problem.name.replace(['(', ')'], "_"), t);
    let csv_path = dir.join(format!("{tag}.csv"));
    write_field_csv(&csv_path, solver.coords(), solver.state()).map_err(|e| e.to_string())?;
    if let RunMesh::Grid(g) = mesh {
        let raster_path = dir.join(format!("{tag}.raster"));
        write_raster(
            &raster_path,
            g.dofs_x(),
            g.dofs_y(),
            problem.n_species,
            solver.state().values(),
        )
        .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, CliError> {
    init_threads(args.threads);
    let dir = out_dir(args.out.clone());
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let cache = dir.join("reference-cache");

    let suites: Vec<&str> = if args.suite == "paper-all" {
        SUITE_NAMES.to_vec()
    } else if SUITE_NAMES.contains(&args.suite.as_str()) {
        vec![SUITE_NAMES.iter().find(|s| **s == args.suite).unwrap()]
    } else {
        eprintln!(
            "error: unknown suite '{}'; valid: {}, paper-all",
            args.suite,
            SUITE_NAMES.join(", ")
        );
        return Ok(ExitCode::from(2));
    };
    let variant_filter: Option<Vec<Variant>> = if args.variant.is_empty() {
        None
    } else {
        Some(
            args.variant
                .iter()
                .map(|v| parse_variant(v))
                .collect::<Result<_, _>>()?,
        )
    };

    let mut any_failed = false;
    for name in suites {
        if name == "nonconvex_channel" {
            match run_channel(0.005, &[0.5, 1.0, 2.0, 3.0], 0.025) {
                Ok(log) => {
                    let path = dir.join("nonconvex_channel.csv");
                    std::fs::write(&path, log.to_csv()).map_err(|e| e.to_string())?;
                    println!("wrote {}", path.display());
                }
                Err(e) => {
                    eprintln!("nonconvex_channel failed: {e}");
                    any_failed = true;
                }
            }
            continue;
        }
        let spec = suite(name).map_err(|e| e.to_string())?;
        // One CSV per suite when running the whole set; one per
        // (suite, variant) when schemes were selected explicitly.
        if let Some(filter) = &variant_filter {
            for &variant in filter {
                let mut blocks = String::new();
                let mut ok = true;
                for group in &spec.groups {
                    match run_group(group, variant, &[], Some(&cache)) {
                        Ok(report) => blocks.push_str(&report.to_csv()),
                        Err(e) => {
                            eprintln!("{name}/{}: {e}", variant.as_str());
                            ok = false;
                            any_failed = true;
                        }
                    }
                }
                if ok && !blocks.is_empty() {
                    let path = dir.join(format!("{name}_{}.csv", variant.as_str()));
                    std::fs::write(&path, blocks).map_err(|e| e.to_string())?;
                    println!("wrote {}", path.display());
                }
            }
        } else {
            let mut blocks = String::new();
            for group in &spec.groups {
                for &variant in &group.variants {
                    match run_group(group, variant, &[], Some(&cache)) {
                        Ok(report) => blocks.push_str(&report.to_csv()),
                        Err(e) => {
                            eprintln!("{name}/{}: {e}", variant.as_str());
                            any_failed = true;
                        }
                    }
                }
            }
            if !blocks.is_empty() {
                let path = dir.join(format!("{name}.csv"));
                std::fs::write(&path, blocks).map_err(|e| e.to_string())?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(if any_failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}
