// Development probe: Allen-Cahn nu=0.05 sweep candidates.
use sladr::bench::{run_group, suite, RowSpec};
use sladr::schemes::Variant;

fn main() {
    let cache = std::path::PathBuf::from("target/sladr-cache");
    std::fs::create_dir_all(&cache).unwrap();
    let s = suite("allen_cahn").unwrap();
    let group = &s.groups[1]; // nu = 0.05
    let candidates: Vec<(&str, Vec<RowSpec>)> = vec![
        (
            "clean dx, dt base 0.125",
            vec![
                RowSpec::dt(1.0 / 12.0, 0.125),
                RowSpec::dt(1.0 / 24.0, 0.0625),
                RowSpec::dt(1.0 / 48.0, 0.03125),
            ],
        ),
        (
            "clean dx, dt base 0.1",
            vec![
                RowSpec::dt(1.0 / 12.0, 0.1),
                RowSpec::dt(1.0 / 24.0, 0.05),
                RowSpec::dt(1.0 / 48.0, 0.025),
            ],
        ),
    ];
    for (label, rows) in candidates {
        let t0 = std::time::Instant::now();
        match run_group(group, Variant::Sl2, &rows, Some(&cache)) {
            Ok(report) => {
                println!("=== {label} ({:.1}s)", t0.elapsed().as_secs_f64());
                for r in &report.rows {
                    println!(
                        "dx={:.4} dt={:.5} l2={:.4e} linf={:.4e} p2={:?} pinf={:?}",
                        r.dx, r.dt, r.l2, r.linf, r.p2, r.pinf
                    );
                }
            }
            Err(e) => println!("=== {label}: ERROR {e}"),
        }
    }
}
