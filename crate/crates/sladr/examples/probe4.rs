// Development probe: Allen-Cahn rates with selectable rows.
use sladr::bench::{run_group, suite, RowSpec};
use sladr::schemes::Variant;

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "light".into());
    let cache = std::path::PathBuf::from("target/sladr-cache");
    std::fs::create_dir_all(&cache).unwrap();
    let s = suite("allen_cahn").unwrap();
    for group in &s.groups {
        let rows: Vec<RowSpec> = match mode.as_str() {
            "paper" => vec![],
            _ => vec![
                RowSpec::dt(1.0 / 12.0, 0.2),
                RowSpec::dt(1.0 / 24.0, 0.1),
                RowSpec::dt(1.0 / 48.0, 0.05),
            ],
        };
        let t0 = std::time::Instant::now();
        match run_group(group, Variant::Sl2, &rows, Some(&cache)) {
            Ok(report) => {
                println!("=== {} ({:.1}s)", group.problem_name, t0.elapsed().as_secs_f64());
                print!("{}", report.to_csv());
            }
            Err(e) => println!("=== {}: ERROR {e}", group.problem_name),
        }
    }
}
