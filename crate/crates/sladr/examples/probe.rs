// Development probe: print benchmark rows for the structured suites.
use sladr::bench::{run_group, suite};
use sladr::schemes::Variant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "pure_diffusion".into());
    let cache = std::path::PathBuf::from("target/sladr-cache");
    std::fs::create_dir_all(&cache).unwrap();
    let s = suite(&which).unwrap();
    for group in &s.groups {
        for &variant in &group.variants {
            let t0 = std::time::Instant::now();
            match run_group(group, variant, &[], Some(&cache)) {
                Ok(report) => {
                    println!("=== {} {} ({:.1}s)", group.problem_name, variant.as_str(), t0.elapsed().as_secs_f64());
                    print!("{}", report.to_csv());
                    for r in &report.rows {
                        println!("   row dx={} took {:.2}s", r.dx, r.seconds);
                    }
                }
                Err(e) => println!("=== {} {}: ERROR {e}", group.problem_name, variant.as_str()),
            }
        }
    }
}
