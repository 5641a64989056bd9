//! Runs one verification suite over the standard fixtures and prints the CSV.
//!
//! `cargo run --release --example run_suite -- inclusion [fixture-name]`

use std::time::Instant;

use lpbm::verifier::{run_suite, standard_fixtures, write_csv, Overrides, Suite};

fn main() -> lpbm::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let suite: Suite = args.get(1).map(|s| s.as_str()).unwrap_or("all").parse()?;
    let mut fixtures = standard_fixtures(7)?;
    if let Some(name) = args.get(2) {
        fixtures.retain(|f| &f.name == name);
    }
    for f in &fixtures {
        let start = Instant::now();
        let reports = run_suite(suite, std::slice::from_ref(f), &Overrides::default(), 7)?;
        eprintln!("{:<22} {:>8.2}s", f.name, start.elapsed().as_secs_f64());
        print!("{}", write_csv(&reports));
    }
    Ok(())
}
