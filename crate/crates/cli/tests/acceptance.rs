//! Runs every acceptance criterion and prints one line per criterion.

use weylab::config::ExperimentConfig;
use weylab::verify::{all_passed, default_counter, run_suite, Suite};

fn main() {
    let mut cfg = ExperimentConfig::default();
    if let Err(e) = cfg.apply_env() {
        eprintln!("{e}");
        std::process::exit(2);
    }
    let counter = default_counter(cfg.budget);
    println!("acceptance: full suite, seed {}", cfg.seed);
    let outcomes = run_suite(Suite::Full, &cfg, &counter, |o| println!("{}", o.line()));
    let failed: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    println!(
        "acceptance: {}/{} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if !all_passed(&outcomes) {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
