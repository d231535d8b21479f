//! Acceptance gate: one line per criterion, nonzero exit on any failure.

use critlab_core::suite::{run_all, Status, SuiteConfig};

fn main() {
    let outcomes = run_all(SuiteConfig::default());
    let mut failed = 0;
    for o in &outcomes {
        println!("{}  ({:.1} s)", o.line(), o.elapsed.as_secs_f64());
        if o.status != Status::Pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
