//! Acceptance criteria 1 to 11, one line per criterion.

use std::io::Write;

use starflux::acceptance::{run, AcceptanceOptions};

#[test]
fn acceptance_suite() {
    let results = run(&AcceptanceOptions::default());
    let mut err = std::io::stderr();
    for r in &results {
        writeln!(err, "{}", r.line()).ok();
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
