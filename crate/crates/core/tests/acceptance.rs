//! Acceptance suite: runs every criterion at its stated bounds with exact
//! comparisons and prints one pass/fail line per criterion
//! (`cargo test --test acceptance -- --nocapture` to see the lines).

use qkdv_core::selftest::run_selftest;

#[test]
fn acceptance() {
    let report = run_selftest().expect("selftest infrastructure");
    for line in report.lines() {
        println!("{}", line);
    }
    assert!(
        report.all_passed(),
        "acceptance criteria failed:\n{}",
        report
            .lines()
            .iter()
            .filter(|l| l.starts_with("FAIL"))
            .cloned()
            .collect::<Vec<_>>()
            .join("\n")
    );
}
