//! Release gate: every numbered criterion of the verification suite must
//! pass on the default manifest. One line is printed per criterion.

use loopmoment_core::experiments::{run_suite, ExperimentManifest};

#[test]
fn acceptance_suite() {
    let manifest = ExperimentManifest::default();
    let report = run_suite(&manifest).expect("suite runs");
    for line in report.render_lines() {
        println!("{line}");
    }
    assert!(
        report.all_passed,
        "criteria failed:\n{}",
        report
            .criteria
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.line())
            .collect::<Vec<_>>()
            .join("\n")
    );
}
