//! Acceptance suite: runs every criterion at full scale with its pinned
//! bounds and tolerances, prints one pass/fail line per criterion, and
//! checks that a rerun with the same seed emits bit-identical files.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! table.

use thetax::selftest::{self, SuiteConfig};

#[test]
fn acceptance() {
    let config = SuiteConfig::acceptance(selftest::DEFAULT_SEED);

    let dir_first = tempfile::tempdir().expect("tempdir");
    let first = selftest::run_all(&config, Some(dir_first.path())).expect("suite runs");
    for r in &first.results {
        println!("{}", r.table_line());
    }

    // Criterion 10: a second full run with the same seed must emit
    // byte-identical files, both in memory and on disk.
    let dir_second = tempfile::tempdir().expect("tempdir");
    let second = selftest::run_all(&config, Some(dir_second.path())).expect("suite runs");
    let mut identical = selftest::emitted_identical(&first, &second);
    for name in first.emitted.keys() {
        let a = std::fs::read(dir_first.path().join(name)).expect("first run file");
        let b = std::fs::read(dir_second.path().join(name)).expect("second run file");
        identical &= a == b;
    }
    println!(
        "criterion 10: determinism of emitted files ... {} [{} files]",
        if identical { "PASS" } else { "FAIL" },
        first.emitted.len()
    );

    for r in &first.results {
        assert!(r.passed, "{}", r.table_line());
    }
    assert!(
        identical,
        "emitted files differ between identically seeded runs"
    );
}
