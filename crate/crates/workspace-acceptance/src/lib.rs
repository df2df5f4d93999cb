//! Runner for the acceptance suite in `tests/acceptance.rs`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

/// Runs one criterion and prints `PASS|FAIL <index> <title>: <detail> (<secs>s)`.
/// A panic inside `f` counts as a failure.
pub fn criterion(index: usize, title: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
        Outcome::new(false, format!("panicked: {msg}"))
    });
    let status = if o.passed { "PASS" } else { "FAIL" };
    println!("{status} {index:>2} {title}: {} ({:.1}s)", o.detail, start.elapsed().as_secs_f64());
    o.passed
}
