//! Pass/fail bookkeeping for the acceptance run: one line per check, a
//! summary, and the process exit status.

use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Line {
    pub label: String,
    pub outcome: Outcome,
    pub elapsed: Duration,
}

#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<Line>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    /// Runs `check`, fails it if it exceeds `budget`, and prints its line.
    pub fn run<F: FnOnce() -> Outcome>(&mut self, label: &str, budget: Option<Duration>, check: F) {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if let Some(limit) = budget {
            if elapsed > limit {
                outcome.passed = false;
                outcome.detail = format!("{}; runtime {:.1?} over budget {:.0?}", outcome.detail, elapsed, limit);
            }
        }
        let mark = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{mark}  {label}  [{elapsed:.2?}]  {}", outcome.detail);
        self.lines.push(Line {
            label: label.to_string(),
            outcome,
            elapsed,
        });
    }

    pub fn failed(&self) -> Vec<&Line> {
        self.lines.iter().filter(|l| !l.outcome.passed).collect()
    }

    /// Prints the summary; returns the process exit code.
    pub fn finish(&self) -> i32 {
        let failed = self.failed();
        println!(
            "\n{} checks, {} passed, {} failed",
            self.lines.len(),
            self.lines.len() - failed.len(),
            failed.len()
        );
        for l in &failed {
            println!("  failed: {}", l.label);
        }
        i32::from(!failed.is_empty())
    }
}
