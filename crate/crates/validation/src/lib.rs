//! Acceptance gate for the sampling pipeline: one verdict line per criterion.

use std::time::Duration;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct Gate {
    outcomes: Vec<Outcome>,
}

impl Gate {
    pub fn new() -> Self {
        Self::default()
    }

    /// Prints and stores the verdict.
    pub fn record(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        let detail = detail.into();
        println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        self.outcomes.push(Outcome {
            name,
            passed,
            detail,
        });
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn summary(&self) -> String {
        let passed = self.outcomes.iter().filter(|o| o.passed).count();
        format!("{passed}/{} criteria passed", self.outcomes.len())
    }
}

/// Collects the individual checks behind one criterion.
#[derive(Debug, Default)]
pub struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Notes, then at most three failures.
    pub fn detail(&self) -> String {
        let mut parts = self.notes.clone();
        if !self.failures.is_empty() {
            let shown: Vec<&str> = self.failures.iter().take(3).map(String::as_str).collect();
            parts.push(format!(
                "{} failed check(s): {}",
                self.failures.len(),
                shown.join("; ")
            ));
        }
        parts.join("; ")
    }
}

pub fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// True when `a` and `b` agree to `tol` relative to `|b|`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs()
}
