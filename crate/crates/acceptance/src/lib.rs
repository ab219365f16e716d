//! Bookkeeping for the acceptance run: every criterion yields one line of
//! output and the run fails if any criterion does.

use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }

    /// Fold a time budget into the outcome.
    pub fn within(mut self, elapsed: Duration, budget: Duration) -> Self {
        let ok = elapsed <= budget;
        self.detail = format!(
            "{}; {:.2} s (budget {} s{})",
            self.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if ok { "" } else { ", exceeded" }
        );
        self.passed &= ok;
        self
    }
}

#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(usize, String, Outcome)>,
}

impl Report {
    /// Run `check`, print its line and remember the outcome. A panic inside
    /// `check` is reported as a failure of that criterion only.
    pub fn run<F>(&mut self, number: usize, title: &str, check: F)
    where
        F: FnOnce() -> Outcome + std::panic::UnwindSafe,
    {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked after {:.2} s: {msg}", start.elapsed().as_secs_f64()))
        });
        println!("{}", line(number, title, &outcome));
        self.lines.push((number, title.to_string(), outcome));
    }

    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|(_, _, o)| o.passed)
    }

    pub fn summary(&self) -> String {
        let passed = self.lines.iter().filter(|(_, _, o)| o.passed).count();
        format!("acceptance: {passed}/{} criteria passed", self.lines.len())
    }
}

pub fn line(number: usize, title: &str, o: &Outcome) -> String {
    format!(
        "criterion {number} [{}] {title}: {}",
        if o.passed { "PASS" } else { "FAIL" },
        o.detail
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_overrun_fails() {
        let o = Outcome::new(true, "ok").within(Duration::from_secs(3), Duration::from_secs(2));
        assert!(!o.passed);
        assert!(o.detail.contains("exceeded"));
        let o = Outcome::new(true, "ok").within(Duration::from_millis(5), Duration::from_secs(2));
        assert!(o.passed);
    }

    #[test]
    fn panics_become_failures() {
        let mut r = Report::default();
        r.run(1, "fine", || Outcome::new(true, "x"));
        r.run(2, "boom", || panic!("bad"));
        assert!(!r.all_passed());
        assert_eq!(r.summary(), "acceptance: 1/2 criteria passed");
    }
}
