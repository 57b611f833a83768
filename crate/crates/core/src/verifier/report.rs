//! Check verdicts and machine-readable reports.

use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::padic::Valuation;

/// Three-valued outcome of a sampled check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl Verdict {
    /// Combines verdicts pessimistically: Fail dominates Indeterminate
    /// dominates Pass.
    pub fn worst(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            _ => Pass,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
        }
    }

    /// Process exit code convention: 0 pass, 1 fail, 2 indeterminate.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Indeterminate => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The result of one check over one action.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub check: String,
    pub action: String,
    pub p: u64,
    pub samples: usize,
    /// Smallest discrepancy valuation observed over all comparisons; `None`
    /// means no comparison produced any information (vacuous check).
    pub min_discrepancy_valuation: Option<i64>,
    pub threshold: i64,
    pub verdict: Verdict,
    pub witnesses: Vec<Value>,
}

impl CheckReport {
    pub fn to_json(&self) -> Value {
        let disc = match self.min_discrepancy_valuation {
            Some(v) => json!(v),
            None => json!("inf"),
        };
        json!({
            "check": self.check,
            "action": self.action,
            "p": self.p,
            "samples": self.samples,
            "min_discrepancy_valuation": disc,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "witnesses": self.witnesses,
        })
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let disc = match self.min_discrepancy_valuation {
            Some(v) => v.to_string(),
            None => "inf".to_string(),
        };
        write!(
            f,
            "check={} action={} p={} samples={} min_discrepancy={} threshold={} verdict={}",
            self.check, self.action, self.p, self.samples, disc, self.threshold, self.verdict
        )?;
        if !self.witnesses.is_empty() {
            write!(f, " witnesses={}", Value::Array(self.witnesses.clone()))?;
        }
        Ok(())
    }
}

/// How a single comparison's valuation is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObserveStyle {
    /// Difference-quotient comparisons: finite discrepancy below the
    /// threshold fails, at or above it passes; an unresolved zero needs its
    /// bound to reach the threshold, otherwise the comparison is
    /// indeterminate.
    Quotient,
    /// Identity comparisons: ANY finite discrepancy valuation is a certain
    /// violation and fails; an unresolved zero passes when certified to the
    /// threshold and is indeterminate below it.
    Exact,
}

/// One judged comparison: the discrepancy valuation plus an optional witness
/// payload (built eagerly only when the observation fails).
#[derive(Debug, Clone)]
pub struct Obs {
    pub val: Valuation,
    pub witness: Option<Value>,
}

impl Obs {
    pub fn new(val: Valuation) -> Self {
        Obs { val, witness: None }
    }

    pub fn with_witness(val: Valuation, witness: Value) -> Self {
        Obs { val, witness: Some(witness) }
    }
}

/// A (style, threshold) pair that classifies observations.  Check closures
/// use it to decide whether a comparison needs a witness payload; the tally
/// applies the same rule when folding.
#[derive(Debug, Clone, Copy)]
pub struct Judge {
    pub style: ObserveStyle,
    pub threshold: i64,
}

impl Judge {
    pub fn fails(&self, val: &Valuation) -> bool {
        match (self.style, val) {
            (ObserveStyle::Quotient, Valuation::Finite(v)) => *v < self.threshold,
            (ObserveStyle::Exact, Valuation::Finite(_)) => true,
            (_, Valuation::Unbounded { .. }) => false,
        }
    }

    /// Builds an observation; the witness closure runs only when this
    /// comparison fails under the judge's rule.
    pub fn obs(&self, val: Valuation, mk: impl FnOnce() -> Value) -> Obs {
        if self.fails(&val) {
            Obs::with_witness(val, mk())
        } else {
            Obs::new(val)
        }
    }
}

const MAX_WITNESSES: usize = 8;

/// Accumulates observations into a report.
#[derive(Debug)]
pub struct Tally {
    judge: Judge,
    min: Option<i64>,
    failed: Vec<Value>,
    fail_count: usize,
    indeterminate: usize,
    notes: Vec<Value>,
}

impl Tally {
    pub fn new(style: ObserveStyle, threshold: i64) -> Self {
        Tally {
            judge: Judge { style, threshold },
            min: None,
            failed: Vec::new(),
            fail_count: 0,
            indeterminate: 0,
            notes: Vec::new(),
        }
    }

    pub fn judge(&self) -> Judge {
        self.judge
    }

    pub fn threshold(&self) -> i64 {
        self.judge.threshold
    }

    fn fold_min(&mut self, v: i64) {
        self.min = Some(self.min.map_or(v, |m| m.min(v)));
    }

    pub fn observe(&mut self, obs: Obs) {
        let fails = self.judge.fails(&obs.val);
        match obs.val {
            Valuation::Finite(v) => {
                self.fold_min(v);
                if fails {
                    self.fail_count += 1;
                    if self.failed.len() < MAX_WITNESSES {
                        self.failed.push(
                            obs.witness.unwrap_or_else(|| json!({ "valuation": v })),
                        );
                    }
                }
            }
            Valuation::Unbounded { bound } => {
                self.fold_min(bound);
                if bound < self.judge.threshold {
                    self.indeterminate += 1;
                    if let Some(w) = obs.witness {
                        if self.notes.len() < MAX_WITNESSES {
                            self.notes.push(w);
                        }
                    }
                }
            }
        }
    }

    /// Records a failure that is not valuation-shaped (e.g. a structural
    /// mismatch such as unequal ranks).
    pub fn fail(&mut self, witness: Value) {
        self.fail_count += 1;
        if self.failed.len() < MAX_WITNESSES {
            self.failed.push(witness);
        }
    }

    /// Records a sample that could not be evaluated; counts as indeterminate.
    pub fn error(&mut self, context: &str, msg: impl fmt::Display) {
        self.indeterminate += 1;
        if self.notes.len() < MAX_WITNESSES {
            self.notes.push(json!({ "error": format!("{}: {}", context, msg) }));
        }
    }

    pub fn verdict(&self) -> Verdict {
        if self.fail_count > 0 {
            Verdict::Fail
        } else if self.indeterminate > 0 {
            Verdict::Indeterminate
        } else {
            Verdict::Pass
        }
    }

    pub fn finish(self, check: &str, action: &str, p: u64, samples: usize) -> CheckReport {
        let verdict = self.verdict();
        let threshold = self.judge.threshold;
        let mut witnesses = self.failed;
        if verdict == Verdict::Indeterminate {
            witnesses.extend(self.notes);
        }
        CheckReport {
            check: check.to_string(),
            action: action.to_string(),
            p,
            samples,
            min_discrepancy_valuation: self.min,
            threshold,
            verdict,
            witnesses,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_prefers_failure_over_doubt() {
        use Verdict::*;
        assert_eq!(Pass.worst(Pass), Pass);
        assert_eq!(Pass.worst(Indeterminate), Indeterminate);
        assert_eq!(Indeterminate.worst(Fail), Fail);
        assert_eq!(Fail.worst(Pass), Fail);
    }

    #[test]
    fn exit_codes_follow_the_verdict() {
        assert_eq!(Verdict::Pass.exit_code(), 0);
        assert_eq!(Verdict::Fail.exit_code(), 1);
        assert_eq!(Verdict::Indeterminate.exit_code(), 2);
    }

    #[test]
    fn vacuous_tally_serializes_min_as_inf() {
        let tally = Tally::new(ObserveStyle::Exact, 24);
        let report = tally.finish("isotropy", "demo", 5, 0);
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.min_discrepancy_valuation, None);
        let json = report.to_json();
        assert_eq!(json["min_discrepancy_valuation"], serde_json::json!("inf"));
        assert_eq!(json["verdict"], serde_json::json!("pass"));
    }

    #[test]
    fn quotient_judgement_uses_the_threshold() {
        let mut tally = Tally::new(ObserveStyle::Quotient, 2);
        tally.observe(Obs::new(Valuation::Finite(5)));
        tally.observe(Obs::new(Valuation::Finite(2)));
        assert_eq!(tally.verdict(), Verdict::Pass);
        tally.observe(Obs::with_witness(
            Valuation::Finite(1),
            serde_json::json!({"where": "here"}),
        ));
        let report = tally.finish("generator", "demo", 5, 3);
        assert_eq!(report.verdict, Verdict::Fail);
        assert_eq!(report.min_discrepancy_valuation, Some(1));
        assert_eq!(report.witnesses.len(), 1);
    }

    #[test]
    fn exact_judgement_fails_any_finite_valuation() {
        let mut tally = Tally::new(ObserveStyle::Exact, 24);
        tally.observe(Obs::new(Valuation::Unbounded { bound: 30 }));
        assert_eq!(tally.verdict(), Verdict::Pass);
        tally.observe(Obs::new(Valuation::Unbounded { bound: 10 }));
        assert_eq!(tally.verdict(), Verdict::Indeterminate);
        tally.observe(Obs::new(Valuation::Finite(40)));
        assert_eq!(tally.verdict(), Verdict::Fail);
    }
}
