//! Reports: inputs echoed back, results, and the ledger of every property
//! the task evaluated.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Not evaluated; `detail` says why.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Property {
    pub name: String,
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct Report {
    pub task: String,
    pub seed: u64,
    pub budget: u64,
    pub inputs: Value,
    pub results: Value,
    pub properties: Vec<Property>,
    pub verdict: Verdict,
    /// Wall-clock seconds, present only with `--timing`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

/// Collects properties while a task runs.
#[derive(Default)]
pub struct Ledger {
    pub properties: Vec<Property>,
}

impl Ledger {
    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.push(name, if pass { Status::Pass } else { Status::Fail }, detail, None);
    }
    pub fn fail_with(&mut self, name: &str, detail: impl Into<String>, counterexample: Value) {
        self.push(name, Status::Fail, detail, Some(counterexample));
    }
    pub fn skip(&mut self, name: &str, reason: impl Into<String>) {
        self.push(name, Status::Skipped, reason, None);
    }
    fn push(&mut self, name: &str, status: Status, detail: impl Into<String>, counterexample: Option<Value>) {
        self.properties.push(Property { name: name.into(), status, detail: detail.into(), counterexample });
    }
    pub fn verdict(&self) -> Verdict {
        if self.properties.iter().any(|p| p.status == Status::Fail) {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("task {} (seed {}, budget {})\n", self.task, self.seed, self.budget);
        if let Value::Object(m) = &self.results {
            for (k, v) in m {
                s.push_str(&format!("  {k}: {}\n", compact(v)));
            }
        }
        for p in &self.properties {
            let tag = match p.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            s.push_str(&format!("{tag} {}: {}\n", p.name, p.detail));
            if let Some(c) = &p.counterexample {
                s.push_str(&format!("     counterexample: {}\n", compact(c)));
            }
        }
        s.push_str(&format!("verdict: {}\n", if self.verdict == Verdict::Pass { "pass" } else { "fail" }));
        if let Some(t) = self.elapsed_seconds {
            s.push_str(&format!("elapsed: {t:.3}s\n"));
        }
        s
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
