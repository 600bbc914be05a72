//! Acceptance suites: twelve numbered criteria and a set of trivial checks.

pub mod criteria;
pub mod fixtures;
mod trivial;

use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use criteria::{Check, Ctx, CRITERIA};
pub use fixtures::{cantor_fixture, domain_lattice, CantorFixture, Fixtures};

pub const DEFAULT_SEED: u64 = 1729;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    All,
    Trivial,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "trivial" => Ok(Suite::Trivial),
            other => Err(invalid(format!("unknown suite {other:?}; expected all or trivial"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Small sizes for smoke runs; tolerances are then not meaningful.
    pub quick: bool,
    /// Criterion ids to run; all when empty.
    pub only: Vec<String>,
    /// Thread counts compared by the determinism criterion.
    pub thread_counts: Vec<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: DEFAULT_SEED, quick: false, only: Vec::new(), thread_counts: vec![1, 4, 8] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Outcome {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    /// Machine-readable record; depends only on the configuration and seed.
    pub artifact: Value,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{verdict} {:<4} {}: {} [{:.1} s]", self.id, self.title, self.detail, self.seconds)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub config: SuiteConfig,
    pub outcomes: Vec<Outcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    /// One JSON file per outcome, each embedding the suite configuration.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for o in &self.outcomes {
            let doc = json!({"id": o.id, "title": o.title, "passed": o.passed, "config": self.config, "artifact": o.artifact});
            let name = o.id.replace(|c: char| !c.is_ascii_alphanumeric() && c != '-', "_");
            std::fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(&doc)?)?;
        }
        Ok(())
    }
}

fn timed(id: &str, title: &str, f: impl FnOnce() -> Result<Check>) -> Outcome {
    let start = Instant::now();
    let (passed, detail, artifact) = match f() {
        Ok(c) => (c.passed, c.detail, c.artifact),
        Err(e) => (false, format!("error: {e}"), json!({"error": e.to_string()})),
    };
    Outcome { id: id.into(), title: title.into(), passed, detail, artifact, seconds: start.elapsed().as_secs_f64() }
}

fn selected(config: &SuiteConfig, id: &str) -> bool {
    config.only.is_empty() || config.only.iter().any(|o| o.eq_ignore_ascii_case(id))
}

/// Runs criteria 1–11 and returns their outcomes, calling `report` as each finishes.
fn run_numbered(config: &SuiteConfig, report: &mut dyn FnMut(&Outcome)) -> Vec<Outcome> {
    let fixtures = Fixtures::default();
    let ctx = Ctx { config, fixtures: &fixtures };
    let mut out = Vec::new();
    for (id, title, f) in CRITERIA {
        if !selected(config, id) {
            continue;
        }
        let o = timed(id, title, || f(&ctx));
        report(&o);
        out.push(o);
    }
    out
}

/// Re-runs criteria 1–11 at reduced size under each thread count and
/// compares the serialized artifacts byte for byte.
fn determinism(config: &SuiteConfig) -> Result<Check> {
    let quick = SuiteConfig { quick: true, only: Vec::new(), ..config.clone() };
    let mut runs: Vec<(usize, Vec<(String, String)>)> = Vec::new();
    for &t in &config.thread_counts {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().map_err(|e| invalid(e.to_string()))?;
        let outcomes = pool.install(|| run_numbered(&quick, &mut |_| {}));
        let texts = outcomes.into_iter().map(|o| Ok((o.id, serde_json::to_string(&o.artifact)?))).collect::<Result<Vec<_>>>()?;
        runs.push((t, texts));
    }
    let (_, first) = runs.first().ok_or_else(|| invalid("no thread counts given"))?;
    let mut rows = Vec::new();
    let mut mismatched = Vec::new();
    for (k, (id, text)) in first.iter().enumerate() {
        let same = runs.iter().all(|(_, r)| r[k].1 == *text);
        if !same {
            mismatched.push(id.clone());
        }
        let errored = text.contains("\"error\"");
        rows.push(json!({"id": id, "bytes": text.len(), "identical": same, "errored": errored}));
    }
    let errored: Vec<&Value> = rows.iter().filter(|r| r["errored"] == json!(true)).collect();
    Ok(Check {
        passed: mismatched.is_empty() && errored.is_empty(),
        detail: format!(
            "{} artifacts under threads {:?}: {} differ, {} errored",
            rows.len(),
            config.thread_counts,
            mismatched.len(),
            errored.len()
        ),
        artifact: json!({"threads": config.thread_counts, "quick": true, "rows": rows}),
    })
}

/// Runs a suite, calling `report` on every outcome as soon as it is known.
pub fn run_suite(suite: Suite, config: &SuiteConfig, mut report: impl FnMut(&Outcome)) -> SuiteReport {
    let outcomes = match suite {
        Suite::Trivial => trivial::run(&mut report),
        Suite::All => {
            let mut out = run_numbered(config, &mut report);
            if selected(config, "C12") {
                let o = timed("C12", "determinism across thread counts", || determinism(config));
                report(&o);
                out.push(o);
            }
            out
        }
    };
    SuiteReport { suite, config: config.clone(), outcomes }
}
