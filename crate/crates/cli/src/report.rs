//! JSON report envelopes and the human-readable table.

use serde::{Deserialize, Serialize};
use subset_aic::bnb::{SolveReport, SolverConfig};
use subset_aic::cardinality::SweepReport;
use subset_aic::stepwise::StepwiseReport;
use subset_aic::{Dataset, DependencyCollection, Enumeration, VarSet};

pub const SOLVE_SCHEMA: &str = "subset-aic/solve/v1";
pub const STEPWISE_SCHEMA: &str = "subset-aic/stepwise/v1";
pub const CARDINALITY_SCHEMA: &str = "subset-aic/cardinality/v1";
pub const ENUMERATE_SCHEMA: &str = "subset-aic/enumerate/v1";
pub const BENCH_SCHEMA: &str = "subset-aic/bench/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub path: String,
    pub n: usize,
    pub p: usize,
    pub response: String,
    pub predictors: Vec<String>,
    pub standardized: bool,
    /// Variance divisor used when standardizing.
    pub divisor: Option<String>,
    pub constant_predictors: Vec<String>,
    /// Each stored dependent set, by predictor name.
    pub dependent_sets: Vec<Vec<String>>,
}

impl DatasetInfo {
    pub fn new(name: String, path: String, d: &Dataset, deps: &DependencyCollection) -> Self {
        let meta = d.standardization();
        DatasetInfo {
            name,
            path,
            n: d.n(),
            p: d.p(),
            response: d.response_name().to_string(),
            predictors: (0..d.p()).map(|j| d.predictor_name(j).to_string()).collect(),
            standardized: meta.is_some(),
            divisor: meta.map(|m| m.divisor.clone()),
            constant_predictors: meta
                .map(|m| {
                    m.constant_predictors()
                        .into_iter()
                        .map(|j| d.predictor_name(j).to_string())
                        .collect()
                })
                .unwrap_or_default(),
            dependent_sets: deps.member_sets().map(|s| names(d, s)).collect(),
        }
    }
}

pub fn names(d: &Dataset, s: VarSet) -> Vec<String> {
    s.iter().map(|j| d.predictor_name(j).to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateCheck {
    /// `ok`, `mismatch` or `skipped`.
    pub status: String,
    pub oracle_objective: Option<f64>,
    pub oracle_subset: Option<VarSet>,
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub schema: String,
    pub dataset: DatasetInfo,
    pub config: SolverConfig,
    pub selected: Vec<String>,
    pub report: SolveReport,
    pub enumerate_check: Option<EnumerateCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseOutput {
    pub schema: String,
    pub dataset: DatasetInfo,
    pub selected: Vec<String>,
    pub report: StepwiseReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityOutput {
    pub schema: String,
    pub dataset: DatasetInfo,
    pub selected: Vec<String>,
    pub report: SweepReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateOutput {
    pub schema: String,
    pub dataset: DatasetInfo,
    pub selected: Vec<String>,
    pub result: Enumeration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub rule: String,
    pub status: Option<String>,
    pub aic: Option<f64>,
    pub k: Option<usize>,
    pub time_secs: Option<f64>,
    pub nodes: Option<u64>,
    pub gap_percent: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub rule: String,
    pub solved: usize,
    pub mean_nodes: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    pub schema: String,
    pub time_limit: f64,
    pub rules: Vec<String>,
    pub rows: Vec<BenchRow>,
    pub summary: Vec<RuleSummary>,
}

pub struct Table {
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            rows: vec![header.iter().map(|s| s.to_string()).collect()],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let cols = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| {
                self.rows
                    .iter()
                    .filter_map(|r| r.get(c))
                    .map(String::len)
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// The `Name AIC k time gap nodes` row used by `solve`.
pub fn solve_table(name: &str, r: &SolveReport) -> String {
    let mut t = Table::new(&["Name", "AIC", "k", "time(sec)", "gap(%)", "nodes", "status"]);
    t.push(vec![
        name.to_string(),
        format!("{:.2}", r.full_aic),
        r.best.k().to_string(),
        format!("{:.2}", r.wall_time_secs),
        format!("{:.2}", r.gap_percent),
        r.counters.nodes.to_string(),
        r.status.name().to_string(),
    ]);
    t.render()
}
