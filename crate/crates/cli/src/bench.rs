//! Batch runs from a TOML manifest.
//!
//! ```toml
//! time_limit = 60.0
//! rules = ["std", "mfb", "sb"]
//!
//! [[dataset]]
//! name = "housing"
//! path = "housing.csv"      # relative to the manifest
//! response = "MEDV"
//!
//! [[dataset]]
//! name = "dependent"
//! synth = { n = 80, p = 14, dependencies = 2, one_hot = [4], seed = 3 }
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use subset_aic::bnb::{solve, SolverConfig};
use subset_aic::{find_dependencies, BranchingRule, GramSystem, SynthSpec};

use crate::args::BenchArgs;
use crate::report::{BenchOutput, BenchRow, RuleSummary, Table, BENCH_SCHEMA};
use crate::{emit_json, load, CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    time_limit: Option<f64>,
    rules: Option<Vec<String>>,
    #[serde(default)]
    dataset: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    name: Option<String>,
    path: Option<PathBuf>,
    response: Option<String>,
    #[serde(default)]
    raw: bool,
    synth: Option<Synth>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Synth {
    n: usize,
    p: usize,
    #[serde(default)]
    dependencies: usize,
    #[serde(default)]
    one_hot: Vec<usize>,
    active: Option<usize>,
    noise: Option<f64>,
    #[serde(default)]
    seed: u64,
}

struct Prepared {
    gram: GramSystem,
    deps: subset_aic::DependencyCollection,
}

fn prepare(entry: &Entry, base: &Path) -> Result<Prepared> {
    match (&entry.path, &entry.synth) {
        (Some(path), None) => {
            let l = load(&base.join(path), entry.response.as_deref(), entry.raw, None)?;
            Ok(Prepared {
                gram: l.gram,
                deps: l.deps,
            })
        }
        (None, Some(s)) => {
            let hot: usize = s.one_hot.iter().sum();
            if hot > s.p || (s.dependencies > 0 && s.p - hot < s.dependencies + 2) || s.n < 2 || s.p == 0 {
                return Err(CliError::Usage("synthetic dataset parameters are inconsistent".into()));
            }
            let mut spec = SynthSpec::new(s.n, s.p)
                .dependencies(s.dependencies)
                .one_hot(&s.one_hot)
                .seed(s.seed);
            if let Some(k) = s.active {
                spec = spec.active(k);
            }
            if let Some(sd) = s.noise {
                spec = spec.noise(sd);
            }
            let mut data = spec.generate();
            if !entry.raw {
                data = data.standardize()?;
            }
            Ok(Prepared {
                gram: GramSystem::build(&data)?,
                deps: find_dependencies(&data),
            })
        }
        _ => Err(CliError::Usage(
            "each dataset needs exactly one of `path` or `synth`".into(),
        )),
    }
}

fn entry_name(i: usize, e: &Entry) -> String {
    e.name.clone().unwrap_or_else(|| match &e.path {
        Some(p) => p
            .file_stem()
            .map_or_else(|| format!("dataset{i}"), |s| s.to_string_lossy().into_owned()),
        None => format!("dataset{i}"),
    })
}

pub fn cmd_bench(a: BenchArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.manifest).map_err(|source| CliError::Io {
        path: a.manifest.clone(),
        source,
    })?;
    let manifest: Manifest =
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", a.manifest.display())))?;
    let rules: Vec<BranchingRule> = match (&a.rules, &manifest.rules) {
        (Some(r), _) => r.iter().map(|&r| r.into()).collect(),
        (None, Some(r)) => r.iter().map(|s| s.parse()).collect::<Result<_, _>>()?,
        (None, None) => vec![BranchingRule::Std, BranchingRule::Mfb, BranchingRule::Sb],
    };
    let time_limit = a
        .time_limit
        .or(manifest.time_limit)
        .unwrap_or(subset_aic::bnb::DEFAULT_TIME_LIMIT);
    let base = a.manifest.parent().unwrap_or(Path::new("."));

    let mut rows = Vec::new();
    for (i, entry) in manifest.dataset.iter().enumerate() {
        let name = entry_name(i, entry);
        let prepared = prepare(entry, base);
        for &rule in &rules {
            let failed = |msg: String| BenchRow {
                dataset: name.clone(),
                rule: rule.name().into(),
                status: None,
                aic: None,
                k: None,
                time_secs: None,
                nodes: None,
                gap_percent: None,
                error: Some(msg),
            };
            let row = match &prepared {
                Err(e) => failed(e.to_string()),
                Ok(p) => {
                    let cfg = SolverConfig {
                        time_limit: Some(time_limit),
                        ..SolverConfig::default().with_branching(rule)
                    };
                    match solve(&p.gram, &p.deps, &cfg) {
                        Ok(r) => BenchRow {
                            dataset: name.clone(),
                            rule: rule.name().into(),
                            status: Some(r.status.name().into()),
                            aic: Some(r.full_aic),
                            k: Some(r.best.k()),
                            time_secs: Some(r.wall_time_secs),
                            nodes: Some(r.counters.nodes),
                            gap_percent: Some(r.gap_percent),
                            error: None,
                        },
                        Err(e) => failed(e.to_string()),
                    }
                }
            };
            rows.push(row);
        }
    }

    let summary = rules
        .iter()
        .map(|rule| {
            let nodes: Vec<u64> = rows
                .iter()
                .filter(|r| r.rule == rule.name())
                .filter_map(|r| r.nodes)
                .collect();
            RuleSummary {
                rule: rule.name().into(),
                solved: nodes.len(),
                mean_nodes: (!nodes.is_empty()).then(|| nodes.iter().sum::<u64>() as f64 / nodes.len() as f64),
            }
        })
        .collect();
    let out = BenchOutput {
        schema: BENCH_SCHEMA.into(),
        time_limit,
        rules: rules.iter().map(|r| r.name().to_string()).collect(),
        rows,
        summary,
    };
    if !emit_json(&out, a.json.as_deref())? {
        let mut t = Table::new(&["Name", "rule", "AIC", "k", "time(sec)", "nodes", "gap(%)", "status"]);
        for r in &out.rows {
            let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
            t.push(vec![
                r.dataset.clone(),
                r.rule.clone(),
                opt(r.aic.map(|v| format!("{v:.2}"))),
                opt(r.k.map(|v| v.to_string())),
                opt(r.time_secs.map(|v| format!("{v:.2}"))),
                opt(r.nodes.map(|v| v.to_string())),
                opt(r.gap_percent.map(|v| format!("{v:.2}"))),
                r.status
                    .clone()
                    .or_else(|| r.error.as_ref().map(|e| format!("error: {e}")))
                    .unwrap_or_default(),
            ]);
        }
        print!("{}", t.render());
        for s in &out.summary {
            if let Some(m) = s.mean_nodes {
                println!("{}: mean nodes {m:.1} over {} datasets", s.rule, s.solved);
            }
        }
    }
    Ok(())
}
