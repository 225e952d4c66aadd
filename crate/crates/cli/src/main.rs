mod args;
mod bench;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use subset_aic::bnb::{solve, SolverConfig};
use subset_aic::cardinality::{sweep_fast, sweep_naive, SweepMode};
use subset_aic::enumerate::{enumerate_all, write_table};
use subset_aic::stepwise::{sw_backward, sw_forward, Direction};
use subset_aic::{find_dependencies, load_csv, Dataset, DependencyCollection, GramSystem, ResponseColumn, SynthSpec};

use args::{CardinalityArgs, Cli, Command, DataArgs, EnumerateArgs, SolveArgs, SolverArgs, StepwiseArgs, SynthArgs};
use report::{
    names, solve_table, CardinalityOutput, DatasetInfo, EnumerateCheck, EnumerateOutput, SolveOutput, StepwiseOutput,
    Table, CARDINALITY_SCHEMA, ENUMERATE_SCHEMA, SOLVE_SCHEMA, STEPWISE_SCHEMA,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Solver(#[from] subset_aic::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use subset_aic::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Invariant(_) => 3,
            CliError::Solver(e) => match e {
                E::Config(_) | E::EnumerationCap { .. } | E::CardinalityOutOfRange { .. } => 1,
                E::Overflow | E::NotFree(_) | E::NoFreeVariables | E::BoundInversion { .. } => 3,
                _ => 2,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Stepwise(a) => cmd_stepwise(a),
        Command::Cardinality(a) => cmd_cardinality(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Bench(a) => bench::cmd_bench(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

pub struct Loaded {
    pub data: Dataset,
    pub gram: GramSystem,
    pub deps: DependencyCollection,
    pub info: DatasetInfo,
}

pub fn load(path: &Path, response: Option<&str>, raw: bool, name: Option<String>) -> Result<Loaded> {
    let response = response.map_or(ResponseColumn::Last, ResponseColumn::from);
    let mut data = load_csv(path, &response)?;
    if !raw {
        data = data.standardize()?;
    }
    let gram = GramSystem::build(&data)?;
    let deps = find_dependencies(&data);
    let name = name.unwrap_or_else(|| {
        path.file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
    });
    let info = DatasetInfo::new(name, path.display().to_string(), &data, &deps);
    Ok(Loaded { data, gram, deps, info })
}

fn load_args(a: &DataArgs) -> Result<Loaded> {
    load(&a.csv, a.response.as_deref(), a.raw, a.name.clone())
}

pub fn solver_config(a: &SolverArgs) -> SolverConfig {
    SolverConfig {
        branching: a.branching.into(),
        pool_size: a.pool_size as usize,
        stepwise_depth: usize::try_from(a.stepwise_depth).ok(),
        node_limit: a.node_limit,
        time_limit: Some(a.time_limit),
        order: a.order.into(),
        strong_cap: a.strong_cap,
        dynamic_dependency_check: a.dynamic_dependency_check,
        ..SolverConfig::default()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write `value` as JSON to `path` (`-` is stdout). Returns whether stdout was used.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<bool> {
    let Some(path) = path else {
        return Ok(false);
    };
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    if path == Path::new("-") {
        println!("{text}");
        return Ok(true);
    }
    let mut w = create(path)?;
    writeln!(w, "{text}").and_then(|_| w.flush()).map_err(io_err(path))?;
    Ok(false)
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let l = load_args(&a.data)?;
    let mut cfg = solver_config(&a.solver);
    cfg.enumeration_cap = a.enumeration_cap;
    cfg.trace = a.trace.is_some();
    cfg.validate()?;
    let report = solve(&l.gram, &l.deps, &cfg)?;

    if let Some(path) = &a.trace {
        let mut w = create(path)?;
        for node in &report.trace {
            let line = serde_json::to_string(node).expect("trace entries serialize");
            writeln!(w, "{line}").map_err(io_err(path))?;
        }
        w.flush().map_err(io_err(path))?;
    }

    let check = if a.enumerate_check {
        Some(if l.gram.p() > cfg.enumeration_cap {
            EnumerateCheck {
                status: "skipped".into(),
                oracle_objective: None,
                oracle_subset: None,
                difference: None,
            }
        } else {
            let e = enumerate_all(&l.gram, cfg.enumeration_cap, false)?;
            let diff = report.objective() - e.objective.value;
            EnumerateCheck {
                status: if diff.abs() <= 1e-6 { "ok" } else { "mismatch" }.into(),
                oracle_objective: Some(e.objective.value),
                oracle_subset: Some(e.best),
                difference: Some(diff),
            }
        })
    } else {
        None
    };

    let out = SolveOutput {
        schema: SOLVE_SCHEMA.into(),
        selected: names(&l.data, report.best.subset),
        dataset: l.info,
        config: cfg,
        report,
        enumerate_check: check,
    };
    if !emit_json(&out, a.json.as_deref())? {
        print!("{}", solve_table(&out.dataset.name, &out.report));
        println!("selected: {}", out.selected.join(", "));
        if let Some(c) = &out.enumerate_check {
            println!("enumerate check: {}", c.status);
        }
    }
    match &out.enumerate_check {
        Some(c) if c.status == "mismatch" => Err(CliError::Invariant(format!(
            "solver objective differs from enumeration by {:e}",
            c.difference.unwrap_or(f64::NAN)
        ))),
        _ => Ok(()),
    }
}

fn cmd_stepwise(a: StepwiseArgs) -> Result<()> {
    let l = load_args(&a.data)?;
    let report = match Direction::from(a.direction) {
        Direction::Forward => sw_forward(&l.gram),
        Direction::Backward => sw_backward(&l.gram),
    };
    let out = StepwiseOutput {
        schema: STEPWISE_SCHEMA.into(),
        selected: names(&l.data, report.incumbent.subset),
        dataset: l.info,
        report,
    };
    if !emit_json(&out, a.json.as_deref())? {
        let mut t = Table::new(&["step", "move", "variable", "objective"]);
        for (i, m) in out.report.moves.iter().enumerate() {
            let sign = if m.direction == Direction::Forward { "+" } else { "-" };
            t.push(vec![
                (i + 1).to_string(),
                sign.into(),
                l.data.predictor_name(m.index).to_string(),
                format!("{:.4}", m.objective),
            ]);
        }
        print!("{}", t.render());
        println!(
            "{}: AIC {:.2}, k {}, {} subsets evaluated",
            out.dataset.name,
            out.report.full_aic,
            out.report.incumbent.k(),
            out.report.evaluations
        );
        println!("selected: {}", out.selected.join(", "));
    }
    Ok(())
}

fn cmd_cardinality(a: CardinalityArgs) -> Result<()> {
    let l = load_args(&a.data)?;
    let report = match SweepMode::from(a.mode) {
        SweepMode::Naive => sweep_naive(&l.gram, &l.deps)?,
        mode => sweep_fast(&l.gram, &l.deps, mode, a.seed_stepwise)?,
    };
    if let Some(path) = &a.table {
        let mut w = csv::Writer::from_writer(create(path)?);
        let fmt = |v: f64| if v.is_finite() { v.to_string() } else { "inf".into() };
        w.write_record(["k", "eta", "objective", "nodes"])
            .map_err(|e| io_err(path)(e.into()))?;
        for r in &report.rows {
            w.write_record([r.k.to_string(), fmt(r.eta), fmt(r.objective), r.nodes.to_string()])
                .map_err(|e| io_err(path)(e.into()))?;
        }
        w.flush().map_err(io_err(path))?;
    }
    let out = CardinalityOutput {
        schema: CARDINALITY_SCHEMA.into(),
        selected: names(&l.data, report.best.subset),
        dataset: l.info,
        report,
    };
    if !emit_json(&out, a.json.as_deref())? {
        let mut t = Table::new(&["k", "eta", "objective", "nodes"]);
        for r in &out.report.rows {
            t.push(vec![
                r.k.to_string(),
                format!("{:.6}", r.eta),
                format!("{:.4}", r.objective),
                r.nodes.to_string(),
            ]);
        }
        print!("{}", t.render());
        let stop = out
            .report
            .stopped_at
            .map_or(String::new(), |k| format!(", stopped before k={k}"));
        println!(
            "{} ({}): AIC {:.2}, k {}, {} size solves{stop}",
            out.dataset.name,
            out.report.mode.name(),
            out.report.full_aic,
            out.report.best.k(),
            out.report.solves
        );
        println!("selected: {}", out.selected.join(", "));
    }
    Ok(())
}

fn cmd_enumerate(a: EnumerateArgs) -> Result<()> {
    let l = load_args(&a.data)?;
    let result = enumerate_all(&l.gram, a.cap, a.full_table.is_some())?;
    if let (Some(path), Some(rows)) = (&a.full_table, &result.table) {
        let w = create(path)?;
        write_table(rows, l.gram.n(), w)?;
    }
    let out = EnumerateOutput {
        schema: ENUMERATE_SCHEMA.into(),
        selected: names(&l.data, result.best),
        dataset: l.info,
        result,
    };
    if !emit_json(&out, a.json.as_deref())? {
        println!(
            "{}: AIC {:.2}, k {}, {} subsets evaluated",
            out.dataset.name,
            out.result.full_aic,
            out.result.best.len(),
            out.result.evaluated
        );
        println!("selected: {}", out.selected.join(", "));
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let hot: usize = a.one_hot.iter().sum();
    if hot > a.p || (a.dependencies > 0 && a.p - hot < a.dependencies + 2) {
        return Err(CliError::Usage(
            "p is too small for the requested one-hot groups and dependencies".into(),
        ));
    }
    if a.n < 2 || a.p == 0 {
        return Err(CliError::Usage("need n >= 2 and p >= 1".into()));
    }
    let mut spec = SynthSpec::new(a.n, a.p)
        .dependencies(a.dependencies)
        .one_hot(&a.one_hot)
        .noise(a.noise)
        .seed(a.seed);
    if let Some(k) = a.active {
        spec = spec.active(k);
    }
    let data = spec.generate();
    match &a.out {
        Some(path) => data.write_csv(create(path)?)?,
        None => data.write_csv(io::stdout().lock())?,
    }
    Ok(())
}
