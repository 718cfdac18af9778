//! `lom`: generate scenarios, build and export the MILP, run the greedy
//! baseline or the exact desk-scale search, hand the model to an external
//! solver, and evaluate or compare plans.
//!
//! Exit status: 0 on success, 2 on invalid input, 3 when a solver fails.

mod solver;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lom::evaluate::{compare, coverage_report, summarize_improvements, Comparison, EvalReport};
use lom::generator::{generate, GenSpec};
use lom::geometry::coverage_sets;
use lom::heuristic::greedy_plan;
use lom::model::{
    build_model, decode_solution, export, export_warm_start, import_solution, round_penalties,
    warm_start, BuildOptions, ExportFormat, ModelInstance, ModelMode,
};
use lom::oracle::{solve_exact_with, SearchLimits};
use lom::scenario::{precompute_pen, validate};
use lom::{Execution, LookPlan, PenaltyTable, Scenario};

/// Default optimality gap handed to the solver.
const DEFAULT_GAP: f64 = 0.05;

#[derive(Parser)]
#[command(name = "lom", version, about = "Satellite look allocation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic scenario from a spec file or a preset.
    Gen(GenArgs),
    /// Build the MILP and export it as MPS or LP.
    Build(BuildArgs),
    /// Greedy baseline plan at one fixed resolution.
    Heuristic(HeuristicArgs),
    /// Exact plan by exhaustive search (desk-scale instances only).
    Exact(ExactArgs),
    /// Export the model, run an external solver and decode its answer.
    Solve(SolveArgs),
    /// Evaluate a plan against a scenario.
    Eval(EvalArgs),
    /// Compare plans or reports pairwise (A against B).
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Base,
    Dense,
    Desk,
}

#[derive(Args)]
struct GenArgs {
    /// GenSpec JSON file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    out: PathBuf,
    /// Also write the effective spec.
    #[arg(long)]
    spec_out: Option<PathBuf>,
}

/// Scenario input with parameter overrides.
#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Sets rmin for every cell.
    #[arg(long)]
    rmin: Option<u8>,
    #[arg(long)]
    maxlow: Option<u32>,
    #[arg(long)]
    never: Option<f64>,
    #[arg(long)]
    looks_required: Option<u32>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario, Exit> {
        let mut scn = Scenario::load(&self.scenario)?;
        if let Some(r) = self.rmin {
            for c in &mut scn.cells {
                c.rmin = r;
            }
        }
        if let Some(m) = self.maxlow {
            scn.params.maxlow = m;
        }
        if let Some(n) = self.never {
            scn.params.never = n;
        }
        if let Some(l) = self.looks_required {
            scn.params.looks_required = l;
        }
        validate(&scn).map_err(lom::Error::InvalidScenario)?;
        Ok(scn)
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Keep every index of the full model and pin unused ones with rows.
    #[arg(long)]
    dense: bool,
    /// Model file format; taken from the output extension when omitted.
    #[arg(long)]
    format: Option<ExportFormat>,
    /// Round penalties half-to-even to this many decimals before building.
    #[arg(long)]
    round_places: Option<u32>,
}

impl ModelArgs {
    fn options(&self) -> BuildOptions {
        BuildOptions {
            mode: if self.dense {
                ModelMode::Dense
            } else {
                ModelMode::Sparse
            },
            gap_levels: None,
        }
    }

    fn format_for(&self, path: &Path) -> Result<ExportFormat, Exit> {
        if let Some(f) = self.format {
            return Ok(f);
        }
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        ext.parse()
            .map_err(|e: String| Exit::invalid(anyhow!("{e}; pass --format")))
    }

    fn build(&self, scn: &Scenario) -> Result<(ModelInstance, PenaltyTable), Exit> {
        let pen = precompute_pen(scn)?;
        let cov = coverage_sets(scn)?;
        let model_pen = match self.round_places {
            Some(p) => round_penalties(&pen, p),
            None => pen.clone(),
        };
        let model = build_model(scn, &model_pen, &cov, &self.options())?;
        Ok((model, pen))
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, short)]
    out: PathBuf,
    /// Write the all-ignored warm start as `name value` lines.
    #[arg(long)]
    warmstart: Option<PathBuf>,
    /// Write the size report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct HeuristicArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Resolution used for every look.
    #[arg(long, short)]
    resolution: u8,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = SearchLimits::default().max_nodes)]
    max_nodes: u64,
    /// Run the search on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Directory for the model, warm start and solution files.
    #[arg(long)]
    workdir: PathBuf,
    /// Shell command template with {model}, {warmstart}, {solution}, {gap},
    /// {timelimit} and {options} placeholders.
    #[arg(long, env = "LOM_SOLVER_CMD")]
    solver_cmd: String,
    /// Relative optimality gap in [0, 1].
    #[arg(long, default_value_t = DEFAULT_GAP)]
    gap: f64,
    /// Seconds; 0 means no limit.
    #[arg(long, default_value_t = 0.0)]
    time_limit: f64,
    /// Passed to the solver verbatim.
    #[arg(long, default_value = "")]
    solver_options: String,
    /// Do not write or pass a warm start.
    #[arg(long)]
    no_warmstart: bool,
    /// Decoded plan output.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Evaluation report output (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    plan: PathBuf,
    /// Write the report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Plan (JSON list) or report (JSON object) for side A; repeatable.
    #[arg(long = "a", required = true)]
    a: Vec<PathBuf>,
    /// Side B, paired with `--a` in order.
    #[arg(long = "b", required = true)]
    b: Vec<PathBuf>,
    /// Needed when any input is a plan.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Write one CSV row per pair.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Error with its exit status.
struct Exit {
    code: u8,
    err: anyhow::Error,
}

impl Exit {
    fn invalid(err: anyhow::Error) -> Self {
        Exit { code: 2, err }
    }

    fn solver(err: anyhow::Error) -> Self {
        Exit { code: 3, err }
    }
}

impl From<lom::Error> for Exit {
    fn from(e: lom::Error) -> Self {
        let code = match e {
            lom::Error::SearchBlowup { .. } | lom::Error::NoFeasiblePlan => 3,
            _ => 2,
        };
        Exit {
            code,
            err: e.into(),
        }
    }
}

impl From<anyhow::Error> for Exit {
    fn from(err: anyhow::Error) -> Self {
        Exit::invalid(err)
    }
}

fn write(path: &Path, text: &str) -> Result<(), Exit> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Exit::invalid)
}

fn cmd_gen(a: &GenArgs) -> Result<(), Exit> {
    let mut spec = match (&a.spec, a.preset) {
        (Some(p), _) => GenSpec::load(p)?,
        (None, Some(Preset::Base)) => GenSpec::base_case(0),
        (None, Some(Preset::Dense)) => GenSpec::dense_sizing(0),
        (None, Some(Preset::Desk)) => GenSpec::desk(0),
        (None, None) => unreachable!("clap requires one"),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let scn = generate(&spec)?;
    scn.save(&a.out)?;
    if let Some(p) = &a.spec_out {
        write(p, &spec.to_json())?;
    }
    println!(
        "scenario {}: {} cells, {} swaths, R = {}",
        scn.fingerprint(),
        scn.num_cells(),
        scn.num_swaths(),
        scn.num_resolutions()
    );
    Ok(())
}

fn size_report(model: &ModelInstance) -> serde_json::Value {
    let (x, y, g, z) = model.variable_counts();
    let rows: serde_json::Map<String, serde_json::Value> = model
        .row_counts()
        .into_iter()
        .map(|(t, n)| (t.to_string(), n.into()))
        .collect();
    serde_json::json!({
        "mode": if model.mode == ModelMode::Dense { "dense" } else { "sparse" },
        "variables": model.num_variables(),
        "variables_by_kind": { "X": x, "Y": y, "G": g, "Z": z },
        "rows": model.num_rows(),
        "rows_by_tag": rows,
        "objective_terms": model.objective.len(),
    })
}

fn cmd_build(a: &BuildArgs) -> Result<(), Exit> {
    let scn = a.scenario.load()?;
    let format = a.model.format_for(&a.out)?;
    let (model, _) = a.model.build(&scn)?;
    export(&model, format, &a.out)?;
    if let Some(p) = &a.warmstart {
        export_warm_start(&model, &warm_start(&model), p)?;
    }
    let report = size_report(&model);
    if let Some(p) = &a.report {
        write(
            p,
            &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
        )?;
    }
    println!("variables {}", model.num_variables());
    let (x, y, g, z) = model.variable_counts();
    println!("  X {x}  Y {y}  G {g}  Z {z}");
    println!("rows {}", model.num_rows());
    for (tag, n) in model.row_counts() {
        println!("  {tag:<6}{n}");
    }
    Ok(())
}

fn cmd_heuristic(a: &HeuristicArgs) -> Result<(), Exit> {
    let scn = a.scenario.load()?;
    let cov = coverage_sets(&scn)?;
    let plan = greedy_plan(&scn, &cov, a.resolution)?;
    plan.save(&a.out)?;
    println!("{} looks at resolution {}", plan.len(), a.resolution);
    Ok(())
}

fn cmd_exact(a: &ExactArgs) -> Result<(), Exit> {
    let scn = a.scenario.load()?;
    let pen = precompute_pen(&scn)?;
    let cov = coverage_sets(&scn)?;
    let limits = SearchLimits {
        max_nodes: a.max_nodes,
        ..SearchLimits::default()
    };
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let sol = solve_exact_with(&scn, &pen, &cov, &limits, exec)?;
    sol.plan.save(&a.out)?;
    println!("{} looks, objective {}", sol.plan.len(), sol.objective);
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Result<(), Exit> {
    if !(0.0..=1.0).contains(&a.gap) {
        return Err(Exit::invalid(anyhow!(
            "--gap must be in [0, 1], got {}",
            a.gap
        )));
    }
    let scn = a.scenario.load()?;
    let (model, pen) = a.model.build(&scn)?;
    fs::create_dir_all(&a.workdir)
        .with_context(|| format!("cannot create {}", a.workdir.display()))?;
    let format = a.model.format.unwrap_or(ExportFormat::Mps);
    let ext = match format {
        ExportFormat::Mps => "mps",
        ExportFormat::Lp => "lp",
    };
    let model_path = a.workdir.join(format!("model.{ext}"));
    let ws_path = a.workdir.join("warmstart.txt");
    let sol_path = a.workdir.join("solution.txt");
    export(&model, format, &model_path)?;
    if !a.no_warmstart {
        export_warm_start(&model, &warm_start(&model), &ws_path)?;
    }
    let _ = fs::remove_file(&sol_path);
    let command = solver::render(
        &a.solver_cmd,
        &solver::Handoff {
            model: &model_path,
            warmstart: (!a.no_warmstart).then_some(ws_path.as_path()),
            solution: &sol_path,
            gap: a.gap,
            time_limit: a.time_limit,
            options: &a.solver_options,
        },
    );
    eprintln!("running: {command}");
    solver::run(&command).map_err(Exit::solver)?;
    let assignment = import_solution(&model, &sol_path)
        .map_err(|e| Exit::solver(anyhow::Error::from(e).context("reading solver output")))?;
    let decoded = decode_solution(&model, &assignment)
        .map_err(|e| Exit::solver(anyhow::Error::from(e).context("solver answer is infeasible")))?;
    let cov = coverage_sets(&scn)?;
    let report = coverage_report(&scn, &pen, &cov, &decoded.plan);
    if let Some(p) = &a.plan {
        decoded.plan.save(p)?;
    }
    if let Some(p) = &a.report {
        write(p, &report.to_json())?;
    }
    println!("decoded objective {}", decoded.objective);
    println!(
        "  penalty {}  never {}",
        decoded.penalty, decoded.never_penalty
    );
    println!("simulated objective {}", report.objective);
    print!("{}", report.to_table());
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<(), Exit> {
    let scn = a.scenario.load()?;
    let plan = LookPlan::load(&a.plan)?;
    let pen = precompute_pen(&scn)?;
    let cov = coverage_sets(&scn)?;
    let report = coverage_report(&scn, &pen, &cov, &plan);
    if let Some(p) = &a.report {
        write(p, &report.to_json())?;
    }
    if a.json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.to_table());
        for v in &report.violations {
            println!("  {v}");
        }
    }
    Ok(())
}

struct Evaluator {
    scn: Scenario,
    pen: PenaltyTable,
    cov: lom::geometry::CoverageSets,
}

fn load_report(path: &Path, ev: Option<&Evaluator>) -> Result<EvalReport, Exit> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    if value.is_array() {
        let ev = ev.ok_or_else(|| {
            Exit::invalid(anyhow!("{} is a plan; pass --scenario", path.display()))
        })?;
        let plan = LookPlan::from_json(&text)?;
        Ok(coverage_report(&ev.scn, &ev.pen, &ev.cov, &plan))
    } else {
        Ok(serde_json::from_value(value).with_context(|| format!("{}", path.display()))?)
    }
}

fn cmd_compare(a: &CompareArgs) -> Result<(), Exit> {
    if a.a.len() != a.b.len() {
        return Err(Exit::invalid(anyhow!(
            "{} --a inputs but {} --b inputs",
            a.a.len(),
            a.b.len()
        )));
    }
    let ev = match &a.scenario {
        Some(p) => {
            let scn = Scenario::load_valid(p)?;
            let pen = precompute_pen(&scn)?;
            let cov = coverage_sets(&scn)?;
            Some(Evaluator { scn, pen, cov })
        }
        None => None,
    };
    let mut rows: Vec<Comparison> = Vec::new();
    for (pa, pb) in a.a.iter().zip(&a.b) {
        let (ra, rb) = std::thread::scope(|s| {
            let ha = s.spawn(|| load_report(pa, ev.as_ref()));
            let rb = load_report(pb, ev.as_ref());
            (ha.join().expect("evaluation thread panicked"), rb)
        });
        let cmp = compare(&ra?, &rb?)?;
        println!("{} vs {}", pa.display(), pb.display());
        print!("{}", cmp.to_table());
        println!();
        rows.push(cmp);
    }
    if rows.len() > 1 {
        let s = summarize_improvements(
            &rows
                .iter()
                .map(|c| c.relative_improvement)
                .collect::<Vec<_>>(),
        );
        let pct = |x: Option<f64>| x.map_or("n/a".into(), |v| format!("{:.2}%", 100.0 * v));
        println!(
            "pairs {}  undefined {}  mean improvement {}  median improvement {}",
            rows.len(),
            s.undefined,
            pct(s.mean),
            pct(s.median)
        );
    }
    if let Some(p) = &a.csv {
        let mut w =
            csv::Writer::from_path(p).with_context(|| format!("cannot write {}", p.display()))?;
        w.write_record(Comparison::csv_header()).context("csv")?;
        for c in &rows {
            w.write_record(c.csv_record()).context("csv")?;
        }
        w.flush().context("csv")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Build(a) => cmd_build(a),
        Cmd::Heuristic(a) => cmd_heuristic(a),
        Cmd::Exact(a) => cmd_exact(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.err);
            ExitCode::from(e.code)
        }
    }
}
