//! Command-line front end: dataset generation, the mislabeling-risk bound,
//! solving, featurization, tree training/evaluation, both experiments, and
//! plotting. Exit codes: 0 on success, 1 on usage errors (with a synopsis),
//! 2 on runtime errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use satlab::features::{feature_names, formula_features, LabeledMatrix, N_FORMULA_FEATURES};
use satlab::genlab::{
    bound_f, gen_deceptive, gen_uniform, make_pair_family, read_formula_with_sidecar, unsat_risk,
    Label,
};
use satlab::harness::{load_config, plot, run_exp1, run_exp2, Exp1Config, Exp2Config, PlotKind};
use satlab::learn::{evaluate, repeated_holdout, train_tree, DecisionTree, TreeParams};
use satlab::walksat::{run_many, trace_to_csv, SolverParams, DEFAULT_STEPS_PER_VAR, DEFAULT_WP};
use satlab::{seeding, Error, Result};

#[derive(Parser)]
#[command(
    name = "satlab",
    version,
    about = "Random 3-CNF dataset generation and trace-based satisfiability classification"
)]
struct Cli {
    /// Master seed; every random stream derives from it by name.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (overrides the SATLAB_JOBS environment variable;
    /// default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config file for exp1/exp2 (CLI --seed/--out take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

const DEFAULT_SEED: u64 = 42;

#[derive(Subcommand)]
enum Command {
    /// Generate uniform random formulas, labeled unsatisfiable.
    GenUnsat(GenUnsatArgs),
    /// Generate deceptive planted formulas, labeled satisfiable.
    GenSat(GenSatArgs),
    /// Generate satisfiable/broken formula pairs at chosen break counts.
    GenPairs(GenPairsArgs),
    /// Evaluate the mislabeling-risk bound for uniform formulas.
    Bound(BoundArgs),
    /// Run the solver on a DIMACS formula and report trial outcomes.
    Solve(SolveArgs),
    /// Compute trace features for DIMACS formulas.
    Featurize(FeaturizeArgs),
    /// Train a decision tree on a feature CSV and report holdout accuracy.
    Train(TrainArgs),
    /// Evaluate a saved tree on a feature CSV.
    Eval(EvalArgs),
    /// Run the classification experiment over an (r, q) grid.
    Exp1,
    /// Run the distinguishability experiment over an (r, q) grid.
    Exp2,
    /// Render SVG plots from an experiment's results.csv.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenUnsatArgs {
    /// Variable count.
    #[arg(long)]
    n: u32,
    /// Clause density; the formula gets round(r·n) clauses.
    #[arg(long)]
    r: f64,
    /// How many formulas to generate.
    #[arg(long, default_value_t = 1)]
    count: u64,
}

#[derive(Args)]
struct GenSatArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    r: f64,
    /// Hardness in [0.01, 1]: clauses satisfying the planted assignment t
    /// times are kept with probability q^t.
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 1)]
    count: u64,
}

#[derive(Args)]
struct GenPairsArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    r: f64,
    #[arg(long)]
    q: f64,
    /// Break counts, ascending (comma separated or repeated).
    #[arg(long, value_delimiter = ',', required = true)]
    u: Vec<usize>,
    /// How many pairs (each with a fresh base formula).
    #[arg(long, default_value_t = 1)]
    count: u64,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    r: f64,
    #[arg(long)]
    n: u64,
    /// Formulas in the dataset the union bound covers.
    #[arg(long, default_value_t = 1)]
    dataset_size: u64,
}

#[derive(Args)]
struct SolveArgs {
    /// DIMACS CNF file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_WP)]
    wp: f64,
    /// Flip budget per trial (default 2n).
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Write the first trial's per-step trace as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturizeArgs {
    /// DIMACS CNF files; each becomes one feature row. Labels come from
    /// sidecar JSON files when present.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    input: Vec<PathBuf>,
    #[arg(long, default_value_t = satlab::walksat::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_WP)]
    wp: f64,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Where to write the feature matrix CSV.
    #[arg(long)]
    features_out: Option<PathBuf>,
    /// Write the feature schema (all column names) as JSON and exit if no
    /// inputs are given.
    #[arg(long)]
    schema_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Feature matrix CSV (label column first).
    #[arg(long)]
    features: PathBuf,
    /// Tree depth cap.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Holdout seeds averaged in the report.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Saved model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Feature matrix CSV to score.
    #[arg(long)]
    features: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Debug, ValueEnum)]
enum PlotKindArg {
    Exp1,
    Exp2,
}

#[derive(Args)]
struct PlotArgs {
    /// Which experiment produced the input.
    #[arg(long, value_enum)]
    kind: PlotKindArg,
    /// The experiment's results.csv.
    #[arg(long)]
    input: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();

    if let Err(e) = configure_workers(cli.jobs) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Resolves the worker count: --jobs flag, then SATLAB_JOBS, then all cores.
fn configure_workers(jobs: Option<usize>) -> Result<()> {
    let jobs =
        match jobs {
            Some(j) => Some(j),
            None => match std::env::var("SATLAB_JOBS") {
                Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                    Error::invalid(format!("SATLAB_JOBS must be a number, got {v:?}"))
                })?),
                Err(_) => None,
            },
        };
    if let Some(jobs) = jobs {
        if jobs == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::invalid(format!("cannot size the worker pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let out = cli.out.clone();
    match cli.command {
        Command::GenUnsat(args) => gen_unsat_cmd(&args, seed, out),
        Command::GenSat(args) => gen_sat_cmd(&args, seed, out),
        Command::GenPairs(args) => gen_pairs_cmd(&args, seed, out),
        Command::Bound(args) => bound_cmd(&args),
        Command::Solve(args) => solve_cmd(&args, seed),
        Command::Featurize(args) => featurize_cmd(&args, seed, out),
        Command::Train(args) => train_cmd(&args, seed, out),
        Command::Eval(args) => eval_cmd(&args),
        Command::Exp1 => {
            let cfg = exp1_config(&cli)?;
            run_exp1(&cfg)?;
            println!("experiment results written to {}", cfg.out.display());
            Ok(())
        }
        Command::Exp2 => {
            let cfg = exp2_config(&cli)?;
            run_exp2(&cfg)?;
            println!("experiment results written to {}", cfg.out.display());
            Ok(())
        }
        Command::Plot(args) => plot_cmd(&args, out),
    }
}

fn out_dir(out: Option<PathBuf>, fallback: &str) -> Result<PathBuf> {
    let dir = out.unwrap_or_else(|| PathBuf::from(fallback));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn gen_unsat_cmd(args: &GenUnsatArgs, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let dir = out_dir(out, "out")?;
    for i in 0..args.count {
        let f = gen_uniform(args.n, args.r, seeding::derive_seed(seed, "cli/gen-unsat", i))?;
        let (cnf, _) = f.write_files(&dir.join(format!("unsat_{i}")))?;
        println!("{}", cnf.display());
    }
    Ok(())
}

fn gen_sat_cmd(args: &GenSatArgs, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let dir = out_dir(out, "out")?;
    for i in 0..args.count {
        let f =
            gen_deceptive(args.n, args.r, args.q, seeding::derive_seed(seed, "cli/gen-sat", i))?;
        let (cnf, _) = f.write_files(&dir.join(format!("sat_{i}")))?;
        println!("{}", cnf.display());
    }
    Ok(())
}

/// Sidecar for one emitted pair instance.
#[derive(Serialize)]
struct PairSidecar {
    format_version: u32,
    n: u32,
    m: usize,
    r: f64,
    q: f64,
    u: usize,
    /// Which slot (0 or 1) holds the satisfiable formula.
    sat_slot: u8,
    seed: u64,
    planted_assignment: String,
}

fn gen_pairs_cmd(args: &GenPairsArgs, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let dir = out_dir(out, "out")?;
    let mut us = args.u.clone();
    us.sort_unstable();
    us.dedup();
    for i in 0..args.count {
        let base =
            gen_deceptive(args.n, args.r, args.q, seeding::derive_seed(seed, "cli/pairs-base", i))?;
        let family_seed = seeding::derive_seed(seed, "cli/pairs-family", i);
        for instance in make_pair_family(&base, &us, family_seed)? {
            let stem = format!("pair{i}_u{}", instance.u);
            let (slot0, slot1) = match instance.slot_label {
                0 => (&instance.sat_formula, &instance.broken_formula),
                _ => (&instance.broken_formula, &instance.sat_formula),
            };
            let path0 = dir.join(format!("{stem}_slot0.cnf"));
            let path1 = dir.join(format!("{stem}_slot1.cnf"));
            fs::write(&path0, satlab::cnf::write_dimacs(slot0))?;
            fs::write(&path1, satlab::cnf::write_dimacs(slot1))?;
            let sidecar = PairSidecar {
                format_version: 1,
                n: args.n,
                m: instance.sat_formula.m(),
                r: args.r,
                q: args.q,
                u: instance.u,
                sat_slot: instance.slot_label,
                seed,
                planted_assignment: instance.planted.to_bit_string(),
            };
            let mut payload = serde_json::to_string_pretty(&sidecar)?;
            payload.push('\n');
            fs::write(dir.join(format!("{stem}.json")), payload)?;
            println!("{} {}", path0.display(), path1.display());
        }
    }
    Ok(())
}

fn bound_cmd(args: &BoundArgs) -> Result<()> {
    let f = bound_f(args.r, args.n);
    println!("f({}, {}) = {f:.6}", args.r, args.n);
    let per_formula = unsat_risk(args.r, args.n, 1)?;
    println!("log10 mislabeling risk per formula <= {per_formula:.2}");
    if args.dataset_size > 1 {
        let dataset = unsat_risk(args.r, args.n, args.dataset_size)?;
        println!("log10 mislabeling risk for a dataset of {} <= {dataset:.2}", args.dataset_size);
    }
    Ok(())
}

fn solve_cmd(args: &SolveArgs, seed: u64) -> Result<()> {
    let (formula, _) = read_formula_with_sidecar(&args.input)?;
    let params = SolverParams {
        wp: args.wp,
        max_steps: args.max_steps.unwrap_or(DEFAULT_STEPS_PER_VAR * formula.n() as usize),
    };
    let traces = run_many(&formula, &params, args.trials, seed)?;
    for (i, trace) in traces.iter().enumerate() {
        if trace.solved {
            println!("trial {i}: solved after {} flips", trace.steps_taken());
        } else {
            println!("trial {i}: not solved within {} flips", params.max_steps);
        }
    }
    let solved = traces.iter().filter(|t| t.solved).count();
    println!("solved {solved}/{} trials", traces.len());
    if let Some(path) = &args.trace_out {
        fs::write(path, trace_to_csv(&traces[0]))?;
        println!("trace written to {}", path.display());
    }
    Ok(())
}

/// On-disk feature schema document.
#[derive(Serialize)]
struct SchemaDoc {
    format_version: u32,
    count: usize,
    names: Vec<String>,
}

fn featurize_cmd(args: &FeaturizeArgs, seed: u64, out: Option<PathBuf>) -> Result<()> {
    if let Some(path) = &args.schema_out {
        let doc =
            SchemaDoc { format_version: 1, count: N_FORMULA_FEATURES, names: feature_names() };
        let mut payload = serde_json::to_string_pretty(&doc)?;
        payload.push('\n');
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, payload)?;
        println!("schema written to {}", path.display());
    }
    if args.input.is_empty() {
        if args.schema_out.is_none() {
            return Err(Error::invalid("nothing to do: no inputs and no --schema-out"));
        }
        return Ok(());
    }

    let mut matrix = LabeledMatrix::new("satisfiable", feature_names());
    for (i, input) in args.input.iter().enumerate() {
        let (formula, sidecar) = read_formula_with_sidecar(input)?;
        let params = SolverParams {
            wp: args.wp,
            max_steps: args.max_steps.unwrap_or(DEFAULT_STEPS_PER_VAR * formula.n() as usize),
        };
        let label = match &sidecar {
            Some(s) => u8::from(s.label == Label::Sat),
            None => {
                log::warn!("{}: no sidecar; labeling as 0", input.display());
                0
            }
        };
        let feats = formula_features(
            &formula,
            &params,
            args.trials,
            seeding::derive_seed(seed, "cli/featurize", i as u64),
        )?;
        matrix.push(label, feats);
    }
    let path = match &args.features_out {
        Some(p) => p.clone(),
        None => out_dir(out, "out")?.join("features.csv"),
    };
    matrix.write_csv(&path)?;
    println!("features for {} formulas written to {}", matrix.len(), path.display());
    Ok(())
}

fn train_cmd(args: &TrainArgs, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let matrix = LabeledMatrix::read_csv(&args.features)?;
    let report = repeated_holdout(&matrix, args.test_fraction, Some(args.depth), args.seeds)?;
    println!(
        "holdout accuracy over {} seeds: {:.2} ± {:.2}",
        report.seeds, report.mean, report.std
    );
    let tree = train_tree(&matrix, &TreeParams::depth(Some(args.depth), seed))?;
    let model_path = match &args.model_out {
        Some(p) => p.clone(),
        None => out_dir(out.clone(), "out")?.join("model.json"),
    };
    tree.save(&model_path)?;
    println!("model written to {}", model_path.display());
    if let Some(report_path) = &args.report_out {
        let mut payload = serde_json::to_string_pretty(&report)?;
        payload.push('\n');
        fs::write(report_path, payload)?;
        fs::write(report_path.with_extension("csv"), report.to_csv())?;
        println!("report written to {}", report_path.display());
    }
    Ok(())
}

fn eval_cmd(args: &EvalArgs) -> Result<()> {
    let tree = DecisionTree::load(&args.model)?;
    let matrix = LabeledMatrix::read_csv(&args.features)?;
    let accuracy = evaluate(&tree, &matrix)?;
    println!("accuracy: {accuracy:.2}% on {} rows", matrix.len());
    Ok(())
}

fn exp1_config(cli: &Cli) -> Result<Exp1Config> {
    let mut cfg: Exp1Config = match &cli.config {
        Some(path) => load_config(path)?,
        None => Exp1Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn exp2_config(cli: &Cli) -> Result<Exp2Config> {
    let mut cfg: Exp2Config = match &cli.config {
        Some(path) => load_config(path)?,
        None => Exp2Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn plot_cmd(args: &PlotArgs, out: Option<PathBuf>) -> Result<()> {
    let dir = out_dir(out, "plots")?;
    let kind = match args.kind {
        PlotKindArg::Exp1 => PlotKind::Exp1,
        PlotKindArg::Exp2 => PlotKind::Exp2,
    };
    for path in plot(kind, &args.input, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}
