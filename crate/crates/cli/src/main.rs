//! Command-line front end: solve a program file, or run the randomized
//! differential suites.
//!
//! Exit codes: 0 when at least one answer set was found (or all differential
//! trials agreed), 1 when the program has no answer set, 2 on parse, safety
//! or evaluation errors (and on differential disagreements), 3 when a search
//! or grounding cap was exceeded.

use clap::{Args, Parser, Subcommand, ValueEnum};
use fasolve_core::classical::{embed, extract, parse_classical_program, render_atom_set};
use fasolve_core::ground::{GroundConfig, GroundError};
use fasolve_core::harness::{
    check_invariants, classical_differential, differential_answer_sets, generate_classical,
    generate_program, DiffOutcome, GenConfig,
};
use fasolve_core::model::Program;
use fasolve_core::parse::{parse_program, print_program};
use fasolve_core::solver::{enumerate_answer_sets, SolveConfig, SolveError, SolveResult};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fasolve",
    version,
    about = "Answer set solver for disjunctive fuzzy logic programs with fuzzy aggregates",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random programs and cross-check the solver against the
    /// independent reference routes
    Test(TestArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Program file to solve
    file: Option<PathBuf>,

    /// Input language
    #[arg(long, value_enum, default_value_t = Mode::Fuzzy)]
    mode: Mode,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Report at most this many answer sets
    #[arg(long)]
    max_answer_sets: Option<usize>,

    /// Cap on the number of distinct grades tracked while grounding
    #[arg(long, default_value_t = 10_000)]
    lattice_cap: usize,

    /// Cap on grade-propagation passes
    #[arg(long, default_value_t = 16)]
    iter_cap: usize,

    /// Cap on the candidate grid size
    #[arg(long, default_value_t = 10_000_000)]
    candidate_cap: usize,

    /// Maximum nesting depth of function terms in the universe
    #[arg(long, default_value_t = 0)]
    func_depth: usize,

    /// Print the ground program before the answer sets
    #[arg(long)]
    dump_ground: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Fuzzy,
    Classical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct TestArgs {
    /// Trials per suite
    #[arg(long, default_value_t = 100)]
    trials: usize,

    /// First seed; trial k uses seed + k
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Which differential suite to run
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,

    /// Write a repro file for every disagreement into this directory
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// Full-featured programs; answer sets are re-verified independently
    Invariants,
    /// Aggregate-free constant-annotation programs against brute force
    Plain,
    /// Classical programs: graded embedding against the reference solver
    Classical,
    All,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Some(Command::Test(args)) => run_test(&args),
        None => match &cli.solve.file {
            Some(_) => run_solve(&cli.solve),
            None => {
                eprintln!("error: expected a program file or a subcommand; try --help");
                2
            }
        },
    };
    std::process::exit(code);
}

fn solve_config(args: &SolveArgs) -> SolveConfig {
    SolveConfig {
        ground: GroundConfig {
            func_depth: args.func_depth,
            lattice_cap: args.lattice_cap,
            iter_cap: args.iter_cap,
            ..GroundConfig::default()
        },
        candidate_cap: Some(args.candidate_cap),
        max_answer_sets: args.max_answer_sets,
    }
}

fn solve_error_code(e: &SolveError) -> i32 {
    match e {
        SolveError::CandidateSpaceOverflow { .. } => 3,
        SolveError::Ground(
            GroundError::UniverseTooLarge { .. }
            | GroundError::GroundingTooLarge { .. }
            | GroundError::LatticeOverflow { .. },
        ) => 3,
        _ => 2,
    }
}

fn run_solve(args: &SolveArgs) -> i32 {
    let path = args.file.as_ref().expect("checked by caller");
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {}", path.display(), e);
            return 2;
        }
    };
    let program = match args.mode {
        Mode::Fuzzy => match parse_program(&src) {
            Ok(p) => p,
            Err(errors) => {
                for e in &errors {
                    eprintln!("{}:{}", path.display(), e);
                }
                return 2;
            }
        },
        Mode::Classical => match parse_classical_program(&src) {
            Ok(cp) => embed(&cp),
            Err(errors) => {
                for e in &errors {
                    eprintln!("{}:{}", path.display(), e);
                }
                return 2;
            }
        },
    };
    let result = match enumerate_answer_sets(&program, &solve_config(args)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e);
            return solve_error_code(&e);
        }
    };
    for w in &result.stats.warnings {
        eprintln!("warning: {}", w);
    }
    let lines = match args.mode {
        Mode::Fuzzy => result.answer_sets.iter().map(|i| i.to_string()).collect(),
        Mode::Classical => {
            let mut rendered = Vec::with_capacity(result.answer_sets.len());
            for interp in &result.answer_sets {
                match extract(interp) {
                    Ok(set) => rendered.push(render_atom_set(&set)),
                    Err(e) => {
                        eprintln!("error: {}", e);
                        return 2;
                    }
                }
            }
            rendered.sort();
            rendered
        }
    };
    match args.format {
        Format::Text => {
            if args.dump_ground {
                print!("{}", print_program(&result.grounding.program));
            }
            for line in &lines {
                println!("{}", line);
            }
        }
        Format::Json => {
            println!("{}", render_json(args, &result, &lines));
        }
    }
    if lines.is_empty() {
        eprintln!("no answer sets");
        1
    } else {
        0
    }
}

fn render_json(args: &SolveArgs, result: &SolveResult, lines: &[String]) -> String {
    let answer_sets: Vec<serde_json::Value> = match args.mode {
        Mode::Fuzzy => result
            .answer_sets
            .iter()
            .map(|interp| {
                let mut map = serde_json::Map::new();
                for (atom, grade) in interp.iter() {
                    map.insert(
                        atom.to_string(),
                        serde_json::Value::String(grade.to_string()),
                    );
                }
                serde_json::Value::Object(map)
            })
            .collect(),
        Mode::Classical => lines
            .iter()
            .map(|s| serde_json::Value::String(s.clone()))
            .collect(),
    };
    let stats = &result.stats;
    let mut top = serde_json::json!({
        "answer_sets": answer_sets,
        "count": answer_sets.len(),
        "ground_stats": {
            "universe": stats.universe_size,
            "ground_rules": stats.ground_rules,
            "fired_rules": stats.fired_rules,
            "alive_atoms": stats.alive_atoms,
            "candidate_space": stats.candidate_space.to_string(),
            "candidates_checked": stats.candidates_checked,
            "lattice_converged": stats.lattice_converged,
            "warnings": stats.warnings,
        },
    });
    if args.dump_ground {
        top["ground_program"] =
            serde_json::Value::String(print_program(&result.grounding.program));
    }
    top.to_string()
}

fn trial_invariants(seed: u64) -> DiffOutcome {
    let p: Program = generate_program(&GenConfig::invariants(seed));
    check_invariants(&p, seed, &SolveConfig::default(), 1 << 23)
}

fn trial_plain(seed: u64) -> DiffOutcome {
    let p: Program = generate_program(&GenConfig::plain(seed));
    differential_answer_sets(&p, seed, &SolveConfig::default(), 1 << 22)
}

fn trial_classical(seed: u64) -> DiffOutcome {
    classical_differential(&generate_classical(seed), seed, 20)
}

fn run_trials(f: fn(u64) -> DiffOutcome, seeds: &[u64], threads: usize) -> Vec<(u64, DiffOutcome)> {
    if threads <= 1 || seeds.len() <= 1 {
        return seeds.iter().map(|&s| (s, f(s))).collect();
    }
    let chunk = seeds.len().div_ceil(threads);
    let mut out = Vec::with_capacity(seeds.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for part in seeds.chunks(chunk) {
            handles.push(scope.spawn(move || {
                part.iter().map(|&s| (s, f(s))).collect::<Vec<_>>()
            }));
        }
        for h in handles {
            out.extend(h.join().expect("trial thread panicked"));
        }
    });
    out.sort_by_key(|(s, _)| *s);
    out
}

fn run_test(args: &TestArgs) -> i32 {
    let threads = std::env::var("FASOLVE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1);
    let seeds: Vec<u64> = (0..args.trials).map(|k| args.seed + k as u64).collect();
    let suites: Vec<(&str, fn(u64) -> DiffOutcome)> = match args.suite {
        Suite::Invariants => vec![("invariants", trial_invariants)],
        Suite::Plain => vec![("plain", trial_plain)],
        Suite::Classical => vec![("classical", trial_classical)],
        Suite::All => vec![
            ("invariants", trial_invariants),
            ("plain", trial_plain),
            ("classical", trial_classical),
        ],
    };
    let mut failures = 0usize;
    for (name, trial) in suites {
        let mut agreed = 0usize;
        let mut skipped = 0usize;
        let mut disagreed = 0usize;
        for (_, outcome) in run_trials(trial, &seeds, threads) {
            match outcome {
                DiffOutcome::Agree { .. } => agreed += 1,
                DiffOutcome::Skipped { .. } => skipped += 1,
                DiffOutcome::Disagree(d) => {
                    disagreed += 1;
                    eprintln!("{}", d);
                    if let Some(dir) = &args.save {
                        match d.save(dir) {
                            Ok(path) => eprintln!("repro written to {}", path.display()),
                            Err(e) => eprintln!("error: cannot write repro: {}", e),
                        }
                    }
                }
            }
        }
        println!(
            "{}: {} agreed, {} skipped, {} disagreed ({} trials)",
            name, agreed, skipped, disagreed, args.trials
        );
        failures += disagreed;
    }
    if failures == 0 {
        println!("all routes agree");
        0
    } else {
        2
    }
}
