use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gas_core::engine::{Game, GameInstance, Viewport};
use gas_core::format::{instance_to_string, parse_instance, parse_trace, trace_to_string};
use gas_core::reduction::{reduce_with_layout, InstanceStats, ReductionStats};
use gas_core::solver::{Frontier, SearchBudget, SolveOptions, DEFAULT_SAT_GUARD};
use gas_core::{brute_force_sat, model, parse_dimacs, preprocess, solve, synthesize_witness, verify_trace};
use gas_core::{CnfFormula, PushTrace, Verdict};

use crate::service;

pub const EXIT_OK: u8 = 0;
/// Not winnable, not satisfiable, or a trace that does not win.
pub const EXIT_NO: u8 = 1;
pub const EXIT_ERROR: u8 = 2;
pub const EXIT_UNKNOWN: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "gas", version, about = "Game about Squares: reduce, solve, verify and play")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a DIMACS CNF file into an instance file and a layout report.
    Reduce {
        dimacs: PathBuf,
        /// Instance file to write.
        #[arg(short, long)]
        out: PathBuf,
        /// Layout report path; defaults to the instance path with `.layout.txt`.
        #[arg(long)]
        layout: Option<PathBuf>,
    },
    /// Decide an instance by exhaustive search.
    Solve {
        instance: PathBuf,
        /// Where to write the winning trace; defaults to `<instance>.trace.json`.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Build a winning trace for the reduced instance from a brute-forced model.
    Witness {
        dimacs: PathBuf,
        /// Trace file to write; printed to stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SAT_GUARD)]
        sat_guard: usize,
    },
    /// Replay a trace and report whether it wins.
    Verify { instance: PathBuf, trace: PathBuf },
    /// Brute-force satisfiability of a DIMACS file.
    Sat {
        dimacs: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAT_GUARD)]
        sat_guard: usize,
    },
    /// Draw the board, and with a trace the board after every round.
    Render {
        instance: PathBuf,
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        margin: i32,
    },
    /// Compress empty bands of an instance.
    Normalize {
        instance: PathBuf,
        /// Output file; printed to stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the local session service for the browser UI.
    Serve {
        #[arg(long, default_value_t = 8750)]
        port: u16,
        /// Seconds a session may sit unused before it is dropped.
        #[arg(long, default_value_t = 1800)]
        idle_seconds: u64,
    },
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 20_000_000)]
    pub budget_states: usize,
    #[arg(long, default_value_t = 100_000)]
    pub budget_depth: usize,
    #[arg(long, default_value_t = 600)]
    pub budget_seconds: u64,
    /// Keep states with ruined squares.
    #[arg(long)]
    pub no_prune: bool,
    /// Depth-first instead of breadth-first.
    #[arg(long)]
    pub dfs: bool,
}

impl SearchArgs {
    fn options(&self) -> Result<SolveOptions> {
        let budget = SearchBudget::new(self.budget_states, self.budget_depth, Duration::from_secs(self.budget_seconds))?;
        let frontier = if self.dfs { Frontier::DepthFirst } else { Frontier::BreadthFirst };
        Ok(SolveOptions { budget, prune: !self.no_prune, frontier })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn load_instance(path: &Path) -> Result<GameInstance> {
    let instance = parse_instance(&read(path)?).with_context(|| path.display().to_string())?;
    let problems = model::validate(&instance);
    if !problems.is_empty() {
        let list: Vec<String> = problems.iter().map(|v| v.to_string()).collect();
        bail!("{}: invalid instance:\n  {}", path.display(), list.join("\n  "));
    }
    Ok(instance)
}

fn load_trace(path: &Path) -> Result<PushTrace> {
    parse_trace(&read(path)?).with_context(|| path.display().to_string())
}

/// Parses DIMACS and drops tautologies and repeated literals.
pub fn load_formula(path: &Path) -> Result<CnfFormula> {
    let raw = parse_dimacs(&read(path)?).with_context(|| path.display().to_string())?;
    let (formula, report) = preprocess(&raw);
    if !report.tautologies.is_empty() || !report.duplicate_literals.is_empty() {
        eprintln!("preprocessing: {report}");
    }
    Ok(formula)
}

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Reduce { dimacs, out, layout } => {
            let formula = load_formula(&dimacs)?;
            let r = reduce_with_layout(&formula)?;
            write(&out, &instance_to_string(&r.instance))?;
            write(&layout.unwrap_or_else(|| with_suffix(&out, ".layout.txt")), &r.layout_report())?;
            let stats = ReductionStats {
                num_vars: formula.num_vars,
                num_clauses: formula.num_clauses(),
                literal_occurrences: formula.literal_occurrences(),
                instance: InstanceStats::of(&r.instance),
            };
            println!("{}", serde_json::to_string(&stats)?);
            Ok(EXIT_OK)
        }
        Command::Solve { instance, trace, search } => {
            let inst = load_instance(&instance)?;
            let report = solve(&inst, &search.options()?)?;
            let code = match &report.verdict {
                Verdict::Winnable(t) => {
                    let path = trace.unwrap_or_else(|| with_suffix(&instance, ".trace.json"));
                    write(&path, &trace_to_string(t))?;
                    println!("winnable in {} pushes, trace written to {}", t.len(), path.display());
                    EXIT_OK
                }
                Verdict::NotWinnable => {
                    println!("not winnable");
                    EXIT_NO
                }
                Verdict::Unknown(why) => {
                    println!("unknown: {why}");
                    EXIT_UNKNOWN
                }
            };
            println!("{}", serde_json::to_string(&report.stats)?);
            Ok(code)
        }
        Command::Witness { dimacs, out, sat_guard } => {
            let formula = load_formula(&dimacs)?;
            let Some(model) = brute_force_sat(&formula, sat_guard)? else {
                eprintln!("unsatisfiable: no witness exists");
                return Ok(EXIT_NO);
            };
            let text = trace_to_string(&synthesize_witness(&formula, &model)?);
            match out {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(EXIT_OK)
        }
        Command::Verify { instance, trace } => {
            let inst = load_instance(&instance)?;
            let t = load_trace(&trace)?;
            if verify_trace(&inst, &t)? {
                println!("wins after {} pushes", t.len());
                Ok(EXIT_OK)
            } else {
                println!("does not win");
                Ok(EXIT_NO)
            }
        }
        Command::Sat { dimacs, sat_guard } => {
            let formula = load_formula(&dimacs)?;
            match brute_force_sat(&formula, sat_guard)? {
                Some(model) => {
                    println!("s SATISFIABLE");
                    let lits: Vec<String> = service::signed_literals(&model).iter().map(i64::to_string).collect();
                    println!("v {} 0", lits.join(" "));
                    Ok(EXIT_OK)
                }
                None => {
                    println!("s UNSATISFIABLE");
                    Ok(EXIT_NO)
                }
            }
        }
        Command::Render { instance, trace, margin } => {
            let game = Game::new(load_instance(&instance)?)?;
            let vp = Viewport::fit(game.instance(), margin);
            let mut state = game.initial_state();
            println!("{}", game.render(&state, vp)?);
            if let Some(path) = trace {
                for (round, id) in load_trace(&path)?.moves.iter().enumerate() {
                    state = game.push(&state, id).with_context(|| format!("round {}", round + 1))?;
                    println!("\nround {}: push {}{}", round + 1, id, if game.is_won(&state) { " (won)" } else { "" });
                    println!("{}", game.render(&state, vp)?);
                }
            }
            Ok(EXIT_OK)
        }
        Command::Normalize { instance, out } => {
            let text = instance_to_string(&model::normalize(&load_instance(&instance)?));
            match out {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(EXIT_OK)
        }
        Command::Serve { port, idle_seconds } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(service::serve(port, Duration::from_secs(idle_seconds)))?;
            Ok(EXIT_OK)
        }
    }
}
