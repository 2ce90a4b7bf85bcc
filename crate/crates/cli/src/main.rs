//! `tron`: solve, analyze and certify weighted Tron instances, run the
//! fuzzing and search lab, replay transcripts and serve the game API.
//!
//! Exit codes: 0 success, 1 a property violation or conjecture exceedance
//! was found, 2 usage or input error.

use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use tron_core::engine::{parse_transcript, replay};
use tron_core::format::{instance_digest, parse_instance};
use tron_core::lab::{
    conjecture_scan, extremal_search, fuzz_corpus, fuzz_theorem, heuristic_scan, Family, ScanTarget, SearchConfig,
    WeightSpace,
};
use tron_core::{certify, decompose, simulate, Backend, Instance, LabError, PolicySpec, Solver, SolverConfig};

#[derive(Parser)]
#[command(name = "tron", version, about = "Exact analysis of the weighted Tron game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    General,
    Treepath,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::General => Backend::General,
            BackendArg::Treepath => Backend::TreePath,
        }
    }
}

#[derive(clap::Args)]
struct InstanceArgs {
    /// Instance file in the `tron v1` format.
    file: PathBuf,
    /// Scale weights to sum to 1 instead of rejecting them.
    #[arg(long)]
    normalize: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Game value, optimal starts, per-start table and principal variation.
    Solve {
        #[command(flatten)]
        input: InstanceArgs,
        /// Defaults to treepath for trees and general otherwise.
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
    },
    /// The crossing-edge decomposition table of a tree.
    Analyze {
        #[command(flatten)]
        input: InstanceArgs,
    },
    /// Evaluates every bound and combination check; exit 1 on a violation.
    Certify {
        #[command(flatten)]
        input: InstanceArgs,
    },
    /// Plays two policies against each other and prints the transcript.
    Simulate {
        #[command(flatten)]
        input: InstanceArgs,
        /// `optimal`, `avoidbob:auto` or `avoidbob:u=U[,v=V][,literal]`.
        #[arg(long, default_value = "optimal")]
        alice: String,
        /// `optimal` or `longestpath`.
        #[arg(long, default_value = "optimal")]
        bob: String,
    },
    /// Certifies a seeded random tree corpus; exit 1 on a violation.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
    /// Searches small trees for large game values.
    Search {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Maximum number of evaluated instances.
        #[arg(long, default_value_t = 5000)]
        budget: usize,
        /// `tree`, `path`, `star`, `spider` or `caterpillar`.
        #[arg(long, default_value = "tree")]
        family: String,
        /// Largest size enumerated exhaustively.
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        /// Size of the hill-climbing phase; 0 skips it.
        #[arg(long, default_value_t = 8)]
        climb_n: usize,
        /// `uniform` or `grid:DENOMINATOR:MAX_SUPPORT`.
        #[arg(long, default_value = "grid:10:5")]
        weights: String,
    },
    /// Conjecture and heuristic scans; exit 1 on an exceedance.
    Scan {
        #[arg(value_enum)]
        target: ScanArg,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        /// Number of cycles (cycles target only).
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Runs the game server on localhost.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Re-runs a transcript and prints the resulting position.
    Replay {
        #[command(flatten)]
        input: InstanceArgs,
        transcript: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanArg {
    /// Every uniform tree shape up to `--n-max`.
    Trees,
    /// Random weighted cycles.
    Cycles,
    /// Longest-path Bob and the `-1/n` lower bound on uniform trees.
    Heuristic,
}

/// A failed run: the message and its exit code.
struct Failure(u8, String);

fn input_error(e: impl ToString) -> Failure {
    Failure(2, e.to_string())
}

fn lab_error(e: LabError) -> Failure {
    match e {
        LabError::Violation { .. } | LabError::BackendMismatch(_) => Failure(1, e.to_string()),
        LabError::Config(_) => Failure(2, e.to_string()),
        other => Failure(2, other.to_string()),
    }
}

fn load(path: &Path, normalize: bool) -> Result<Arc<Instance>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let inst = parse_instance(&text, normalize).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(Arc::new(inst))
}

fn set(items: impl IntoIterator<Item = usize>) -> String {
    let parts: Vec<String> = items.into_iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

fn solve(inst: &Arc<Instance>, backend: Option<BackendArg>) -> Result<String, Failure> {
    let backend = backend.map_or_else(|| Backend::preferred(inst), Backend::from);
    let mut solver = Solver::new(inst.clone(), SolverConfig::new(backend)).map_err(input_error)?;
    let report = solver.game_value().map_err(input_error)?;
    let mut out = String::new();
    writeln!(out, "delta = {}; optimal starts: {}", report.delta, set(report.optimal_starts.iter().copied())).unwrap();
    writeln!(out, "digest {}", instance_digest(inst)).unwrap();
    writeln!(out, "start value reply").unwrap();
    for r in &report.per_start {
        let reply = r.bob_reply.map_or("-".to_string(), |b| b.to_string());
        writeln!(out, "{} {} {}", r.start, r.value, reply).unwrap();
    }
    let first = *report.optimal_starts.iter().next().expect("some start is optimal");
    let pv: Vec<String> = report.record(first).principal_variation.iter().map(|m| m.to_string()).collect();
    writeln!(out, "pv {}", pv.join(" ")).unwrap();
    Ok(out)
}

fn search_config(
    seed: u64,
    budget: usize,
    family: &str,
    n_max: usize,
    climb_n: usize,
    weights: &str,
) -> Result<SearchConfig, Failure> {
    let family: Family = family.parse().map_err(input_error)?;
    let weights = match weights.split(':').collect::<Vec<_>>().as_slice() {
        ["uniform"] => WeightSpace::Uniform,
        ["grid", d, k] => WeightSpace::Grid {
            denominator: d.parse().map_err(input_error)?,
            max_support: k.parse().map_err(input_error)?,
        },
        _ => return Err(input_error(format!("bad weight space `{weights}`"))),
    };
    Ok(SearchConfig { seed, budget, family, exhaustive_n_max: n_max, climb_n, weights })
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Solve { input, backend } => solve(&load(&input.file, input.normalize)?, backend),
        Command::Analyze { input } => {
            let inst = load(&input.file, input.normalize)?;
            Ok(decompose(&inst).map_err(input_error)?.table())
        }
        Command::Certify { input } => {
            let inst = load(&input.file, input.normalize)?;
            let report = certify(&inst).map_err(input_error)?;
            if report.holds() {
                Ok(report.to_text())
            } else {
                Err(Failure(1, format!("{}violations:\n{}", report.to_text(), report.violations().join("\n"))))
            }
        }
        Command::Simulate { input, alice, bob } => {
            let inst = load(&input.file, input.normalize)?;
            let alice: PolicySpec = alice.parse().map_err(input_error)?;
            let bob: PolicySpec = bob.parse().map_err(input_error)?;
            let mut a = alice.build(&inst).map_err(input_error)?;
            let mut b = bob.build(&inst).map_err(input_error)?;
            Ok(simulate(&inst, a.as_mut(), b.as_mut()).map_err(input_error)?.to_text())
        }
        Command::Fuzz { seed, count, n_max } => {
            let corpus = fuzz_corpus(seed, count, 1, n_max).map_err(lab_error)?;
            Ok(fuzz_theorem(&corpus).map_err(lab_error)?.to_text())
        }
        Command::Search { seed, budget, family, n_max, climb_n, weights } => {
            let config = search_config(seed, budget, &family, n_max, climb_n, &weights)?;
            Ok(extremal_search(&config).map_err(lab_error)?.to_text())
        }
        Command::Scan { target, n_max, count, seed } => match target {
            ScanArg::Heuristic => {
                let h = heuristic_scan(n_max).map_err(lab_error)?;
                let text = format!(
                    "trees {}\nworst_gap {}\nmin_scaled_delta {}\ngap_failures {}\nlower_bound_failures {}\n{}{}",
                    h.trees,
                    h.worst_gap,
                    h.min_scaled_delta,
                    h.gap_failures.len(),
                    h.lower_bound_failures.len(),
                    h.gap_failures.concat(),
                    h.lower_bound_failures.concat()
                );
                if h.gap_failures.is_empty() && h.lower_bound_failures.is_empty() {
                    Ok(text)
                } else {
                    Err(Failure(1, text))
                }
            }
            ScanArg::Trees | ScanArg::Cycles => {
                let t = match target {
                    ScanArg::Trees => ScanTarget::UnweightedTrees { n_max },
                    _ => ScanTarget::Cycles { count, n_max, seed },
                };
                let s = conjecture_scan(t).map_err(lab_error)?;
                if s.exceedances.is_empty() {
                    Ok(s.to_text())
                } else {
                    Err(Failure(1, s.to_text()))
                }
            }
        },
        Command::Serve { port } => {
            let addr = SocketAddr::from(([127, 0, 0, 1], port));
            let rt = tokio::runtime::Runtime::new().map_err(input_error)?;
            eprintln!("listening on http://{addr}");
            rt.block_on(tron_service::serve(addr)).map_err(input_error)?;
            Ok(String::new())
        }
        Command::Replay { input, transcript } => {
            let inst = load(&input.file, input.normalize)?;
            let text = std::fs::read_to_string(&transcript)
                .map_err(|e| input_error(format!("{}: {e}", transcript.display())))?;
            let moves = parse_transcript(&text).map_err(input_error)?;
            let state = replay(inst, &moves).map_err(input_error)?;
            let score = state.score();
            let mut out = String::new();
            writeln!(out, "moves {}", moves.len()).unwrap();
            writeln!(out, "phase {:?}", state.phase()).unwrap();
            writeln!(out, "alice {}", set(state.alice_path().vertices().iter().copied())).unwrap();
            writeln!(out, "bob {}", set(state.bob_path().vertices().iter().copied())).unwrap();
            let label = if state.is_finished() { "value" } else { "score" };
            writeln!(out, "{label} {} alice {} bob {}", score.value, score.alice_weight, score.bob_weight).unwrap();
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure(code, msg)) => {
            if code == 1 {
                print!("{msg}");
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}
