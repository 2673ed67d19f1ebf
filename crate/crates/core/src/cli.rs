//! The `decpomdp` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::evaluation::{exact_value, simulate};
use crate::model::json::{model_to_json, parse_model};
use crate::model::{as_single_agent, validate_model, AgentId, DecPomdp, DecisionInstance};
use crate::policy::json::{parse_policy, policy_to_json};
use crate::policy::count_local_policies;
use crate::rational::Rational;
use crate::reduction::{compile_tiling_to_decpomdp, lift_pomdp_to_two_agent_decmdp, lift_to_three_agent_decmdp};
use crate::solver::{decide, solve_decpomdp_exact, DecideOptions, SolveOptions, DEFAULT_BUDGET};
use crate::tiling::{parse_tiling_instance, solve_tiling_bruteforce};

#[derive(Debug, Parser)]
#[command(name = "decpomdp", version, about = "Exact finite-horizon DEC-POMDP tools")]
pub struct Cli {
    /// Refuse searches larger than this many policies (or tiling steps).
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// `decide`: stop at the first policy reaching the threshold.
    #[arg(long, global = true)]
    pub early_exit: bool,
    /// `decide`: allow a horizon that is not below the state count.
    #[arg(long, global = true)]
    pub allow_long_horizon: bool,
    /// Enumerate on a single thread.
    #[arg(long, global = true)]
    pub serial: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file and print violations and advisories.
    Validate { model: PathBuf },
    /// Find the optimal joint policy.
    Solve {
        model: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
        /// Where to write the argmax policy.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Is there a joint policy worth at least the threshold?
    Decide {
        model: PathBuf,
        #[arg(long)]
        threshold: String,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Exact expected total reward of a policy.
    Evaluate {
        model: PathBuf,
        policy: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Monte Carlo estimate of a policy's value.
    Simulate {
        model: PathBuf,
        policy: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        episodes: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Search for a consistent tiling.
    TilingSolve { instance: PathBuf },
    /// Compile a tiling instance into a two-agent model.
    Reduce {
        #[arg(long)]
        tiling: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sidecar metadata; defaults to the output path with `.meta.json`.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Add an agent that observes the state.
    Lift {
        model: PathBuf,
        /// Agent count after lifting: 2 for a one-agent model, 3 for a two-agent one.
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count local and joint policies.
    CountPolicies {
        model: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Compare the tiling oracle with the optimum of the compiled model.
    #[command(name = "verify-theorem1")]
    VerifyReduction {
        #[arg(long)]
        tiling: PathBuf,
    },
}

/// Failure with the exit status it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } | Error::SearchBudgetExceeded { .. } => 3,
            Error::Internal(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn in_file(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) })
}

fn write(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) })
}

fn load_model(path: &Path) -> std::result::Result<DecPomdp, Failure> {
    parse_model(&read(path)?).map_err(in_file(path))
}

fn io(e: std::io::Error) -> Failure {
    Failure { code: 1, message: e.to_string() }
}

fn solve_options(cli: &Cli) -> SolveOptions {
    SolveOptions { budget: cli.budget, parallel: !cli.serial }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Validate { model } => {
            let m = load_model(model)?;
            let report = validate_model(&m);
            write!(out, "{report}").map_err(io)?;
            if !report.is_well_formed() {
                return Err(Failure { code: 2, message: format!("{}: model is not well formed", model.display()) });
            }
            writeln!(out, "ok").map_err(io)?;
        }
        Command::Solve { model, horizon, out: policy_out } => {
            let m = load_model(model)?;
            let t = horizon.unwrap_or(m.horizon());
            let r = solve_decpomdp_exact(&m, t, &solve_options(cli))?;
            writeln!(
                out,
                "{{\"optimal_value\": \"{}\", \"policies_examined\": {}}}",
                r.optimal_value, r.policies_examined
            )
            .map_err(io)?;
            if let Some(path) = policy_out {
                write(path, &policy_to_json(&m, &r.argmax_policy))?;
            }
        }
        Command::Decide { model, threshold, horizon } => {
            let m = load_model(model)?;
            let k: Rational = threshold
                .parse()
                .map_err(|e| Failure { code: 2, message: format!("--threshold: {e}") })?;
            let t = horizon.unwrap_or(m.horizon());
            let instance = DecisionInstance::new(m, t, k, cli.allow_long_horizon)?;
            let options = DecideOptions { solve: solve_options(cli), early_exit: cli.early_exit };
            writeln!(out, "{}", decide(&instance, &options)?.answer).map_err(io)?;
        }
        Command::Evaluate { model, policy, horizon } => {
            let m = load_model(model)?;
            let p = parse_policy(&m, &read(policy)?).map_err(in_file(policy))?;
            let v = exact_value(&m, &p, horizon.unwrap_or(m.horizon()))?;
            writeln!(out, "{}", serde_json::to_string(&v).expect("value serializes")).map_err(io)?;
        }
        Command::Simulate { model, policy, horizon, episodes, seed } => {
            let m = load_model(model)?;
            let p = parse_policy(&m, &read(policy)?).map_err(in_file(policy))?;
            let est = simulate(&m, &p, horizon.unwrap_or(m.horizon()), *episodes, *seed)?;
            writeln!(out, "{}", serde_json::to_string(&est).expect("estimate serializes")).map_err(io)?;
        }
        Command::TilingSolve { instance } => {
            let inst = parse_tiling_instance(&read(instance)?).map_err(in_file(instance))?;
            match solve_tiling_bruteforce(&inst, cli.budget)? {
                Some(f) => write!(out, "{}", f.display(&inst)).map_err(io)?,
                None => writeln!(out, "UNSATISFIABLE").map_err(io)?,
            }
        }
        Command::Reduce { tiling, out: model_out, meta } => {
            let inst = parse_tiling_instance(&read(tiling)?).map_err(in_file(tiling))?;
            let art = compile_tiling_to_decpomdp(&inst)?;
            write(model_out, &model_to_json(&art.model))?;
            let meta_path = meta.clone().unwrap_or_else(|| model_out.with_extension("meta.json"));
            let text = serde_json::to_string_pretty(&art.metadata()).expect("metadata serializes");
            write(&meta_path, &text)?;
            writeln!(
                out,
                "{{\"states\": {}, \"horizon\": {}, \"threshold\": \"{}\"}}",
                art.model.num_states(),
                art.horizon,
                art.threshold
            )
            .map_err(io)?;
        }
        Command::Lift { model, agents, out: lifted_out } => {
            let m = load_model(model)?;
            let lifted = match agents {
                2 => lift_pomdp_to_two_agent_decmdp(&as_single_agent(m)?)?,
                3 => lift_to_three_agent_decmdp(&m)?,
                other => {
                    return Err(Failure { code: 2, message: format!("--agents must be 2 or 3, got {other}") });
                }
            };
            let text = model_to_json(lifted.model());
            match lifted_out {
                Some(path) => write(path, &text)?,
                None => writeln!(out, "{text}").map_err(io)?,
            }
        }
        Command::CountPolicies { model, horizon } => {
            let m = load_model(model)?;
            let t = horizon.unwrap_or(m.horizon());
            let counts: Vec<_> = (0..m.num_agents()).map(|i| count_local_policies(&m, AgentId(i), t)).collect();
            let joint: num_bigint::BigUint = counts.iter().product();
            let list: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{{\"agents\": [{}], \"joint\": {joint}}}", list.join(", ")).map_err(io)?;
        }
        Command::VerifyReduction { tiling } => {
            let inst = parse_tiling_instance(&read(tiling)?).map_err(in_file(tiling))?;
            let tiled = solve_tiling_bruteforce(&inst, cli.budget)?.is_some();
            let art = compile_tiling_to_decpomdp(&inst)?;
            let r = solve_decpomdp_exact(&art.model, art.horizon, &solve_options(cli))?;
            let agree = tiled == r.optimal_value.is_zero();
            writeln!(out, "{}", if agree { "AGREE" } else { "DISAGREE" }).map_err(io)?;
            writeln!(
                out,
                "{{\"tiling_exists\": {tiled}, \"optimal_value\": \"{}\", \"policies_examined\": {}}}",
                r.optimal_value, r.policies_examined
            )
            .map_err(io)?;
        }
    }
    Ok(())
}

/// Runs a parsed command, writing results to `out` and diagnostics to `err`.
/// Returns the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Parses arguments and runs; clap's own usage errors exit with 2.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            code
        }
    }
}

