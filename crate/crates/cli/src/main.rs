use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use jobcost::par::Execution;
use jobcost::rational::{parse_rat, rat_to_json, Rat};
use jobcost::workbench::experiment::{self, run_experiment, ExperimentConfig, Row, SolverKind, Source};
use jobcost::workbench::generate::{generate_gsp, generate_ufp, GspParams, UfpParams};
use jobcost::workbench::io::{read_instance, to_string, Instance};
use jobcost::Error;

#[derive(Parser)]
#[command(name = "jobcost", version, about = "Scheduling with step cost functions and UFP-cover")]
struct Cli {
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ufp,
    Gsp,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "gsp")]
    kind: Kind,
    /// Tasks or jobs.
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Path edges (UFP-cover).
    #[arg(long, default_value_t = 6)]
    m: usize,
    /// Global cost functions (scheduling).
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Comma-separated release dates (scheduling).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    releases: Vec<i64>,
    #[arg(long, default_value_t = 3)]
    weight_bound: i64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a seeded instance as JSON.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a solver on an instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "qptas")]
        solver: String,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact optimum of an instance file, as measured for the given solver.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value = "qptas")]
        solver: String,
        #[arg(long, default_value_t = 20)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Batch of seeded instances against the oracle; CSV rows plus a JSON summary.
    Compare {
        #[arg(long, default_value = "qptas")]
        solver: String,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 20)]
        cap: usize,
        #[arg(long)]
        no_oracle: bool,
        /// Leave the runtime column empty.
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        gen: GenArgs,
        /// CSV path; the summary goes next to it with a `.json` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a CSV written by `compare`.
    Report { csv: PathBuf },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn eps_arg(s: &str) -> Result<Rat> {
    Ok(parse_rat(s)?)
}

fn generate(gen: &GenArgs, seed: u64) -> Result<Instance> {
    Ok(match gen.kind {
        Kind::Ufp => Instance::Ufp(generate_ufp(seed, &ufp_params(gen))?),
        Kind::Gsp => Instance::Gsp(generate_gsp(seed, &gsp_params(gen))?),
    })
}

fn ufp_params(gen: &GenArgs) -> UfpParams {
    UfpParams { n: gen.n, m: gen.m, ..UfpParams::default() }
}

fn gsp_params(gen: &GenArgs) -> GspParams {
    GspParams {
        n: gen.n,
        classes: gen.classes,
        releases: gen.releases.clone(),
        weight_bound: gen.weight_bound,
        ..GspParams::default()
    }
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match cli.cmd {
        Cmd::Generate { seed, gen, out } => {
            let inst = generate(&gen, seed)?;
            emit(out.as_deref(), &to_string(&inst))
        }
        Cmd::Solve { instance, solver, epsilon, out } => {
            let inst = read_instance(&instance)?;
            let solver: SolverKind = solver.parse()?;
            let eps = eps_arg(&epsilon)?;
            let o = experiment::solve(solver, &inst, &eps, exec)?;
            let v = json!({
                "solver": solver.name(),
                "epsilon": rat_to_json(&eps),
                "cost": rat_to_json(&o.cost),
                "guarantee": rat_to_json(&o.guarantee),
                "feasible": o.feasible,
                "speed": o.speed.as_ref().map(rat_to_json),
                "solution": o.detail,
            });
            emit(out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&v)?))
        }
        Cmd::Oracle { instance, solver, cap, out } => {
            let inst = read_instance(&instance)?;
            let solver: SolverKind = solver.parse()?;
            let cost = experiment::oracle(solver, &inst, cap, exec)?
                .ok_or_else(|| Error::Infeasible("no feasible solution".into()))?;
            let v = json!({ "solver": solver.name(), "optimum": rat_to_json(&cost) });
            emit(out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&v)?))
        }
        Cmd::Compare { solver, epsilon, seed, count, cap, no_oracle, no_timing, gen, out } => {
            let solver: SolverKind = solver.parse()?;
            let source = Source::Seeds { start: seed, count, ufp: ufp_params(&gen), gsp: gsp_params(&gen) };
            let cfg = ExperimentConfig {
                oracle: !no_oracle,
                cap,
                record_runtime: !no_timing,
                exec,
                ..ExperimentConfig::new(solver, eps_arg(&epsilon)?, source)
            };
            let report = run_experiment(&cfg)?;
            let summary = format!("{}\n", report.summary_json());
            match out {
                Some(p) => {
                    report.write_csv(fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?)?;
                    emit(Some(&p.with_extension("json")), &summary)?;
                    emit(None, &summary)
                }
                None => {
                    report.write_csv(io::stdout())?;
                    io::stderr().write_all(summary.as_bytes())?;
                    Ok(())
                }
            }
        }
        Cmd::Report { csv } => {
            let mut rd = csv::Reader::from_path(&csv).with_context(|| format!("reading {}", csv.display()))?;
            let rows: Vec<Row> = rd.deserialize().collect::<std::result::Result<_, _>>()?;
            let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio.as_ref()?.parse().ok()).collect();
            let v = json!({
                "runs": rows.len(),
                "feasible": rows.iter().filter(|r| r.feasible).count(),
                "with_oracle": ratios.len(),
                "mean_ratio": (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
                "max_ratio": ratios.iter().copied().reduce(f64::max),
            });
            emit(None, &format!("{}\n", serde_json::to_string_pretty(&v)?))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible(_)) => 2,
        Some(Error::CapExceeded { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
