// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use robust_ci::adversary::run_checks;
use robust_ci::binomial::{BinomialRobustCi, RobustCiConfig};
use robust_ci::estimators::{
    adaptive_estimator, known_eps_ci, selected_branch, EstimatorConfig, DEFAULT_C_CI,
    DEFAULT_C_SEL,
};
use robust_ci::graph::{
    er_conservative_ci, find_s_hat, AdjacencyMatrix, SubsetSearchConfig, DEFAULT_ER_C,
    DEFAULT_EXACT_LIMIT,
};
use robust_ci::grid::DEFAULT_WARN_THRESHOLD;
use robust_ci::poisson::{PoissonCiConfig, PoissonRobustCi, DEFAULT_GRID_CAP};
use robust_ci::sim::{emit_csv, run_experiment, write_csv, ExperimentConfig, ExperimentRecord};
use robust_ci::{ConfidenceInterval, Method, SampleSet};

#[derive(Parser)]
#[command(name = "robust-ci", version, about = "Contamination-robust confidence intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Robust interval for a binomial proportion.
    CiBinom {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        eps_max: f64,
        #[command(flatten)]
        common: CiArgs,
    },
    /// Robust interval for a Poisson rate.
    CiPoisson {
        #[arg(long)]
        eps_max: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
        grid_cap: u64,
        #[command(flatten)]
        common: CiArgs,
    },
    /// Adaptive point estimate; with --eps also prints the known-contamination interval.
    Estimate {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_C_SEL)]
        c_sel: f64,
        #[arg(long, default_value_t = DEFAULT_C_CI)]
        c_ci: f64,
        /// Whitespace-separated counts; standard input when omitted.
        input: Option<PathBuf>,
    },
    /// Node-contamination-robust edge probability from an edge list.
    ErEstimate {
        /// Node count; defaults to one more than the largest label.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_ER_C)]
        c: f64,
        #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
        /// Allow the local-search fallback above the exact limit.
        #[arg(long)]
        heuristic: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// One `i j` pair per line; standard input when omitted.
        input: Option<PathBuf>,
    },
    /// Monte Carlo coverage experiment.
    Simulate(SimArgs),
    /// Checks the lower-bound mixture constructions numerically.
    AdversaryCheck {
        #[arg(long, default_value_t = 20)]
        m: u64,
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 0.01)]
        r: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 3.0)]
        lambda: f64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

#[derive(Args)]
struct CiArgs {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_WARN_THRESHOLD)]
    warn_threshold: f64,
    /// Whitespace-separated counts; standard input when omitted.
    input: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    /// JSON object (or array of objects) using the config field names.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    q_strategy: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    exact_limit: Option<usize>,
    #[arg(long)]
    warn_threshold: Option<f64>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record measured wall-clock time instead of 0 (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading standard input")?;
            Ok(s)
        }
    }
}

fn read_sample(path: Option<&Path>) -> Result<SampleSet> {
    Ok(SampleSet::parse(&read_input(path)?)?)
}

fn print_interval(ci: &ConfidenceInterval) {
    for w in &ci.warnings {
        eprintln!("warning: {w}");
    }
    println!("{} {}", ci.lower, ci.upper);
}

fn method_from_str(s: &str) -> Result<Method> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .with_context(|| format!("unknown method `{s}`"))
}

fn simulation_configs(args: &SimArgs) -> Result<Vec<ExperimentConfig>> {
    let mut configs = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            match value {
                serde_json::Value::Array(items) => items
                    .into_iter()
                    .map(serde_json::from_value)
                    .collect::<std::result::Result<Vec<ExperimentConfig>, _>>()?,
                other => vec![serde_json::from_value(other)?],
            }
        }
        None => {
            let Some(method) = &args.method else {
                bail!("simulate needs --config or --method");
            };
            vec![ExperimentConfig::new(method_from_str(method)?)]
        }
    };
    for cfg in &mut configs {
        if let Some(m) = &args.method {
            cfg.method = method_from_str(m)?;
        }
        if args.m.is_some() {
            cfg.m = args.m;
        }
        if args.lambda.is_some() {
            cfg.lambda = args.lambda;
        }
        if let Some(n) = args.n {
            cfg.n = n;
        }
        if args.p.is_some() {
            cfg.p = args.p;
        }
        if let Some(v) = args.eps {
            cfg.eps = v;
        }
        if let Some(v) = args.eps_max {
            cfg.eps_max = v;
        }
        if let Some(v) = &args.q_strategy {
            cfg.q_strategy = v.clone();
        }
        if let Some(v) = args.reps {
            cfg.replications = v;
        }
        if let Some(v) = args.seed {
            cfg.seed = v;
        }
        if let Some(v) = args.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = args.exact_limit {
            cfg.exact_limit = v;
        }
        if let Some(v) = args.warn_threshold {
            cfg.warn_threshold = v;
        }
    }
    Ok(configs)
}

fn simulate(args: &SimArgs) -> Result<()> {
    let mut records: Vec<ExperimentRecord> = Vec::new();
    for cfg in simulation_configs(args)? {
        let mut rec = run_experiment(&cfg)?;
        eprintln!(
            "{:?}: coverage {:.4} (se {:.4}), median length {:.5}, {:.2}s",
            cfg.method, rec.coverage, rec.mc_stderr, rec.median_length, rec.wallclock_s
        );
        if !args.timing {
            rec.wallclock_s = 0.0;
        }
        records.push(rec);
    }
    match &args.out {
        Some(path) => emit_csv(&records, path)?,
        None => {
            let rows: Vec<_> = records.iter().map(ExperimentRecord::to_row).collect();
            write_csv(&rows, io::stdout().lock())?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::CiBinom { m, eps_max, common } => {
            let s = read_sample(common.input.as_deref())?;
            let cfg = RobustCiConfig::new(m, s.n(), common.alpha, eps_max)?
                .with_warn_threshold(common.warn_threshold);
            print_interval(&BinomialRobustCi::new(cfg)?.interval(&s)?);
        }
        Command::CiPoisson {
            eps_max,
            grid_cap,
            common,
        } => {
            let s = read_sample(common.input.as_deref())?;
            let mut cfg = PoissonCiConfig::new(s.n(), common.alpha, eps_max)?;
            cfg.grid_cap = grid_cap;
            cfg.warn_threshold = common.warn_threshold;
            print_interval(&PoissonRobustCi::new(cfg)?.interval(&s)?);
        }
        Command::Estimate {
            m,
            eps,
            alpha,
            c_sel,
            c_ci,
            input,
        } => {
            let s = read_sample(input.as_deref())?;
            let cfg = EstimatorConfig {
                alpha,
                c_sel,
                c_ci,
                ..EstimatorConfig::new(m)
            };
            cfg.validate()?;
            let p_hat = adaptive_estimator(&s, &cfg)?;
            eprintln!("branch: {:?}", selected_branch(&s, &cfg));
            println!("{p_hat}");
            if let Some(eps) = eps {
                print_interval(&known_eps_ci(p_hat, m, s.n(), eps, alpha, c_ci)?);
            }
        }
        Command::ErEstimate {
            n,
            alpha,
            c,
            exact_limit,
            heuristic,
            seed,
            input,
        } => {
            let a = AdjacencyMatrix::parse_edge_list(&read_input(input.as_deref())?, n)?;
            let cfg = SubsetSearchConfig {
                exact_limit,
                heuristic,
                seed,
                ..SubsetSearchConfig::default()
            };
            cfg.validate()?;
            let found = find_s_hat(&a, &cfg)?;
            if !found.certified {
                eprintln!("warning: subset found by local search, not certified optimal");
            }
            eprintln!("subset: {:?}", found.nodes);
            println!("{}", found.p_hat);
            print_interval(&er_conservative_ci(&a, alpha, c, &cfg)?);
        }
        Command::Simulate(args) => simulate(&args)?,
        Command::AdversaryCheck {
            m,
            p,
            r,
            eps,
            lambda,
            n,
            alpha,
        } => {
            let mut ok = true;
            for c in run_checks(m, p, r, eps, lambda, n, alpha)? {
                let status = match c.tv {
                    None => "INFEASIBLE",
                    Some(_) if c.passed() => "PASS",
                    Some(_) => {
                        ok = false;
                        "FAIL"
                    }
                };
                let tv = c.tv.map_or_else(|| "-".to_string(), |t| format!("{t:.3e}"));
                println!("{status} {} tv={tv} bound={:.3e} {}", c.name, c.bound, c.note);
            }
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
