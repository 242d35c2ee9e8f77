//! Command-line front end: single estimates, sample-size tables, cost curves,
//! and seeded batch experiments with CSV output.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::ChaCha8Rng;

use tsmc::cost;
use tsmc::engine::{run_two_stage, EngineConfig, FloorPolicy};
use tsmc::harness::{
    run_bench, substream_seed, write_csv, DimensionSpec, ExperimentConfig, Problem,
};
use tsmc::problems::{
    hump_eval, hump_exact_moments, hump_random_instance, option_exact_price, option_payoff,
    OptionParams,
};
use tsmc::sampler::{standard_normal, uniform_open01, SeededSampler};
use tsmc::sizes;

const EXIT_GUARANTEE_VOID: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "tsmc", version, about = "Two-stage Monte Carlo mean estimation \
with fixed-width confidence guarantees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the two-stage estimator once on a benchmark problem.
    Estimate(EstimateArgs),
    /// Run a seeded batch experiment and write one CSV row per replication.
    Bench(BenchArgs),
    /// Print the stage-two sample-size table for given inputs.
    Sizes(SizesArgs),
    /// Emit cost-ratio curves versus the CLT baseline as CSV.
    Cost(CostArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemArg {
    Hump,
    Option,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FloorArg {
    One,
    Nsigma,
}

/// Flags shared by the estimator-driving subcommands.  Every field is
/// optional here so that a config file can fill gaps: flags override the
/// file, the file overrides built-in defaults.
#[derive(Args, Clone)]
struct CommonArgs {
    /// Master seed for all randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Target confidence level parameter in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Half-width of the fixed-width interval.
    #[arg(long)]
    eps: Option<f64>,
    /// Stage-one pilot sample size.
    #[arg(long)]
    n_sigma: Option<u64>,
    /// Variance inflation factor (> 1).
    #[arg(long)]
    inflation: Option<f64>,
    /// Total sample budget; exceeding it voids the guarantee.
    #[arg(long)]
    n_max: Option<u64>,
    /// Stage-two floor: 1 sample or n_sigma samples.
    #[arg(long, value_enum)]
    floor: Option<FloorArg>,
    /// Flat key=value config file; flags take precedence over its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// Integrand dimension (hump) or number of monitoring times (option).
    #[arg(long)]
    d: Option<usize>,
    /// Volatility for the option problem.
    #[arg(long)]
    v: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long)]
    replications: Option<u64>,
    /// Fix the dimension for every replication (option default: drawn from
    /// {1,2,4,8,16,32}; hump default: 1).
    #[arg(long)]
    d: Option<usize>,
    /// Restore the full-size experiment (500 replications).
    #[arg(long)]
    paper_scale: bool,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SizesArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    alpha: f64,
    /// Bound on the standardized third absolute moment.
    #[arg(long)]
    m3: f64,
    /// Stage-two sample-size floor.
    #[arg(long, default_value_t = 1)]
    floor: u64,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Confidence parameter of the cost bound itself.
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    /// Kurtosis caps, one curve per value.
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 10.0, 100.0])]
    kappa_max: Vec<f64>,
    /// Pilot-size rule: n_sigma = ceil(rule * kappa_max).
    #[arg(long, default_value_t = 4000.0)]
    n_sigma_rule: f64,
    #[arg(long, default_value_t = 1.0)]
    grid_lo: f64,
    #[arg(long, default_value_t = 1e4)]
    grid_hi: f64,
    #[arg(long, default_value_t = 41)]
    grid_points: usize,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_config(path: &PathBuf) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn from_file<T: std::str::FromStr>(file: &HashMap<String, String>, key: &str) -> Option<T> {
    file.get(key).and_then(|v| v.parse().ok())
}

/// Engine configuration after the flag > file > default cascade.
fn resolve_engine_config(
    common: &CommonArgs,
    default_eps: f64,
) -> Result<(EngineConfig, u64, HashMap<String, String>), String> {
    let file = match &common.config {
        Some(path) => read_config(path)?,
        None => HashMap::new(),
    };
    let floor_policy = match common.floor {
        Some(FloorArg::One) => FloorPolicy::One,
        Some(FloorArg::Nsigma) => FloorPolicy::NSigma,
        None => match file.get("floor").map(String::as_str) {
            Some("one") => FloorPolicy::One,
            Some("nsigma") | None => FloorPolicy::NSigma,
            Some(other) => return Err(format!("config: unknown floor '{other}'")),
        },
    };
    let cfg = EngineConfig {
        n_sigma: common.n_sigma.or_else(|| from_file(&file, "n_sigma")).unwrap_or(1 << 13),
        inflation: common.inflation.or_else(|| from_file(&file, "inflation")).unwrap_or(1.1),
        alpha: common.alpha.or_else(|| from_file(&file, "alpha")).unwrap_or(0.01),
        epsilon: common.eps.or_else(|| from_file(&file, "eps")).unwrap_or(default_eps),
        n_max: common.n_max.or_else(|| from_file(&file, "n_max")).unwrap_or(1_000_000_000),
        floor_policy,
    };
    let seed = common.seed.or_else(|| from_file(&file, "seed")).unwrap_or(1);
    Ok((cfg, seed, file))
}

fn cmd_estimate(args: &EstimateArgs) -> Result<u8, String> {
    let default_eps = match args.problem {
        ProblemArg::Hump => 1e-3,
        ProblemArg::Option => 0.05,
    };
    let (cfg, seed, _) = resolve_engine_config(&args.common, default_eps)?;
    cfg.validate().map_err(|e| e.to_string())?;

    let rep_seed = substream_seed(seed, 0);
    let sampler_seed = substream_seed(rep_seed, 2);
    let (report, exact, label) = match args.problem {
        ProblemArg::Hump => {
            let d = args.d.unwrap_or(1);
            let params = hump_random_instance(substream_seed(rep_seed, 1), d, (1e-2, 1e2));
            let exact = hump_exact_moments(&params).mu;
            let sampler = SeededSampler::new(sampler_seed, move |rng: &mut ChaCha8Rng| {
                let x: Vec<f64> = (0..params.d).map(|_| uniform_open01(rng)).collect();
                hump_eval(&params, &x)
            });
            (run_two_stage(&sampler, &cfg).map_err(|e| e.to_string())?, exact, "hump")
        }
        ProblemArg::Option => {
            let params = OptionParams {
                s0: 100.0,
                strike: 100.0,
                maturity: 1.0,
                rate: 0.03,
                volatility: args.v.unwrap_or(0.4),
                d: args.d.unwrap_or(8),
            };
            let exact = option_exact_price(&params);
            let sampler = SeededSampler::new(sampler_seed, move |rng: &mut ChaCha8Rng| {
                let z: Vec<f64> = (0..params.d).map(|_| standard_normal(rng)).collect();
                option_payoff(&params, &z)
            });
            (run_two_stage(&sampler, &cfg).map_err(|e| e.to_string())?, exact, "option")
        }
    };
    println!(
        "problem={} mu_hat={:e} mu_exact={:e} abs_err={:e} eps={:e} n_total={} selector={} budget_truncated={}",
        label,
        report.mu_hat,
        exact,
        (report.mu_hat - exact).abs(),
        cfg.epsilon,
        report.n_total,
        report.selector,
        report.budget_truncated
    );
    Ok(if report.budget_truncated { EXIT_GUARANTEE_VOID } else { 0 })
}

fn cmd_bench(args: &BenchArgs) -> Result<u8, String> {
    let problem = match args.problem {
        ProblemArg::Hump => Problem::Hump,
        ProblemArg::Option => Problem::Option,
    };
    let defaults = ExperimentConfig::new(problem, args.paper_scale);
    let (engine, seed, file) = resolve_engine_config(&args.common, defaults.epsilon)?;
    let cfg = ExperimentConfig {
        problem,
        replications: args
            .replications
            .or_else(|| from_file(&file, "replications"))
            .unwrap_or(defaults.replications),
        epsilon: engine.epsilon,
        alpha: engine.alpha,
        inflation: engine.inflation,
        n_sigma: engine.n_sigma,
        n_max: engine.n_max,
        d_spec: match args.d.or_else(|| from_file(&file, "d")) {
            Some(d) => DimensionSpec::Fixed(d),
            None => defaults.d_spec,
        },
        master_seed: seed,
        floor_policy: engine.floor_policy,
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let records = run_bench(&cfg).map_err(|e| e.to_string())?;
    match write_output(&args.out, |out| write_csv(out, &cfg, &records)) {
        Ok(()) => Ok(0),
        Err(e) => {
            eprintln!("tsmc: {e}");
            Ok(EXIT_IO)
        }
    }
}

fn write_output(
    path: &Option<PathBuf>,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), String> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)
                .map_err(|e| format!("cannot write {}: {e}", p.display()))?;
            body(&mut f).map_err(|e| format!("write to {}: {e}", p.display()))
        }
        None => {
            let stdout = std::io::stdout();
            body(&mut stdout.lock()).map_err(|e| format!("write to stdout: {e}"))
        }
    }
}

fn cmd_sizes(args: &SizesArgs) -> Result<u8, String> {
    let q = sizes::SizeQuery {
        epsilon: args.eps,
        sigma: args.sigma,
        alpha: args.alpha,
        m3: args.m3,
    };
    q.validate().map_err(|e| e.to_string())?;
    let n_clt = sizes::n_clt(&q);
    let n_cheb = sizes::n_cheb(&q);
    let n_be = sizes::n_be(&q);
    let (n_mu, selector) = sizes::n_mu(&q, args.floor);
    // every column is a stage-two sample size, so all report at least the floor
    println!("n_clt={}", n_clt.max(args.floor));
    println!("n_cheb={}", n_cheb.max(args.floor));
    println!("n_be={}", n_be.max(args.floor));
    println!("n_mu={n_mu}");
    println!("selector={selector}");
    Ok(0)
}

fn cmd_cost(args: &CostArgs) -> Result<u8, String> {
    if args.kappa_max.is_empty() {
        return Err("at least one --kappa-max value is required".into());
    }
    let grid = cost::log_grid(args.grid_lo, args.grid_hi, args.grid_points);
    let alpha_tilde = 1.0 - (1.0 - args.alpha).sqrt();
    write_output(&args.out, |out| {
        writeln!(out, "sigma_over_eps,n_clt,n_up,ratio,regime,n_sigma,inflation,kappa_max")?;
        for &kappa in &args.kappa_max {
            let n_sigma = (args.n_sigma_rule * kappa).ceil() as u64;
            let inflation = cost::inflation_for_kappa(kappa, alpha_tilde, n_sigma)
                .expect("pilot-size rule too small for this kurtosis cap");
            writeln!(out, "# mode=heuristic kappa_max={kappa}")?;
            let profiles = cost::cost_curve(args.alpha, args.beta, kappa, args.n_sigma_rule, &grid);
            for (soe, p) in grid.iter().zip(&profiles) {
                writeln!(
                    out,
                    "{soe:e},{},{},{:e},{},{n_sigma},{inflation:e},{kappa}",
                    p.n_clt, p.n_up, p.ratio, p.regime
                )?;
            }
            writeln!(out, "# mode=optimized kappa_max={kappa}")?;
            for &soe in &grid {
                let (opt_n_sigma, opt_inflation, _) =
                    cost::optimize_params(soe, args.alpha, args.beta, kappa);
                let p = cost::n_up(&cost::CostQuery {
                    epsilon: 1.0,
                    alpha: args.alpha,
                    beta: args.beta,
                    kappa_max: kappa,
                    sigma_max: soe,
                    n_sigma: opt_n_sigma,
                    inflation: opt_inflation,
                    floor_policy: FloorPolicy::NSigma,
                });
                writeln!(
                    out,
                    "{soe:e},{},{},{:e},{},{opt_n_sigma},{opt_inflation:e},{kappa}",
                    p.n_clt, p.n_up, p.ratio, p.regime
                )?;
            }
        }
        Ok(())
    })
    .map(|()| 0)
    .or_else(|e| {
        eprintln!("tsmc: {e}");
        Ok(EXIT_IO)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Estimate(args) => cmd_estimate(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Sizes(args) => cmd_sizes(args),
        Cmd::Cost(args) => cmd_cost(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("tsmc: error: {msg}");
            ExitCode::from(2)
        }
    }
}
