#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use adyield::config::{
    complete_samples, read_bids, read_quality_samples, write_json, Exchange, ModelConfig, PolicyFile, PolicyMode,
    SolutionFile,
};
use adyield::dual::{solve_dual, solve_dual_saa, SolveOptions};
use adyield::exchange::BidModel;
use adyield::experiments::{
    compare_pd, estimator_efficiency, pareto_sweep, regret_experiment, write_results, ExperimentSpec, QualityFamily,
};
use adyield::fluid::fluid_evaluate;
use adyield::market::{fit_mixture, MarketModel};
use adyield::policy::{
    capacities, dap_upper_bound, dp_solve, optimal_policy, simulate_replications, PolicyConfig, DEFAULT_STATE_BUDGET,
};
use adyield::tiebreak::{solve_tiebreak_flow, TieTable, FLOW_TOLERANCE};
use adyield::Error;
use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Yield optimization over guaranteed contracts and an ad exchange.
///
/// Exit codes: 0 success, 2 invalid input or configuration, 3 the solver
/// did not converge, 1 anything else.
#[derive(Parser)]
#[command(name = "adyield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the dual for bid prices and write the solution and, optionally, a policy file.
    SolveDual(SolveDualArgs),
    /// Simulate the bid-price policy over seeded replications.
    Simulate(SimulateArgs),
    /// Fluid trajectory of the bid-price policy.
    Fluid(FluidArgs),
    /// Fit a model from quality (and optionally bid) logs.
    Estimate(EstimateArgs),
    /// Exact dynamic program for small discrete instances.
    DpOracle(DpArgs),
    /// Revenue/quality frontier over a grid of quality weights.
    Pareto(ParetoArgs),
    /// Simulated regret against the deterministic bound for growing horizons.
    Regret(RegretArgs),
    /// Sample-quantile against plug-in bid prices for one advertiser.
    Efficiency(EfficiencyArgs),
    /// Fitted-model prices against sample-average prices, scored by the fluid model.
    ComparePd(ComparePdArgs),
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Maximum solver iterations.
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Stationarity tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Armijo constant of the line search.
    #[arg(long, default_value_t = 1e-4)]
    armijo: f64,
    /// JSON file of solver options; overrides the flags above.
    #[arg(long)]
    solver: Option<PathBuf>,
}

impl SolverFlags {
    fn options(&self) -> anyhow::Result<SolveOptions> {
        let mut opts = SolveOptions { max_iters: self.max_iters, tolerance: self.tolerance, armijo: self.armijo, ..Default::default() };
        if let Some(path) = &self.solver {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("solver file: {e}")))?;
            let get = |k: &str| value.get(k).and_then(|x| x.as_f64());
            if let Some(x) = get("max_iters") {
                opts.max_iters = x as usize;
            }
            if let Some(x) = get("tolerance") {
                opts.tolerance = x;
            }
            if let Some(x) = get("armijo") {
                opts.armijo = x;
            }
        }
        if !(opts.tolerance > 0.0) || !(opts.armijo > 0.0 && opts.armijo < 1.0) || opts.max_iters == 0 {
            return Err(Error::Config("solver options out of range".into()).into());
        }
        Ok(opts)
    }
}

#[derive(Args)]
struct SolveDualArgs {
    #[arg(long)]
    model: PathBuf,
    /// Solution JSON `{v, objective, converged, iterations}`.
    #[arg(long)]
    out: PathBuf,
    /// Also write a policy file with the tie rule.
    #[arg(long)]
    policy_out: Option<PathBuf>,
    /// Solve from a quality log (CSV, one column per advertiser id) instead of the model's law.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Policy file, as written by `solve-dual --policy-out`.
    #[arg(long)]
    policy: PathBuf,
    /// Impressions per replication.
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV with columns rep, yield, adx_revenue, quality_<id>..., leftover_onset.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FluidArgs {
    #[arg(long)]
    model: PathBuf,
    /// Solution or policy file holding `v`.
    #[arg(long)]
    v: PathBuf,
    /// CSV with columns t, S_<id>..., J.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Model whose advertisers (ids, rho, penalties) are kept.
    #[arg(long)]
    model: PathBuf,
    /// Quality log, one column per advertiser id, empty where the advertiser is not eligible.
    #[arg(long)]
    samples: PathBuf,
    /// Bid log with columns b1, b2; sets an empirical exchange.
    #[arg(long)]
    bids: Option<PathBuf>,
    /// Fitted model JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DpArgs {
    /// Model with an atoms quality law and a null or discrete single-bidder exchange.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: u64,
    /// Largest state space to enumerate.
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    budget: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct ParetoArgs {
    #[arg(long)]
    model: PathBuf,
    /// Quality weights; 0 is always added, and the remnant-only baseline is appended.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.5,0.75,1,1.5,2,3")]
    gammas: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct RegretArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    horizons: Vec<u64>,
    #[arg(long, default_value_t = 500)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Exponential,
    Normal,
}

#[derive(Args)]
struct EfficiencyArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// True mean of the quality.
    #[arg(long, default_value_t = 1.0)]
    mean: f64,
    /// Known standard deviation (normal family).
    #[arg(long, default_value_t = 1.0)]
    sd: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ComparePdArgs {
    /// Model with a type mixture; its exchange is ignored.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
}

/// The solver stopped before meeting its tolerance.
#[derive(Debug)]
struct NotConverged(usize);

impl std::fmt::Display for NotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "the dual solver did not converge in {} iterations", self.0)
    }
}

impl std::error::Error for NotConverged {}

fn load_model(path: &Path) -> anyhow::Result<(ModelConfig, MarketModel, Exchange)> {
    let config = ModelConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    let model = config.market()?;
    let exchange = Exchange::new(config.curve()?, config.revenue_share)?;
    Ok((config, model, exchange))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn require(cond: bool, msg: &str) -> anyhow::Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg.into()).into())
    }
}

fn solve_dual_cmd(args: SolveDualArgs) -> anyhow::Result<()> {
    let (_, model, exchange) = load_model(&args.model)?;
    let opts = args.solver.options()?;
    let solution = match &args.samples {
        Some(path) => {
            let rows = read_quality_samples(&model.ids(), BufReader::new(File::open(path)?))?;
            let penalties: Vec<f64> = model.advertisers.iter().map(|a| a.penalty).collect();
            let samples: Vec<_> = complete_samples(&rows, &penalties)
                .into_iter()
                .map(|mut q| {
                    q.values.iter_mut().for_each(|x| *x *= model.gamma);
                    q
                })
                .collect();
            solve_dual_saa(&samples, &model.rho(), &exchange.curve, &opts)?
        }
        None => solve_dual(&model, &exchange, &opts)?,
    };
    write_json(&SolutionFile::new(&model, &solution), create(&args.out)?)?;
    if let Some(path) = &args.policy_out {
        let policy = if args.samples.is_some() {
            PolicyConfig { v: solution.v.clone(), ..Default::default() }
        } else {
            let table = TieTable::from_events(&solution.evaluation.table);
            PolicyConfig { v: solution.v.clone(), tiebreak: solve_tiebreak_flow(&table, &model.rho(), FLOW_TOLERANCE)? }
        };
        write_json(&PolicyFile::from_policy(&model, &policy, PolicyMode::Joint), create(path)?)?;
    }
    if !solution.converged {
        return Err(NotConverged(solution.iterations).into());
    }
    Ok(())
}

fn simulate_cmd(args: SimulateArgs) -> anyhow::Result<()> {
    let (_, model, exchange) = load_model(&args.model)?;
    require(args.reps >= 1, "need at least one replication")?;
    let file = PolicyFile::load(&args.policy)?;
    let policy = file.to_policy(&model)?;
    let runs = file.mode.with_response(&exchange, |r| simulate_replications(&model, r, &policy, args.n, args.reps, args.seed))?;
    let mut w = csv::Writer::from_writer(create(&args.out)?);
    let mut header = vec!["rep".to_string(), "yield".into(), "adx_revenue".into()];
    header.extend(model.ids().iter().map(|id| format!("quality_{id}")));
    header.push("leftover_onset".into());
    w.write_record(&header)?;
    for r in &runs {
        let mut row = vec![r.rep.to_string(), r.total_yield.to_string(), r.adx_revenue.to_string()];
        row.extend(r.quality.iter().map(|q| q.to_string()));
        row.push(r.leftover_onset.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn fluid_cmd(args: FluidArgs) -> anyhow::Result<()> {
    let (_, model, exchange) = load_model(&args.model)?;
    let file = PolicyFile::load(&args.v)?;
    let policy = file.to_policy(&model)?;
    let f = file.mode.with_response(&exchange, |r| fluid_evaluate(&model, r, &policy, &Default::default()))?;
    f.write_trajectory(&model.ids(), create(&args.out)?)?;
    if !f.unmet.is_empty() {
        eprintln!("warning: some contracts are not filled by t = 1");
    }
    Ok(())
}

fn estimate_cmd(args: EstimateArgs) -> anyhow::Result<()> {
    let (mut config, model, _) = load_model(&args.model)?;
    let rows = read_quality_samples(&model.ids(), BufReader::new(File::open(&args.samples)?))?;
    let penalties: Vec<f64> = model.advertisers.iter().map(|a| a.penalty).collect();
    let fitted = fit_mixture(&rows, &penalties)?;
    config.types = fitted.to_types(&model.ids());
    config.quality_law = None;
    if let Some(path) = &args.bids {
        let samples = read_bids(BufReader::new(File::open(path)?))?;
        config.exchange = BidModel::Empirical { samples: Arc::new(samples) };
    }
    config.market()?;
    writeln!(create(&args.out)?, "{}", config.to_json()?)?;
    Ok(())
}

fn dp_cmd(args: DpArgs) -> anyhow::Result<()> {
    let (config, model, exchange) = load_model(&args.model)?;
    let caps = capacities(&model.rho(), args.n);
    let dp = dp_solve(&model, &config.exchange, args.n, &caps, args.budget)?;
    let (solution, _) = optimal_policy(&model, &exchange, &args.solver.options()?)?;
    let bound = dap_upper_bound(&model, &exchange, &solution.v, args.n)?;
    let out = json!({ "n": args.n, "capacities": caps, "value": dp.value, "upper_bound": bound });
    write_json(&out, create(&args.out)?)?;
    Ok(())
}

fn spec(kind: &str, model: Option<&Path>, reps: u64, seed: u64) -> ExperimentSpec {
    ExperimentSpec { kind: kind.into(), model: model.map(Path::to_path_buf), reps, seed, ..Default::default() }
}

fn pareto_cmd(args: ParetoArgs) -> anyhow::Result<()> {
    let (_, model, exchange) = load_model(&args.model)?;
    require(!args.gammas.is_empty() && args.gammas.iter().all(|g| *g >= 0.0), "gammas must be non-negative")?;
    let points = pareto_sweep(&model, &exchange, &args.gammas, &args.solver.options()?)?;
    let mut s = spec("pareto", Some(&args.model), 1, 0);
    s.gammas = args.gammas;
    write_results(&args.out, &s, &points)?;
    Ok(())
}

fn regret_cmd(args: RegretArgs) -> anyhow::Result<()> {
    let (_, model, exchange) = load_model(&args.model)?;
    require(!args.horizons.is_empty() && args.reps >= 1, "need horizons and at least one replication")?;
    let rows = regret_experiment(&model, &exchange, &args.horizons, args.reps, args.seed, &args.solver.options()?)?;
    let mut s = spec("regret", Some(&args.model), args.reps, args.seed);
    s.horizons = args.horizons;
    write_results(&args.out, &s, &rows)?;
    Ok(())
}

fn efficiency_cmd(args: EfficiencyArgs) -> anyhow::Result<()> {
    let family = match args.family {
        FamilyArg::Exponential => QualityFamily::Exponential { mean: args.mean },
        FamilyArg::Normal => QualityFamily::Normal { mean: args.mean, sd: args.sd },
    };
    require(!args.sizes.is_empty(), "need at least one training-set size")?;
    let rows = estimator_efficiency(family, args.rho, &args.sizes, args.reps, args.seed)?;
    let mut s = spec("efficiency", None, args.reps, args.seed);
    s.sizes = args.sizes;
    s.extra = Some(json!({ "family": family, "rho": args.rho }));
    write_results(&args.out, &s, &rows)?;
    Ok(())
}

fn compare_pd_cmd(args: ComparePdArgs) -> anyhow::Result<()> {
    let (_, model, _) = load_model(&args.model)?;
    require(!args.sizes.is_empty() && args.reps >= 1, "need training-set sizes and at least one replication")?;
    let rows = compare_pd(&model, &args.sizes, args.reps, args.seed, &args.solver.options()?)?;
    let mut s = spec("compare-pd", Some(&args.model), args.reps, args.seed);
    s.sizes = args.sizes;
    write_results(&args.out, &s, &rows)?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<NotConverged>().is_some() {
        return 3;
    }
    if err.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::NotFound) {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::InvalidModel(_) | Error::InvalidShare(_) | Error::Json(_) | Error::Unsupported(_)) => 2,
        Some(Error::InfeasibleHorizon { .. } | Error::StateBudget { .. }) => 2,
        Some(Error::Quadrature { .. }) => 3,
        Some(Error::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SolveDual(a) => solve_dual_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Fluid(a) => fluid_cmd(a),
        Command::Estimate(a) => estimate_cmd(a),
        Command::DpOracle(a) => dp_cmd(a),
        Command::Pareto(a) => pareto_cmd(a),
        Command::Regret(a) => regret_cmd(a),
        Command::Efficiency(a) => efficiency_cmd(a),
        Command::ComparePd(a) => compare_pd_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
