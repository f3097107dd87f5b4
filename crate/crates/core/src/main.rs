use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semidp::bench::{self, Algorithm, ExperimentConfig, XAxis};
use semidp::central::{
    gaussian_mean_approx_dp, gaussian_mean_zcdp, laplace_mean, optimal_weight, throwaway_mean, weighted_gaussian_mean_optimal,
    weighted_laplace_mean,
};
use semidp::local::{privunit_audit, select_privunit_params, semi_privunit_mean};
use semidp::optim::dump::config_hash;
use semidp::optim::{
    dp_sgd_baseline, ldp_sgd_baseline, semi_dp_sgd, semi_ldp_sgd, throwaway_erm, LossKind, LossModel, ModelDump, SgdConfig, StepSchedule,
};
use semidp::rates::{rate, Bound, Problem, RateQuery};
use semidp::{approx_dp_to_zcdp, BoundedDistSpec, Error, PrivacyBudget, Result, RngStream, ZcdpBudget};

#[derive(Parser)]
#[command(name = "semidp", version, about = "Semi-private estimation, training and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the mean of a dataset CSV.
    Mean(MeanArgs),
    /// Train a linear model on a dataset CSV and print or save the model file.
    Train(TrainArgs),
    /// Run a benchmark sweep described by a config file.
    Bench(BenchArgs),
    /// Evaluate a minimax rate envelope.
    Rates(RatesArgs),
    /// Check the privacy of the PrivUnit parameters chosen for (eps, dim).
    AuditPrivunit(AuditArgs),
    /// Write synthetic train/val/test dataset CSVs.
    GenLinreg(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MeanMethod {
    Throwaway,
    Laplace,
    Gaussian,
    GaussianZcdp,
    WeightedGaussian,
    WeightedLaplace,
    SemiPrivunit,
}

#[derive(Args)]
struct MeanArgs {
    /// Dataset CSV with a `public` column.
    data: PathBuf,
    #[arg(long, value_enum)]
    method: MeanMethod,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// zCDP budget; defaults to the conversion of (eps, delta).
    #[arg(long)]
    rho: Option<f64>,
    /// Norm bound of every sample.
    #[arg(long)]
    bound_b: Option<f64>,
    /// Known bound on the standard deviation of the distribution.
    #[arg(long)]
    stddev_v: Option<f64>,
    /// Private weight of the weighted Laplace estimator; defaults to the zCDP-optimal weight.
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    data: PathBuf,
    #[arg(long)]
    method: Algorithm,
    #[arg(long, default_value = "squared")]
    loss: LossKind,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1e-5)]
    delta: f64,
    /// zCDP budget for the central methods; overrides the conversion of (eps, delta).
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Steps per epoch; defaults to one pass over the sampled pool.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, default_value_t = 1)]
    epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    clip_c: f64,
    #[arg(long, default_value_t = 0.01)]
    step_size: f64,
    #[arg(long, default_value_t = 10)]
    k_priv: usize,
    #[arg(long, default_value_t = 10)]
    k_pub: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Noise variance; defaults to the calibration floor.
    #[arg(long)]
    noise_sigma2: Option<f64>,
    #[arg(long)]
    domain_radius: Option<f64>,
    #[arg(long)]
    warm_start: bool,
    #[arg(long)]
    no_rescale_public: bool,
    #[arg(long)]
    average_iterates: bool,
    /// Write the model here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Also write a matplotlib script next to the CSV.
    #[arg(long, value_parser = ["ratio", "eps"])]
    plot: Option<String>,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long)]
    problem: Problem,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long)]
    n_priv: u64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    d: u64,
    #[arg(long, default_value_t = 1.0)]
    lipschitz: f64,
    #[arg(long, default_value_t = 1.0)]
    diameter: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long)]
    lower: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 1001)]
    grid_size: usize,
    /// Claimed epsilon; defaults to `--eps`.
    #[arg(long)]
    claim: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 5000)]
    n_train: usize,
    #[arg(long, default_value_t = 1250)]
    n_val: usize,
    #[arg(long, default_value_t = 1000)]
    n_test: usize,
    #[arg(long, default_value_t = 0.5)]
    noise_std: f64,
    #[arg(long)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving train.csv, val.csv and test.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn need(v: Option<f64>, flag: &str) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidInput(format!("--{flag} is required for this method")))
}

fn zcdp(rho: Option<f64>, eps: Option<f64>, delta: f64) -> Result<ZcdpBudget> {
    match rho {
        Some(r) => ZcdpBudget::new(r),
        None => approx_dp_to_zcdp(PrivacyBudget::new(need(eps, "eps")?, delta)?),
    }
}

fn print_vec(v: &[f64]) {
    println!("{}", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
}

fn run_mean(a: MeanArgs) -> Result<()> {
    let data = bench::load_dataset(&a.data)?;
    let mut rng = RngStream::new(a.seed, 0).rng();
    let spec = || BoundedDistSpec::new(need(a.bound_b, "bound-b")?, need(a.stddev_v, "stddev-v")?);
    let est = match a.method {
        MeanMethod::Throwaway => throwaway_mean(&data)?,
        MeanMethod::Laplace => laplace_mean(&data, PrivacyBudget::pure(need(a.eps, "eps")?)?, need(a.bound_b, "bound-b")?, &mut rng)?,
        MeanMethod::Gaussian => gaussian_mean_approx_dp(&data, PrivacyBudget::new(need(a.eps, "eps")?, a.delta)?, need(a.bound_b, "bound-b")?, &mut rng)?,
        MeanMethod::GaussianZcdp => {
            let b = need(a.bound_b, "bound-b")?;
            gaussian_mean_zcdp(&data, zcdp(a.rho, a.eps, a.delta)?, BoundedDistSpec::new(b, a.stddev_v.unwrap_or(b))?, &mut rng)?
        }
        MeanMethod::WeightedGaussian => weighted_gaussian_mean_optimal(&data, spec()?, zcdp(a.rho, a.eps, a.delta)?, &mut rng)?,
        MeanMethod::WeightedLaplace => {
            let eps = need(a.eps, "eps")?;
            let spec = spec()?;
            let r = match a.weight {
                Some(r) => r,
                None => {
                    // the zCDP-optimal weight at the rho matching pure eps
                    let c = data.split_counts();
                    optimal_weight(c.n_priv, c.n_pub, spec, ZcdpBudget::new(eps * eps / 2.0)?, data.dim())?
                }
            };
            weighted_laplace_mean(&data, r, PrivacyBudget::pure(eps)?, spec, &mut rng)?
        }
        MeanMethod::SemiPrivunit => {
            let cfg = select_privunit_params(need(a.eps, "eps")?, data.dim())?;
            semi_privunit_mean(&data, &cfg, &mut rng)?
        }
    };
    print_vec(&est);
    Ok(())
}

fn run_train(a: TrainArgs) -> Result<()> {
    let data = bench::load_dataset(&a.data)?;
    let loss = LossModel::new(a.loss);
    let counts = data.split_counts();
    let default_iters = match a.method {
        Algorithm::SemiDpSgd => counts.n_priv / a.k_priv.max(1),
        Algorithm::DpSgd => data.len() / (a.k_priv + a.k_pub).max(1),
        _ => data.len(),
    };
    let cfg = SgdConfig {
        iterations: a.iterations.unwrap_or(default_iters),
        epochs: a.epochs,
        clip_c: a.clip_c,
        step_sizes: StepSchedule::Constant(a.step_size),
        k_priv: a.k_priv,
        k_pub: a.k_pub,
        alpha: a.alpha,
        noise_sigma2: a.noise_sigma2,
        domain_radius: a.domain_radius.unwrap_or(f64::INFINITY),
        warm_start: a.warm_start,
        rescale_public: !a.no_rescale_public,
        average_iterates: a.average_iterates,
        record_trace: false,
    };
    let stream = RngStream::new(a.seed, 1);
    let (weights, rho, eps, delta) = match a.method {
        Algorithm::Throwaway => (throwaway_erm(&data, &loss)?, None, 0.0, 0.0),
        Algorithm::SemiDpSgd | Algorithm::DpSgd => {
            let budget = zcdp(a.rho, a.eps, a.delta)?;
            let out = if a.method == Algorithm::SemiDpSgd {
                semi_dp_sgd(&data, &loss, &cfg, budget, &stream)?
            } else {
                dp_sgd_baseline(&data, &loss, &cfg, budget, &stream)?
            };
            let eps = out.approx_dp(a.delta)?.epsilon();
            (out.weights, out.rho, eps, a.delta)
        }
        Algorithm::SemiLdpSgd | Algorithm::LdpSgd => {
            let pu = select_privunit_params(need(a.eps, "eps")?, data.dim())?;
            let out = if a.method == Algorithm::SemiLdpSgd {
                semi_ldp_sgd(&data, &loss, &cfg, &pu, &stream)?
            } else {
                ldp_sgd_baseline(&data, &loss, &cfg, &pu, &stream)?
            };
            (out.weights, None, out.local_eps.unwrap_or(0.0), 0.0)
        }
    };
    let dump = ModelDump {
        algorithm: a.method.name().to_string(),
        config_hash: config_hash(&(a.method, a.loss, &cfg, a.eps, a.rho, a.delta, a.seed)),
        rho,
        epsilon: eps,
        delta,
        seed: a.seed,
        weights,
    };
    match a.output {
        Some(p) => std::fs::write(p, dump.to_text())?,
        None => print!("{}", dump.to_text()),
    }
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let cfg = ExperimentConfig::parse(&std::fs::read_to_string(&a.config)?)?;
    log::info!("running sweep from {}", a.config.display());
    let out = bench::run_experiment(&cfg)?;
    bench::emit_csv(&out.rows, &cfg.output)?;
    eprintln!("wrote {} rows to {}", out.rows.len(), cfg.output.display());
    if let Some(axis) = a.plot {
        let axis: XAxis = axis.parse()?;
        let path = cfg.output.with_extension("py");
        bench::emit_plot_script(&out.rows, axis, &path)?;
        eprintln!("wrote plot script {}", path.display());
    }
    Ok(())
}

fn run_rates(a: RatesArgs) -> Result<()> {
    let q = RateQuery {
        delta: a.delta,
        lipschitz: a.lipschitz,
        diameter: a.diameter,
        mu: a.mu,
        ..RateQuery::new(a.problem, a.eps, a.n_priv, a.n, a.d)
    };
    let bound = if a.lower { Bound::Lower } else { Bound::Upper };
    let r = rate(&q, bound)?;
    println!("{},{:?}", r.value, r.binding);
    Ok(())
}

fn run_audit(a: AuditArgs) -> Result<()> {
    let cfg = select_privunit_params(a.eps, a.dim)?;
    let report = privunit_audit(&cfg, a.claim.unwrap_or(a.eps), a.grid_size)?;
    print!("{}", report.to_csv_block());
    Ok(())
}

fn run_gen(a: GenArgs) -> Result<()> {
    let data = bench::gen_linreg(a.d, a.n_train, a.n_val, a.n_test, a.noise_std, a.ratio, &RngStream::new(a.seed, 0))?;
    std::fs::create_dir_all(&a.out_dir)?;
    let path = |name: &str| -> PathBuf { Path::new(&a.out_dir).join(name) };
    bench::save_dataset(&data.train, &path("train.csv"))?;
    bench::save_dataset(&data.val, &path("val.csv"))?;
    bench::save_dataset(&data.test, &path("test.csv"))?;
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PrivacyCalibration(_) => 2,
        Error::Io(_) | Error::Csv(_) => 3,
        Error::InvalidInput(_) | Error::OutOfRegime(_) | Error::Parse(_) => 1,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors count as invalid input; code 2 is reserved for privacy calibration
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.command {
        Command::Mean(a) => run_mean(a),
        Command::Train(a) => run_train(a),
        Command::Bench(a) => run_bench(a),
        Command::Rates(a) => run_rates(a),
        Command::AuditPrivunit(a) => run_audit(a),
        Command::GenLinreg(a) => run_gen(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
