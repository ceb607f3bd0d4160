use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use covshift_core::aggregation::{aggregate, build_candidates, g_tilde, gram_tilde, GammaL};
use covshift_core::harness::{fit_rate, report, run_sweep_to, theoretical_exponent, ExperimentConfig, Independent, TheoryParams};
use covshift_core::io::{format_point_values, linear_grid, parse_grid, read_model, read_samples, write_model};
use covshift_core::iwrls::{estimated_weights, fit, WeightVector};
use covshift_core::rn_estimator::estimate_beta;
use covshift_core::source_theory::{geometric_grid, lambda_big_mn, IndexFunction};
use covshift_core::{Error, FilterSpec, KernelSpec, Result, SampleSet};

#[derive(Parser)]
#[command(name = "covshift", version, about = "Kernel regression under covariate shift with spectral regularization")]
struct Cli {
    /// Worker threads (defaults to COVSHIFT_THREADS, then the number of cores).
    #[arg(long, global = true, env = "COVSHIFT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the density ratio d rho_T / d rho_S from two samples.
    Ratio(RatioArgs),
    /// Weighted regularized regression.
    Fit(FitArgs),
    /// Aggregate fits over a grid of regularization parameters.
    Aggregate(AggregateArgs),
    /// Run an experiment sweep from a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Log-log slope of a measure in a sweep CSV.
    Rates {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        measure: String,
        /// `mn` or `MN`.
        #[arg(long)]
        independent: Independent,
        #[command(flatten)]
        theory: TheoryArgs,
    },
    /// Summary table and gnuplot script for a sweep CSV.
    Report {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        theory: TheoryArgs,
    },
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long, default_value = "power:1")]
    phi: IndexFunction,
    #[arg(long, default_value = "power:1")]
    phi_beta: IndexFunction,
    #[arg(long, default_value = "power:0.5")]
    xi: IndexFunction,
}

impl TheoryArgs {
    fn params(&self) -> TheoryParams {
        TheoryParams { phi: self.phi, phi_beta: self.phi_beta, xi: self.xi }
    }
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long)]
    kernel: KernelSpec,
    #[arg(long, default_value = "tikhonov")]
    filter: FilterSpec,
    /// A positive number, or `schedule` for the size-based rule.
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Equispaced evaluation grid `a:b:k`.
    #[arg(long, allow_hyphen_values = true)]
    eval_grid: String,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "power:1")]
    phi_beta: IndexFunction,
    #[arg(long, default_value = "power:0.5")]
    xi: IndexFunction,
}

#[derive(Args)]
struct RegressionInputs {
    #[arg(long)]
    kernel: KernelSpec,
    /// Labeled CSV, last column is the label.
    #[arg(long)]
    train: PathBuf,
    /// `exact:<csv>`, `embedded` or `uniform`.
    #[arg(long, default_value = "uniform")]
    weights: String,
    #[arg(long)]
    rn_source: Option<PathBuf>,
    #[arg(long)]
    rn_target: Option<PathBuf>,
    #[arg(long, default_value = "tikhonov")]
    filter: FilterSpec,
    #[arg(long, default_value = "itik:3")]
    rn_filter: FilterSpec,
    #[arg(long)]
    rn_lambda: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    inputs: RegressionInputs,
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    eval_grid: Option<String>,
    /// CSV for the evaluation grid (stdout when absent).
    #[arg(long)]
    eval_out: Option<PathBuf>,
}

#[derive(Args)]
struct AggregateArgs {
    #[command(flatten)]
    inputs: RegressionInputs,
    /// Geometric grid `a:b:k`.
    #[arg(long, default_value = "1e-8:1:12")]
    lambda_grid: String,
    #[arg(long, default_value = "auto")]
    gamma_l: GammaL,
    #[arg(long)]
    target_unlabeled: PathBuf,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    /// JSON-lines diagnostics (stdout when absent).
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn grid_points(spec: &str) -> Result<SampleSet> {
    let (a, b, k) = parse_grid(spec)?;
    SampleSet::from_scalars(linear_grid(a, b, k), 0)
}

fn write_values(out: Option<&Path>, header: &str, points: &SampleSet, values: &[f64]) -> Result<()> {
    emit(out, &format_point_values(header, points, values))
}

fn ratio(a: RatioArgs) -> Result<()> {
    let source = read_samples(&a.source, false)?;
    let target = read_samples(&a.target, false)?;
    let lambda = if a.lambda.trim() == "schedule" {
        let c = a.kernel.kappa0().powi(2);
        lambda_big_mn(&a.phi_beta.with_domain(c)?, &a.xi.with_domain(c)?, target.len(), source.len())?
    } else {
        a.lambda
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad --lambda '{}' (number or schedule)", a.lambda)))?
    };
    log::info!("ratio estimate with lambda = {lambda}");
    let est = estimate_beta(&source, &target, &a.kernel, a.filter, lambda)?;
    let grid = grid_points(&a.eval_grid)?;
    write_values(a.out.as_deref(), "x,beta_hat", &grid, &est.function.values(&grid)?)
}

fn weights_for(inp: &RegressionInputs, train: &SampleSet) -> Result<WeightVector> {
    let w = inp.weights.trim();
    if w == "uniform" {
        return Ok(WeightVector::uniform(train.len()));
    }
    if let Some(path) = w.strip_prefix("exact:") {
        let values = read_samples(Path::new(path), false)?;
        if values.dim() != 1 || values.len() != train.len() {
            return Err(Error::Data(format!(
                "{path}: expected one weight column with {} rows, got {} columns and {} rows",
                train.len(),
                values.dim(),
                values.len()
            )));
        }
        return WeightVector::exact(values.coords().to_vec()).map_err(|e| Error::Data(e.to_string()));
    }
    if w == "embedded" {
        let (Some(src), Some(tgt)) = (&inp.rn_source, &inp.rn_target) else {
            return Err(Error::Config("--weights embedded needs --rn-source and --rn-target".into()));
        };
        let source = read_samples(src, false)?;
        let target = read_samples(tgt, false)?;
        let lambda_rn = match inp.rn_lambda {
            Some(l) => l,
            None => {
                let c = inp.kernel.kappa0().powi(2);
                let p = |s: &str| -> Result<IndexFunction> { s.parse::<IndexFunction>()?.with_domain(c) };
                lambda_big_mn(&p("power:1")?, &p("power:0.5")?, target.len(), source.len())?
            }
        };
        return estimated_weights(train, &source, &target, &inp.kernel, inp.rn_filter, lambda_rn);
    }
    Err(Error::Config(format!("bad --weights '{w}' (exact:<csv>, embedded or uniform)")))
}

fn fit_cmd(a: FitArgs) -> Result<()> {
    let train = read_samples(&a.inputs.train, true)?;
    let w = weights_for(&a.inputs, &train)?;
    let r = fit(&train, &w, &a.inputs.kernel, a.inputs.filter, a.lambda)?;
    write_model(&a.out, &r.function)?;
    log::info!("fitted with lambda = {}, rkhs norm = {}", r.lambda, r.rkhs_norm);
    if let Some(g) = &a.eval_grid {
        let grid = grid_points(g)?;
        let model = read_model(&a.out)?;
        write_values(a.eval_out.as_deref(), "x,f_hat", &grid, &model.values(&grid)?)?;
    }
    Ok(())
}

fn aggregate_cmd(a: AggregateArgs) -> Result<()> {
    let train = read_samples(&a.inputs.train, true)?;
    let unlabeled = read_samples(&a.target_unlabeled, false)?;
    let w = weights_for(&a.inputs, &train)?;
    let (lo, hi, k) = parse_grid(&a.lambda_grid)?;
    let grid = geometric_grid(lo, hi, k).map_err(|e| Error::Config(e.to_string()))?;
    let cands = build_candidates(&train, &w, &a.inputs.kernel, a.inputs.filter, &grid, a.gamma_l)?;
    let gram = gram_tilde(&cands, &unlabeled)?;
    let g = g_tilde(&cands, &train, w.values())?;
    let agg = aggregate(&cands, gram, g)?;
    write_model(&a.out, &agg.function)?;
    let mut lines = String::new();
    let mut kept = 0;
    for (k, (lambda, norm)) in cands.all.iter().enumerate() {
        let retained = !cands.discarded.contains(&k);
        let c = retained.then(|| {
            kept += 1;
            agg.coefficients[kept - 1]
        });
        let rec = json!({
            "lambda_k": lambda,
            "norm_k": norm,
            "kept": retained,
            "c_k": c,
            "solver_note": agg.solver_note,
        });
        lines.push_str(&rec.to_string());
        lines.push('\n');
    }
    emit(a.diagnostics.as_deref(), &lines)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot set up {t} threads: {e}")))?;
    }
    match cli.command {
        Command::Ratio(a) => ratio(a),
        Command::Fit(a) => fit_cmd(a),
        Command::Aggregate(a) => aggregate_cmd(a),
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let rows = run_sweep_to(&cfg, &out)?;
            log::info!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
        Command::Rates { csv, measure, independent, theory } => {
            let rows = covshift_core::harness::read_rows(&csv)?;
            let f = fit_rate(&rows, &measure, independent)?;
            let predicted = theoretical_exponent(&measure, &theory.phi, &theory.phi_beta, &theory.xi);
            let rec = json!({
                "measure": f.measure,
                "independent": f.independent,
                "slope": f.slope,
                "stderr": f.stderr,
                "intercept": f.intercept,
                "theoretical_exponent": predicted,
                "points": f.points,
            });
            println!("{}", serde_json::to_string_pretty(&rec).expect("serializable"));
            Ok(())
        }
        Command::Report { csv, out_dir, theory } => {
            let files = report(&csv, &out_dir, &theory.params())?;
            println!("{}", files.summary.display());
            if let Some(p) = files.plot_script {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
