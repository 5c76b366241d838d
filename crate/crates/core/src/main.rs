use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stratified_sparse::harness::{
    compare_runs, diff_table, parse_ini, parse_override, read_report, run_experiment, ExperimentConfig,
};
use stratified_sparse::Result;

/// Sparse domination experiments on finite stratified group models.
#[derive(Parser)]
#[command(name = "stratified-sparse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Group size, homogeneous dimension, quasi-triangle constant and ball growth.
    Group(RunArgs),
    /// Eigenvalues of the sublaplacian.
    Spectrum(RunArgs),
    /// Heat kernel and its Gaussian fit.
    Heat(RunArgs),
    /// Plancherel identity for every multiplier in use.
    Spectral(RunArgs),
    /// Class membership table and telescoping checks.
    MultiplierCheck(RunArgs),
    /// Norms of frequency and spatial pieces and their slopes.
    Decay(RunArgs),
    /// Riesz mean scalars.
    Riesz(RunArgs),
    /// Dispersive propagator norms and group property.
    Dispersive(RunArgs),
    /// Dyadic grid families and their verification.
    Grids(RunArgs),
    /// Random-trial sparse domination ratios.
    SparseCheck(RunArgs),
    /// Muckenhoupt and reverse Hölder characteristics of power weights.
    Weights(RunArgs),
    /// Weighted norm sweep against characteristic ceilings.
    Quantitative(RunArgs),
    /// Row-by-row comparison of two reports of the same suite.
    Compare {
        /// First report (directory or report.csv).
        a: PathBuf,
        /// Second report.
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (`key = value` under `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set sparse.r1=1.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    s0: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    r1: Option<String>,
    #[arg(long)]
    r2: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Weight exponents (comma separated).
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// Weighted mode: i, ii or iii.
    #[arg(long)]
    mode: Option<String>,
    /// Riesz order.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Time (comma separated for the dispersive suite).
    #[arg(long)]
    t: Option<String>,
}

impl RunArgs {
    /// Overrides in application order: suite flags first, then `--set`.
    fn overrides(&self, suite: &str) -> Result<Vec<(String, String)>> {
        let time_key = match suite {
            "dispersive" => "dispersive.t",
            "heat" | "spectral" => "heat.t",
            _ => "riesz.t",
        };
        let alpha_key = if suite == "dispersive" { "dispersive.alpha" } else { "riesz.alpha" };
        let beta_key = if suite == "dispersive" { "dispersive.beta" } else { "multiplier.beta" };
        let flags: [(&str, &Option<String>); 16] = [
            ("model.kind", &self.model),
            ("model.s0", &self.s0),
            ("scales.mu", &self.mu),
            ("multiplier.theta", &self.theta),
            (beta_key, &self.beta),
            ("sparse.r1", &self.r1),
            ("sparse.r2", &self.r2),
            ("run.trials", &self.trials),
            ("run.seed", &self.seed),
            ("weights.a", &self.a),
            ("weights.p", &self.p),
            ("weights.q", &self.q),
            ("weights.mode", &self.mode),
            ("riesz.k", &self.k),
            (alpha_key, &self.alpha),
            (time_key, &self.t),
        ];
        let mut out: Vec<(String, String)> =
            flags.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
        for s in &self.set {
            out.push(parse_override(s)?);
        }
        Ok(out)
    }

    fn config(&self, suite: &str) -> Result<ExperimentConfig> {
        let overrides = self.overrides(suite)?;
        match &self.config {
            Some(path) => ExperimentConfig::from_file(path, &overrides),
            None => ExperimentConfig::resolve(&parse_ini("")?, &overrides),
        }
    }
}

fn run(suite: &str, args: &RunArgs) -> Result<bool> {
    let cfg = args.config(suite)?;
    let report = run_experiment(suite, &cfg)?;
    report.write(&args.out)?;
    print!("{}", report.summary());
    Ok(report.passed())
}

fn compare(a: &Path, b: &Path, out: Option<&PathBuf>) -> Result<bool> {
    let (ra, rb) = (read_report(a)?, read_report(b)?);
    let rows = compare_runs(&ra, &rb)?;
    let table = diff_table(&rows);
    let header =
        format!("# schema=1 suite={} config_hash_a={} config_hash_b={}\n", ra.suite, ra.config_hash, rb.config_hash);
    let text = format!("{header}{}", table.body());
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("compare.csv"), &text)?;
        }
        None => print!("{text}"),
    }
    Ok(rows.iter().all(|r| r.status == "same"))
}

fn configure_threads() {
    if let Some(n) = std::env::var("STRATIFIED_SPARSE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compare { a, b, out } => compare(a, b, out.as_ref()),
        Command::Group(x) => run("group", x),
        Command::Spectrum(x) => run("spectrum", x),
        Command::Heat(x) => run("heat", x),
        Command::Spectral(x) => run("spectral", x),
        Command::MultiplierCheck(x) => run("multiplier-check", x),
        Command::Decay(x) => run("decay", x),
        Command::Riesz(x) => run("riesz", x),
        Command::Dispersive(x) => run("dispersive", x),
        Command::Grids(x) => run("grids", x),
        Command::SparseCheck(x) => run("sparse-check", x),
        Command::Weights(x) => run("weights", x),
        Command::Quantitative(x) => run("quantitative", x),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
