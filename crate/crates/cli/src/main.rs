use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rbroc::config::AnalysisConfig;
use rbroc::elicitation::{elicit_beta, elicit_dp_concentration, elicit_normal_gamma};
use rbroc::registry::ModelRegistry;
use rbroc::{Result, RocError};

#[derive(Parser)]
#[command(name = "rbroc", version, about = "Relative belief inference for ROC analyses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Elicit prior hyperparameters.
    Elicit {
        #[command(subcommand)]
        target: ElicitTarget,
    },
    /// Analyze a diagnostic with finitely many values.
    AnalyzeDiscrete(RunArgs),
    /// Analyze a continuous diagnostic under the binormal model.
    AnalyzeBinormal(RunArgs),
    /// Analyze a continuous diagnostic under Dirichlet process priors.
    AnalyzeDp(RunArgs),
    /// Infer the prevalence from a whole-population sample.
    Prevalence(RunArgs),
}

#[derive(Subcommand)]
enum ElicitTarget {
    /// Beta prior for a prevalence in [lo, hi] with probability gamma.
    Beta {
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 0.99)]
        gamma: f64,
        /// Prior mode; defaults to the interval midpoint.
        #[arg(long)]
        mode: Option<f64>,
    },
    /// Normal-gamma prior from bounds on the means and standard deviations.
    NormalGamma {
        #[arg(long, allow_hyphen_values = true)]
        mean_lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        mean_hi: f64,
        #[arg(long)]
        sd_lo: f64,
        #[arg(long)]
        sd_hi: f64,
        #[arg(long, default_value_t = 0.99)]
        gamma: f64,
    },
    /// Smallest DP concentration whose deviation bound is below `bound`.
    Dp {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        bound: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file of flat key/value settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV data file.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Directory for report.json and curve CSVs; the report goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Any configuration key, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    emit(&serde_json::to_string_pretty(value)?)
}

fn elicit(target: ElicitTarget) -> Result<()> {
    match target {
        ElicitTarget::Beta { lo, hi, gamma, mode } => print_json(&elicit_beta(lo, hi, gamma, mode)?),
        ElicitTarget::NormalGamma {
            mean_lo,
            mean_hi,
            sd_lo,
            sd_hi,
            gamma,
        } => print_json(&elicit_normal_gamma(mean_lo, mean_hi, sd_lo, sd_hi, gamma)?),
        ElicitTarget::Dp { epsilon, bound } => print_json(&elicit_dp_concentration(epsilon, bound)?),
    }
}

fn analyze(model: &str, args: RunArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => AnalysisConfig::from_file(path)?,
        None => AnalysisConfig::default(),
    };
    for assignment in &args.set {
        config.assign(assignment)?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(draws) = args.draws {
        config.draws = draws;
    }
    if let Some(b) = args.batch_size {
        config.batch_size = b;
    }
    if !config.model.is_empty() && config.model != model {
        return Err(RocError::Config(format!(
            "config selects model {:?} but the subcommand runs {model:?}",
            config.model
        )));
    }
    config.model = model.to_string();

    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RocError::Config(format!("thread pool: {e}")))?;
    }

    let registry = ModelRegistry::default();
    let data = match &args.data {
        Some(path) => Some(registry.load_data(&config, path)?),
        None => None,
    };
    let mut report = registry.run(&config, data.as_ref())?;
    report.provenance.threads = Some(rayon::current_num_threads());
    report.provenance.data = args.data.as_ref().map(|p| p.display().to_string());

    match &args.out {
        Some(dir) => {
            for path in report.write_to_dir(dir)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        None => emit(&report.to_json()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Elicit { target } => elicit(target),
        Command::AnalyzeDiscrete(a) => analyze("discrete", a),
        Command::AnalyzeBinormal(a) => analyze("binormal", a),
        Command::AnalyzeDp(a) => analyze("dp", a),
        Command::Prevalence(a) => analyze("prevalence", a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
