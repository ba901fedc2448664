use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mslm_core::analysis::run_test;
use mslm_core::dataset::ingest;
use mslm_core::hypothesis::{HypothesisError, HypothesisSpec};
use mslm_core::model::{fit_all, fit_group};
use mslm_core::montecarlo::{self, FamilyKind, SimConfig};
use mslm_core::report;
use mslm_core::Error;

#[derive(Parser)]
#[command(name = "mslm", version, about = "Parallelism, common-intercept and concurrence tests for multivariate simple linear models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every group and print the estimates and pooled error SSCP.
    Fit {
        /// CSV with header group,x,y1,...,yq.
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test a cross-group hypothesis with Wilks, Roy, Pillai and Lawley-Hotelling.
    Test {
        input: PathBuf,
        /// parallelism | intercept | concurrent[:<x0>] | linear[:<a>,<b>]
        #[arg(long)]
        hypothesis: String,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Observed points and fitted-line endpoints for plotting.
    PlotData {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: PlotFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo size/power under several error families (JSON output).
    Simulate {
        /// JSON simulation config; defaults to the built-in two-group null design.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Error family (repeatable): gaussian, t:<dof>, contaminated:<eps>,<scale>.
        #[arg(long = "family")]
        families: Vec<String>,
        #[arg(long)]
        hypothesis: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_hypothesis(
    text: &str,
    x0: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
) -> Result<HypothesisSpec, Error> {
    let lowered = text.trim().to_ascii_lowercase();
    let spec = match (lowered.as_str(), x0, a, b) {
        ("concurrent", Some(x0), None, None) => HypothesisSpec::ConcurrentAt(x0),
        ("linear", None, Some(a), Some(b)) => HypothesisSpec::Linear(a, b),
        (_, None, None, None) => text.parse()?,
        _ => return Err(HypothesisError::Parse(format!(
            "{text} (use --x0 only with 'concurrent' and --a/--b only with 'linear')"
        ))
        .into()),
    };
    spec.validate()?;
    Ok(spec)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| {
            Error::Data(mslm_core::dataset::DataError::Io {
                path: path.display().to_string(),
                source,
            })
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Fit { input, format, out } => {
            let data = ingest(&input)?;
            let models = fit_all(&data.groups)?;
            let text = match format {
                ReportFormat::Text => report::fit_text(&models, &data.response_names),
                ReportFormat::Json => pretty(&report::fit_json(&models, &data.response_names)),
            };
            emit(out.as_deref(), &text)
        }
        Command::Test {
            input,
            hypothesis,
            x0,
            a,
            b,
            alpha,
            format,
            out,
        } => {
            let spec = resolve_hypothesis(&hypothesis, x0, a, b)?;
            let data = ingest(&input)?;
            let models = fit_all(&data.groups)?;
            let outcome = run_test(&models, &spec, alpha)?;
            let text = match format {
                ReportFormat::Text => report::test_text(&models, &outcome, &data.response_names)?,
                ReportFormat::Json => {
                    pretty(&report::test_json(&models, &outcome, &data.response_names)?)
                }
            };
            emit(out.as_deref(), &text)
        }
        Command::PlotData { input, format, out } => {
            let data = ingest(&input)?;
            let fits = data
                .groups
                .iter()
                .map(fit_group)
                .collect::<Result<Vec<_>, _>>()?;
            let series = report::plot_series(&data, &fits);
            let text = match format {
                PlotFormat::Csv => report::plot_csv(&series),
                PlotFormat::Json => pretty(&report::plot_json(&series)),
            };
            emit(out.as_deref(), &text)
        }
        Command::Simulate {
            config,
            reps,
            seed,
            families,
            hypothesis,
            alpha,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|source| {
                        Error::Data(mslm_core::dataset::DataError::Io {
                            path: path.display().to_string(),
                            source,
                        })
                    })?;
                    SimConfig::from_json(&text)?
                }
                None => SimConfig::null_two_groups(),
            };
            if let Some(r) = reps {
                cfg.replications = r;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if !families.is_empty() {
                cfg.families = families
                    .iter()
                    .map(|f| f.parse::<FamilyKind>())
                    .collect::<Result<_, _>>()?;
            }
            if let Some(h) = hypothesis {
                cfg.hypothesis = h.parse()?;
            }
            if let Some(a) = alpha {
                cfg.alpha = a;
            }
            let result = montecarlo::run(&cfg)?;
            let value = report::round_json(serde_json::to_value(&result).expect("serializable"));
            emit(out.as_deref(), &pretty(&value))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.code());
            ExitCode::from(1)
        }
    }
}
