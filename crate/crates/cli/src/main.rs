use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use curvlab_core::catalog::{lookup_metric, BUILTIN_NAMES};
use curvlab_core::classify::ToleranceModel;
use curvlab_core::exprlang::ParamEnv;
use curvlab_core::report::{emit_report, run_classify, structure_ids, MetricSource, ReportFormat, RunConfig};

#[derive(Parser)]
#[command(name = "curvlab", version, about = "Classify curvature-restricted structures of 4-dimensional metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a metric, run the structure tests and print a report.
    Classify(ClassifyArgs),
    /// List the built-in metrics and the structure ids a report contains.
    Metrics,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Built-in metric name.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    metric: Option<String>,
    /// Metric description in JSON.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Parameter overrides, `name=value` separated by commas.
    #[arg(long, value_name = "K=V,...")]
    params: Option<String>,
    /// Profile ξ(r) for cns_type.
    #[arg(long, requires = "h")]
    xi: Option<String>,
    /// Profile h(θ) for cns_type.
    #[arg(long, requires = "xi")]
    h: Option<String>,
    #[arg(long, default_value_t = 16)]
    points: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    tol_zero: Option<f64>,
    #[arg(long)]
    tol_fit: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    report: Format,
    /// Structure ids to run, comma separated; a trailing `*` matches a prefix.
    #[arg(long, value_delimiter = ',')]
    structures: Option<Vec<String>>,
}

fn parse_params(src: &str) -> Result<ParamEnv> {
    let mut env = ParamEnv::new();
    for item in src.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .with_context(|| format!("parameter `{item}` is not of the form name=value"))?;
        let value: f64 = v
            .trim()
            .parse()
            .with_context(|| format!("parameter `{}` has non-numeric value `{}`", k.trim(), v.trim()))?;
        if !value.is_finite() {
            bail!("parameter `{}` must be finite", k.trim());
        }
        env.set(k.trim(), value);
    }
    Ok(env)
}

fn config(a: ClassifyArgs) -> Result<(RunConfig, ReportFormat)> {
    let mut tolerances = ToleranceModel::default();
    if let Some(t) = a.tol_zero {
        tolerances.eps_zero = t;
    }
    if let Some(t) = a.tol_fit {
        tolerances.eps_fit = t;
    }
    let source = match (a.metric, a.file) {
        (Some(m), None) => MetricSource::Builtin(m),
        (None, Some(f)) => MetricSource::File(f),
        _ => bail!("give exactly one of --metric and --file"),
    };
    let cfg = RunConfig {
        source,
        params: a.params.as_deref().map(parse_params).transpose()?.unwrap_or_default(),
        profiles: a.xi.zip(a.h),
        points: a.points,
        seed: a.seed,
        tolerances,
        structures: a.structures,
    };
    let format = match a.report {
        Format::Json => ReportFormat::Json,
        Format::Text => ReportFormat::Text,
    };
    Ok((cfg, format))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Classify(args) => {
            let (cfg, format) = config(args)?;
            let report = run_classify(&cfg)?;
            print!("{}", emit_report(&report, format));
        }
        Command::Metrics => {
            for name in BUILTIN_NAMES {
                let spec = lookup_metric(name, &ParamEnv::new(), None)?;
                let params: Vec<String> = spec.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{name:<16} coords ({}) defaults [{}]", spec.coords.join(", "), params.join(", "));
            }
            let spec = lookup_metric("charged_nariai", &ParamEnv::new(), None)?;
            println!();
            println!("structures: {}", structure_ids(&spec).join(" "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
