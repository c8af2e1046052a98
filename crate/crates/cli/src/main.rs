mod commands;
mod config;
mod error;
mod output;
mod pipeline;
mod synth_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use crate::commands::{GapOptions, NudgeOptions};
use crate::config::Overrides;
use crate::error::CliError;
use crate::output::Sink;
use crate::pipeline::Pipeline;
use crate::synth_cmd::SynthOptions;

/// Tourism demand pipeline: ingest sensor, weather, intent and survey data,
/// model visitor counts, and value weather-suppressed demand.
#[derive(Debug, Parser)]
#[command(name = "dhde", version)]
struct Cli {
    /// TOML configuration file [default: $DHDE_CONFIG, then ./dhde.toml]
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory; overrides `output_dir`
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Master seed; overrides `seed`
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Yen per US dollar; overrides `economics.fx_yen_per_usd`
    #[arg(long, global = true, value_name = "YEN")]
    fx: Option<f64>,

    /// Per-capita spend in yen; overrides the survey-derived figure
    #[arg(long, global = true, value_name = "YEN")]
    spend: Option<f64>,

    /// Restrict to one node; repeat for several
    #[arg(long = "node", global = true, value_name = "ID")]
    nodes: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic fixtures, a survey, band and ranking tables, and a config
    Synth(SynthArgs),
    /// Join counts, weather and intent into per-node daily panels
    Ingest,
    /// Build the engineered design matrix per node
    Features,
    /// OLS with Newey-West errors, standardized betas and a chronological hold-out
    Fit,
    /// Unit roots, VIF, alternative specifications and weather ablation
    Diagnose,
    /// Random forest cross-validation and permutation importance
    Forest,
    /// Keyword prevalence by satisfaction group and satisfaction-density correlation
    Mine,
    /// Opportunity gap from suppressed visits
    Gap(GapArgs),
    /// Cross-correlation of intent and visitor counts
    Ccf(CcfArgs),
    /// Monthly ranking with recovered visitors
    Rank(RankArgs),
    /// Merchant alerts and weather-resilient reroutes
    Nudge(NudgeArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Directory for fixtures and the generated config
    #[arg(long, value_name = "DIR", default_value = synth_cmd::default_dir().as_os_str())]
    dir: PathBuf,
    /// Days per node
    #[arg(long, default_value_t = 400)]
    days: usize,
    /// First simulated day (YYYY-MM-DD)
    #[arg(long, value_name = "DATE")]
    start: Option<NaiveDate>,
}

#[derive(Debug, Args)]
struct GapArgs {
    /// Use flagged days from a CSV `node,date,residual` instead of the model
    #[arg(long, value_name = "FILE")]
    flagged: Option<PathBuf>,
    /// Observation window per node for --flagged
    #[arg(long, default_value_t = 365, requires = "flagged")]
    observed_days: usize,
    /// Reported total in yen to reconcile against
    #[arg(long, value_name = "YEN")]
    reference_yen: Option<u64>,
}

#[derive(Debug, Args)]
struct CcfArgs {
    /// Largest lag in days
    #[arg(long)]
    max_lag: Option<usize>,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// Annual recovered visitors; computed from the gap when absent
    #[arg(long, value_name = "VISITORS")]
    recovered: Option<f64>,
}

#[derive(Debug, Args)]
struct NudgeArgs {
    /// Forecast CSV `node,date,visitors,intent[,severity]`; hindcasts when absent
    #[arg(long, value_name = "FILE")]
    forecast: Option<PathBuf>,
    /// Issue date (YYYY-MM-DD)
    #[arg(long, value_name = "DATE")]
    issued: Option<NaiveDate>,
}

fn run(cli: Cli) -> Result<Sink, CliError> {
    if let Command::Synth(a) = &cli.command {
        let seed = cli.seed.unwrap_or(synth_cmd::DEFAULT_SEED);
        if a.days < 60 {
            return Err(CliError::Usage(format!("--days {} is below the 60-day minimum", a.days)));
        }
        return synth_cmd::synth(&SynthOptions {
            dir: a.dir.clone(),
            seed,
            days: a.days,
            start: a.start,
        });
    }
    let overrides = Overrides {
        seed: cli.seed,
        output_dir: cli.output_dir.clone(),
        fx: cli.fx,
        spend: cli.spend,
    };
    let loaded = config::load(cli.config.as_deref(), &overrides)?;
    let p = Pipeline::new(loaded, cli.nodes.clone())?;
    match cli.command {
        Command::Synth(_) => unreachable!("handled above"),
        Command::Ingest => commands::ingest(&p),
        Command::Features => commands::features(&p),
        Command::Fit => commands::fit(&p),
        Command::Diagnose => commands::diagnose(&p),
        Command::Forest => commands::forest(&p),
        Command::Mine => commands::mine(&p),
        Command::Gap(a) => commands::gap(
            &p,
            &GapOptions {
                flagged: a.flagged,
                observed_days: a.observed_days,
                reference_yen: a.reference_yen,
            },
        ),
        Command::Ccf(a) => commands::ccf_cmd(&p, a.max_lag),
        Command::Rank(a) => commands::rank(&p, a.recovered),
        Command::Nudge(a) => commands::nudge(
            &p,
            &NudgeOptions {
                forecast: a.forecast,
                issued: a.issued,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let err = CliError::Usage(e.kind().to_string());
            eprintln!("{}", err.record());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(sink) => {
            for p in sink.written() {
                let name = p.strip_prefix(sink.dir()).unwrap_or(p);
                println!("wrote {}", name.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let CliError::Config(problems) = &e {
                for p in problems {
                    eprintln!("config: {p}");
                }
            }
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flag_is_rejected() {
        assert!(Cli::try_parse_from(["dhde", "fit", "--bogus"]).is_err());
    }
}
