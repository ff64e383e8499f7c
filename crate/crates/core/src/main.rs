use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riskspread::metrics::Position;
use riskspread::neural::FULL_RESTARTS;
use riskspread::pipeline::{self, DataConfig, PipelineConfig, PipelineError, RunDir, Stage};

#[derive(Parser)]
#[command(name = "riskspread", version, about = "Country-risk spread forecasting pipeline")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    restarts: Option<usize>,
    /// Use the full 5000 restarts per matrix.
    #[arg(long, conflicts_with = "restarts")]
    full_scale: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    members: Option<usize>,
    /// Comma-separated base set ids, e.g. `1,2,7`.
    #[arg(long, value_delimiter = ',')]
    base_sets: Option<Vec<u8>>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Run directory created by `preprocess` or `run`.
    #[arg(short, long)]
    run: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check the config and that every data file exists.
    Validate(ConfigArgs),
    /// Derive features and matrices into a new run directory.
    Preprocess(ConfigArgs),
    /// Train every matrix of a run.
    Train(RunArgs),
    /// Pick the ensemble members.
    Select(RunArgs),
    /// Train the master network and write the manifest.
    Master(RunArgs),
    /// Write reports for a finished run.
    Report(RunArgs),
    /// Forecast the month after the data ends.
    Predict {
        #[command(flatten)]
        run: RunArgs,
        /// CSV with `date, igaem, embi_vzla, embi_global, tbill` columns
        /// replacing the run's configured sources.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// All stages in order.
    Run(ConfigArgs),
}

fn load_config(a: &ConfigArgs) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if let Some(r) = a.restarts {
        cfg.train.restarts = r;
    }
    if a.full_scale {
        cfg.train.restarts = FULL_RESTARTS;
    }
    if let Some(s) = a.seed {
        cfg.train.rng_seed = s;
    }
    if let Some(c) = a.cycles {
        cfg.train.cycles = c;
    }
    if let Some(s) = a.split {
        cfg.train.split = s;
    }
    if let Some(m) = a.members {
        cfg.ensemble.members = m;
    }
    if let Some(ids) = &a.base_sets {
        cfg.base_sets.enabled = ids.clone();
    }
    if let Some(o) = &a.output_dir {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn open(a: &RunArgs, stage: Stage) -> Result<RunDir, PipelineError> {
    RunDir::open(&a.run).map_err(|c| PipelineError::new(stage, c))
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Validate(a) => {
            pipeline::validate(&load_config(&a)?)?;
            println!("config ok");
        }
        Command::Preprocess(a) => {
            let run = pipeline::preprocess_stage(&load_config(&a)?)?;
            println!("{}", run.path().display());
        }
        Command::Train(a) => {
            let c = pipeline::train_stage(&open(&a, Stage::Train)?)?;
            println!("trained {} networks", c.len());
        }
        Command::Select(a) => {
            for (rank, m) in pipeline::select_stage(&open(&a, Stage::Select)?)?.iter().enumerate() {
                println!("{:>3} {} ISM {}", rank + 1, m.label(), m.ism);
            }
        }
        Command::Master(a) => {
            let m = pipeline::master_stage(&open(&a, Stage::Master)?)?;
            println!("master ISM {} normEP {:?}", m.master.ism, m.master.norm_ep);
        }
        Command::Report(a) => {
            for p in pipeline::report_stage(&open(&a, Stage::Report)?)? {
                println!("{}", p.display());
            }
        }
        Command::Predict { run, data } => {
            let data = data.map(DataConfig::single_file);
            let p = pipeline::predict_stage(&open(&run, Stage::Predict)?, data.as_ref())?;
            let dir = match p.direction {
                Position::Long => "up",
                Position::Short => "down",
            };
            println!("{}: {:.4} ({dir} from {:.4})", p.month, p.value, p.last_actual);
            println!("members up: {} of {}", p.members_long, p.member_forecasts.len());
            for (label, v) in &p.member_forecasts {
                println!("  {label} {v:.4}");
            }
        }
        Command::Run(a) => {
            let out = pipeline::run_pipeline(&load_config(&a)?)?;
            println!("{}", out.run.path().display());
            println!("master ISM {} normEP {:?}", out.manifest.master.ism, out.manifest.master.norm_ep);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
