mod commands;
mod config;
mod error;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use omega_lab::{Method, SampleMode};

use config::CONFIG_KEYS;
use error::CliError;

pub const VERSION: &str = env!("OMEGA_LAB_VERSION");

#[derive(Parser)]
#[command(name = "omega-lab", version = VERSION, about = "Train and evaluate RNN recognizers of omega-regular languages given as DBAs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print state count, propositions, alphabet size, sinks and completeness
    Inspect {
        /// HOA file or fixture:NAME (fig1, gf_a, always_a, universal, cycle_K)
        automaton: String,
        /// Print JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Generate a labelled u$v dataset as JSON lines
    #[command(after_long_help = CONFIG_KEYS)]
    Sample {
        #[command(flatten)]
        common: Common,
        /// Number of records
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Overrides sampler.min_len
        #[arg(long)]
        min_len: Option<usize>,
        /// Overrides sampler.max_len
        #[arg(long)]
        max_len: Option<usize>,
        /// Overrides sampler.mode
        #[arg(long)]
        mode: Option<SampleMode>,
        /// Overrides sampler.seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output file [default: <out_dir>/datasets/<automaton>-<seed>.jsonl]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the labels of a dataset with one of the acceptance deciders
    Label {
        /// HOA file or fixture:NAME
        #[arg(long)]
        automaton: String,
        /// Dataset written by `sample`
        #[arg(long)]
        input: PathBuf,
        /// Decider: iterate, matexp or brute
        #[arg(long, default_value = "iterate")]
        method: Method,
        /// Output file [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one RNN per seed and evaluate it on the length grid
    #[command(after_long_help = CONFIG_KEYS)]
    Train {
        #[command(flatten)]
        common: Common,
        /// Training seed; repeat for several runs. Overrides `seeds`
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        /// Overrides train.steps
        #[arg(long)]
        steps: Option<usize>,
        /// Overrides train.hidden
        #[arg(long)]
        hidden: Option<usize>,
        /// Overrides train.batch
        #[arg(long)]
        batch: Option<usize>,
        /// Overrides train.train_max_len
        #[arg(long)]
        train_max_len: Option<usize>,
        /// Overrides eval.max_len
        #[arg(long)]
        eval_max_len: Option<usize>,
        /// Overrides eval.per_length_count
        #[arg(long)]
        per_length_count: Option<usize>,
    },
    /// Score a checkpoint on the length grid
    #[command(after_long_help = CONFIG_KEYS)]
    Eval {
        #[command(flatten)]
        common: Common,
        /// checkpoint.json written by `train`
        #[arg(long)]
        checkpoint: PathBuf,
        /// Overrides eval.max_len
        #[arg(long)]
        eval_max_len: Option<usize>,
        /// Overrides eval.per_length_count
        #[arg(long)]
        per_length_count: Option<usize>,
        /// Per-length CSV [default: next to the checkpoint, eval_accuracy.csv]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlate state count with OOD accuracy and with parameter norm
    Correlate {
        /// run.json files, or directories searched for them
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Reports go to <out_dir>/reports
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Category table plus validation and range curves over several runs
    Report {
        /// run.json files, or directories searched for them
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Reports go to <out_dir>/reports
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
pub struct Common {
    /// JSON config file (keys listed below)
    #[arg(long)]
    config: Option<PathBuf>,
    /// HOA file or fixture:NAME. Overrides `automaton`
    #[arg(long)]
    automaton: Option<String>,
    /// Overrides `out_dir`
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Set any config key, e.g. --set train.l2_weight=0.001 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("OMEGA_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::config(format!("OMEGA_LAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(CliError::runtime)
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Inspect { automaton, json } => commands::inspect(&automaton, json),
        Command::Sample {
            common,
            count,
            min_len,
            max_len,
            mode,
            seed,
            out,
        } => {
            let mut set = common.set.clone();
            push(&mut set, "sampler.min_len", min_len);
            push(&mut set, "sampler.max_len", max_len);
            push(&mut set, "sampler.mode", mode.map(|m| if m == SampleMode::Uniform { "uniform" } else { "balanced" }));
            push(&mut set, "sampler.seed", seed);
            commands::sample(&common.resolve(set)?, count, out)
        }
        Command::Label {
            automaton,
            input,
            method,
            out,
        } => commands::label(&automaton, &input, method, out.as_deref()),
        Command::Train {
            common,
            seeds,
            steps,
            hidden,
            batch,
            train_max_len,
            eval_max_len,
            per_length_count,
        } => {
            let mut set = common.set.clone();
            if !seeds.is_empty() {
                set.push(format!("seeds={}", serde_json::to_string(&seeds).unwrap()));
            }
            push(&mut set, "train.steps", steps);
            push(&mut set, "train.hidden", hidden);
            push(&mut set, "train.batch", batch);
            push(&mut set, "train.train_max_len", train_max_len);
            push(&mut set, "eval.max_len", eval_max_len);
            push(&mut set, "eval.per_length_count", per_length_count);
            commands::train(&common.resolve(set)?)
        }
        Command::Eval {
            common,
            checkpoint,
            eval_max_len,
            per_length_count,
            out,
        } => {
            let mut set = common.set.clone();
            push(&mut set, "eval.max_len", eval_max_len);
            push(&mut set, "eval.per_length_count", per_length_count);
            commands::eval(&common.resolve(set)?, &checkpoint, out)
        }
        Command::Correlate { runs, out_dir } => commands::correlate(&runs, &out_dir),
        Command::Report { runs, out_dir } => commands::report(&runs, &out_dir),
    }
}

fn push<T: ToString>(set: &mut Vec<String>, key: &str, value: Option<T>) {
    if let Some(v) = value {
        let v = v.to_string();
        let json = if v.parse::<f64>().is_ok() { v } else { serde_json::to_string(&v).unwrap() };
        set.push(format!("{key}={json}"));
    }
}

impl Common {
    fn resolve(&self, mut set: Vec<String>) -> Result<config::RunConfig, CliError> {
        if let Some(a) = &self.automaton {
            set.push(format!("automaton={}", serde_json::to_string(a).unwrap()));
        }
        if let Some(d) = &self.out_dir {
            set.push(format!("out_dir={}", serde_json::to_string(d).unwrap()));
        }
        let cfg = config::RunConfig::load(self.config.as_deref(), &set)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
