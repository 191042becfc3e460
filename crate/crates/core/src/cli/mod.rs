//! The `mtforge` command line.
//!
//! Exit codes: 0 on success, 1 when the input data is at fault, 2 for
//! usage and configuration problems (including paths that do not exist).

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::corpus::Direction;
use crate::error::Error;
pub use config::{PromptStyle, RunConfig, SNAPSHOT_FILE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mtforge",
    version,
    about = "Multilingual MT data engineering and evaluation"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration (a previous run's snapshot works too).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for data-parallel stages.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Run directory; created if missing.
    #[arg(long, global = true, default_value = "run")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenizer length ratios over an aligned corpus.
    Tokstats {
        /// Vocab asset; repeat to compare tokenizers.
        #[arg(long = "vocab")]
        vocabs: Vec<PathBuf>,
        /// Directory of line-aligned `<code>.txt` files.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Clean a parallel corpus.
    Clean {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        langid_samples: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Plan the pretraining mix for a per-language budget.
    PlanMix {
        /// Budget in billions of tokens.
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        availability: Option<PathBuf>,
    },
    /// Build the instruction-tuning set from scored candidates.
    BuildSft {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Nested random subsets to draw, e.g. `--sample 1000 --sample 5000`.
        #[arg(long = "sample")]
        sample_sizes: Vec<usize>,
    },
    /// Corpus spBLEU of line-aligned hypothesis and reference files.
    Score {
        #[arg(long)]
        hyp: Option<PathBuf>,
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// With --direction, also emit a score row for `aggregate`.
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        direction: Option<String>,
    },
    /// Average scores over direction groups.
    Aggregate {
        /// Score file (JSONL or table CSV); repeatable.
        #[arg(long = "in")]
        inputs: Vec<PathBuf>,
        #[arg(long = "system")]
        systems: Vec<String>,
        #[arg(long = "metric")]
        metrics: Vec<String>,
    },
    /// Render evaluation prompts.
    Prompt {
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long, value_enum)]
        style: Option<PromptStyle>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Tokstats { .. } => "tokstats",
            Command::Clean { .. } => "clean",
            Command::PlanMix { .. } => "plan-mix",
            Command::BuildSft { .. } => "build-sft",
            Command::Score { .. } => "score",
            Command::Aggregate { .. } => "aggregate",
            Command::Prompt { .. } => "prompt",
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownLanguage(_) | Error::InvalidDirection(_) => EXIT_CONFIG,
        Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => EXIT_CONFIG,
        _ => EXIT_DATA,
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("MTFORGE_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

/// Folds flags into the configuration; flags win.
fn resolve(cli: &Cli) -> crate::Result<RunConfig> {
    let mut cfg = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.global.seed {
        cfg.seed = s;
    }
    if cli.global.workers.is_some() {
        cfg.workers = cli.global.workers;
    }
    fn set<T: Clone>(slot: &mut Option<T>, v: &Option<T>) {
        if v.is_some() {
            *slot = v.clone();
        }
    }
    fn set_vec<T: Clone>(slot: &mut Vec<T>, v: &[T]) {
        if !v.is_empty() {
            *slot = v.to_vec();
        }
    }
    match &cli.command {
        Command::Tokstats { vocabs, input } => {
            set_vec(&mut cfg.tokstats.vocabs, vocabs);
            set(&mut cfg.tokstats.corpus, input);
        }
        Command::Clean {
            input,
            langid_samples,
            embeddings,
        } => {
            set(&mut cfg.clean.input, input);
            set(&mut cfg.clean.langid_samples, langid_samples);
            set(&mut cfg.clean.embeddings, embeddings);
        }
        Command::PlanMix { n, availability } => {
            set(&mut cfg.pfms.budget_billions, n);
            set(&mut cfg.pfms.availability, availability);
        }
        Command::BuildSft {
            input,
            sample_sizes,
        } => {
            set(&mut cfg.sft.input, input);
            set_vec(&mut cfg.sft.sample_sizes, sample_sizes);
        }
        Command::Score {
            hyp,
            reference,
            vocab,
            system,
            direction,
        } => {
            set(&mut cfg.score.hyp, hyp);
            set(&mut cfg.score.reference, reference);
            set(&mut cfg.score.vocab, vocab);
            set(&mut cfg.score.system, system);
            if let Some(d) = direction {
                cfg.score.direction = Some(d.parse::<Direction>()?);
            }
        }
        Command::Aggregate {
            inputs,
            systems,
            metrics,
        } => {
            set_vec(&mut cfg.eval.inputs, inputs);
            set_vec(&mut cfg.eval.systems, systems);
            set_vec(&mut cfg.eval.metrics, metrics);
        }
        Command::Prompt {
            dev,
            input,
            shots,
            style,
        } => {
            set(&mut cfg.prompt.dev, dev);
            set(&mut cfg.prompt.input, input);
            if let Some(k) = shots {
                cfg.prompt.shots = *k;
            }
            if let Some(s) = style {
                cfg.prompt.style = *s;
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> crate::Result<()> {
    let mut cfg = resolve(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let out = &cli.global.out;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    pool.install(|| commands::dispatch(&cli.command, &mut cfg, out))?;
    commands::write_file(&out.join(SNAPSHOT_FILE), &cfg.to_json())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("mtforge {}: {e}", cli.command.name());
            code
        }
    }
}
