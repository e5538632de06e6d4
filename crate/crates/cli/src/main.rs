mod commands;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "evalarena",
    version,
    about = "Evaluate instruction-following models with metrics and blind pairwise votes"
)]
struct Cli {
    /// Worker threads for scoring and permutation resampling.
    #[arg(long, global = true, env = "EVALARENA_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Args, Clone)]
pub struct OutputArgs {
    /// stdout rendering; files written with --output are CSV for `table` and
    /// JSON for `json`.
    #[arg(long, value_enum, default_value_t = Format::Table, env = "EVALARENA_FORMAT")]
    pub format: Format,
    /// Write the result to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct EloArgs {
    /// Log of votes, one JSON object per line.
    #[arg(long)]
    pub votes: PathBuf,
    /// Models to rate; defaults to every model that appears in the log.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    #[arg(long, default_value_t = 1000, env = "EVALARENA_PERMUTATIONS")]
    pub permutations: usize,
    #[arg(long, default_value_t = 0, env = "EVALARENA_SEED")]
    pub seed: u64,
    #[arg(long, default_value_t = 32.0)]
    pub k_factor: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub initial_rating: f64,
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
}

#[derive(Args, Clone)]
pub struct EmbedArgs {
    /// `stub` for the built-in hashing embedder, or the URL of an embedding
    /// service accepting `{"texts": [...]}`.
    #[arg(long, default_value = "stub", env = "EVALARENA_EMBEDDER")]
    pub embedder: String,
    /// Directory for the content-addressed embedding cache.
    #[arg(long, env = "EVALARENA_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum Method {
    #[default]
    Pearson,
    Spearman,
}

#[derive(Subcommand)]
enum Command {
    /// Keep finetune pairs whose quality score reaches the threshold.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.6)]
        threshold: f64,
        /// Quality scorer service; without it the stored `quality_score` is used.
        #[arg(long, env = "EVALARENA_SCORER_URL")]
        scorer_url: Option<String>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Concatenate finetune sets, prefixing ids with their source.
    Combine {
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Per-model cosine and ROUGE means against reference answers.
    Score {
        #[arg(long)]
        dataset: PathBuf,
        /// Directory of response files, one per model.
        #[arg(long)]
        responses: PathBuf,
        #[command(flatten)]
        embed: EmbedArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sequential and permutation Elo with confidence intervals.
    Elo {
        #[command(flatten)]
        elo: EloArgs,
        /// Also draw the rating intervals as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Share of votes in which each model won or both were judged good.
    Winpct {
        #[arg(long)]
        votes: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// WinPct per model and instruction category.
    Categories {
        #[arg(long)]
        votes: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Correlations between per-model metric columns.
    Correlate {
        #[arg(long)]
        v_dataset: PathBuf,
        #[arg(long)]
        v_responses: PathBuf,
        #[arg(long)]
        g_dataset: Option<PathBuf>,
        #[arg(long, requires = "g_dataset")]
        g_responses: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Pearson)]
        method: Method,
        #[command(flatten)]
        elo: EloArgs,
        #[command(flatten)]
        embed: EmbedArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the blind voting service.
    Serve {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        /// Durable vote log; created when missing and replayed on start.
        #[arg(long, env = "EVALARENA_VOTE_LOG")]
        log: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080", env = "EVALARENA_ADDR")]
        addr: SocketAddr,
        /// Shared token judges must send in the X-Judge-Token header.
        #[arg(long, env = "EVALARENA_JUDGE_TOKEN", hide_env_values = true)]
        token: Option<String>,
        #[arg(long, value_enum, default_value_t = Policy::Balanced)]
        policy: Policy,
        #[arg(long, default_value_t = 0, env = "EVALARENA_SEED")]
        seed: u64,
        /// Permutations for the live leaderboard intervals.
        #[arg(long, default_value_t = 200)]
        permutations: usize,
    },
    /// Every table, matrix and plot for one evaluation run.
    Report {
        #[arg(long)]
        v_dataset: PathBuf,
        #[arg(long)]
        v_responses: PathBuf,
        #[arg(long)]
        g_dataset: Option<PathBuf>,
        #[arg(long, requires = "g_dataset")]
        g_responses: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Pearson)]
        method: Method,
        #[command(flatten)]
        elo: EloArgs,
        #[command(flatten)]
        embed: EmbedArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Policy {
    Balanced,
    Uniform,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    match cli.command {
        Command::Filter {
            input,
            threshold,
            scorer_url,
            output,
        } => commands::filter(&input, threshold, scorer_url, &output),
        Command::Combine { inputs, output } => commands::combine(&inputs, &output),
        Command::Score {
            dataset,
            responses,
            embed,
            out,
        } => commands::score(&dataset, &responses, &embed, &out),
        Command::Elo { elo, svg, out } => commands::elo(&elo, svg.as_deref(), &out),
        Command::Winpct { votes, out } => commands::winpct(&votes, &out),
        Command::Categories {
            votes,
            dataset,
            svg,
            out,
        } => commands::categories(&votes, &dataset, svg.as_deref(), &out),
        Command::Correlate {
            v_dataset,
            v_responses,
            g_dataset,
            g_responses,
            method,
            elo,
            embed,
            out,
        } => {
            let inputs = commands::Inputs {
                v_dataset,
                v_responses,
                g: g_dataset.zip(g_responses),
            };
            commands::correlate(&inputs, method, &elo, &embed, &out)
        }
        Command::Serve {
            dataset,
            responses,
            log,
            addr,
            token,
            policy,
            seed,
            permutations,
        } => commands::serve(
            &dataset,
            &responses,
            &log,
            addr,
            token,
            policy,
            seed,
            permutations,
        ),
        Command::Report {
            v_dataset,
            v_responses,
            g_dataset,
            g_responses,
            method,
            elo,
            embed,
            out_dir,
        } => {
            let inputs = commands::Inputs {
                v_dataset,
                v_responses,
                g: g_dataset.zip(g_responses),
            };
            commands::report(&inputs, method, &elo, &embed, &out_dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = match cli.command {
        Command::Serve { .. } => "info",
        _ => "warn",
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("EVALARENA_LOG")
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level)),
        )
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": format!("{e:#}") });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
