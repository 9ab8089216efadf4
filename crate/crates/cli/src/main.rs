//! `cfb`: ingest transcripts, serve the API, search the catalog, analyze
//! interaction logs and simulate study sessions.
//!
//! Exit codes: 0 success, 1 failure (or partial failure), 2 usage error.

mod analyze;
mod ingest;
mod serve;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use cfb_core::annotate::{ConceptLexicon, RemoteConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cfb", version, about = "Content Flow Bar pipeline, API server and study analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enrich transcripts (.srt, .vtt, .txt with a `<name>.json` sidecar) into the catalog
    Ingest(ingest::IngestArgs),
    /// Serve the HTTP/JSON API
    Serve(serve::ServeArgs),
    /// Rank catalog videos for a query
    Search(serve::SearchArgs),
    /// Run the paired signed-rank analysis over event logs
    Analyze(analyze::AnalyzeArgs),
    /// Generate synthetic, schema-valid study logs
    Simulate(simulate::SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnnotatorMode {
    Local,
    Remote,
}

/// Options shared by every subcommand that links text to concepts.
#[derive(Args, Debug, Clone)]
pub struct AnnotatorArgs {
    /// Link concepts with the local lexicon or a remote annotation service
    #[arg(long, value_enum, default_value_t = AnnotatorMode::Local)]
    pub annotator: AnnotatorMode,
    /// Line-delimited JSON lexicon (surfaces, links, definitions)
    #[arg(long, env = "CFB_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, env = "CFB_REMOTE_ENDPOINT")]
    pub remote_endpoint: Option<String>,
    #[arg(long, env = "CFB_REMOTE_KEY", hide_env_values = true)]
    pub remote_key: Option<String>,
}

impl AnnotatorArgs {
    /// Checks that the flags the chosen mode needs are present.
    pub fn validate(&self) -> Result<(), UsageError> {
        match self.annotator {
            AnnotatorMode::Local if self.lexicon.is_none() => {
                Err(UsageError("--annotator local requires --lexicon".into()))
            }
            AnnotatorMode::Remote if self.remote_endpoint.is_none() || self.remote_key.is_none() => Err(UsageError(
                "--annotator remote requires --remote-endpoint and --remote-key (or CFB_REMOTE_ENDPOINT/CFB_REMOTE_KEY)"
                    .into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn remote_config(&self) -> Option<RemoteConfig> {
        match (self.annotator, &self.remote_endpoint, &self.remote_key) {
            (AnnotatorMode::Remote, Some(endpoint), Some(key)) => Some(RemoteConfig::new(endpoint, key)),
            _ => None,
        }
    }

    pub fn load_lexicon(&self) -> anyhow::Result<Option<ConceptLexicon>> {
        self.lexicon
            .as_ref()
            .map(|p| ConceptLexicon::load(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display())))
            .transpose()
    }
}

/// A flag combination that cannot work; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Outcome of a subcommand that ran to completion.
pub enum Outcome {
    Success,
    PartialFailure,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "cfb=info,cfb_server=info,warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => ingest::run(args),
        Command::Serve(args) => serve::run(args),
        Command::Search(args) => serve::search(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Simulate(args) => simulate::run(args),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::PartialFailure) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
