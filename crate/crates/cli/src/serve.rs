use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Context;
use cfb_core::catalog::{CatalogStore, EnrichedVideo};
use cfb_core::events::Condition;
use cfb_core::relevance::{highlight_levels, query_vector, search_with_vector, DEFAULT_HIGHLIGHT_LEVELS};
use cfb_server::{AppState, Flags, ServerConfig, DEFAULT_SEARCH_LIMIT};
use clap::{Args, ValueEnum};

use crate::{AnnotatorArgs, AnnotatorMode, Outcome, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    CfbOn,
    CfbOff,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, env = "CFB_DATA_DIR")]
    pub data_dir: PathBuf,
    #[arg(long, env = "CFB_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Lexicon for query linking and definitions
    #[arg(long, env = "CFB_LEXICON")]
    pub lexicon: Option<PathBuf>,
    /// Link search queries remotely instead of with the lexicon
    #[arg(long, value_enum, default_value_t = AnnotatorMode::Local)]
    pub annotator: AnnotatorMode,
    #[arg(long, env = "CFB_REMOTE_ENDPOINT")]
    pub remote_endpoint: Option<String>,
    #[arg(long, env = "CFB_REMOTE_KEY", hide_env_values = true)]
    pub remote_key: Option<String>,
    /// Disable relevance shading unless a request asks for it
    #[arg(long)]
    pub no_highlighting: bool,
    /// Mode clients start in
    #[arg(long, value_enum, default_value_t = Mode::CfbOn)]
    pub default_mode: Mode,
    #[arg(long, default_value_t = DEFAULT_SEARCH_LIMIT)]
    pub search_limit: usize,
    #[arg(long, default_value_t = DEFAULT_HIGHLIGHT_LEVELS)]
    pub n_levels: usize,
}

pub fn run(args: ServeArgs) -> anyhow::Result<Outcome> {
    let annotator = AnnotatorArgs {
        annotator: args.annotator,
        lexicon: args.lexicon.clone(),
        remote_endpoint: args.remote_endpoint.clone(),
        remote_key: args.remote_key.clone(),
    };
    if args.annotator == AnnotatorMode::Remote {
        annotator.validate()?;
    }
    if args.n_levels < 2 {
        return Err(UsageError("--n-levels must be at least 2".into()).into());
    }
    if !args.data_dir.is_dir() {
        anyhow::bail!("data directory {} does not exist", args.data_dir.display());
    }
    let config = ServerConfig {
        data_dir: args.data_dir.clone(),
        lexicon: args.lexicon.clone(),
        remote: annotator.remote_config(),
        flags: Flags {
            default_mode: match args.default_mode {
                Mode::CfbOn => Condition::CfbOn,
                Mode::CfbOff => Condition::CfbOff,
            },
            highlighting: !args.no_highlighting,
            search_limit: args.search_limit,
            highlight_levels: args.n_levels,
        },
    };
    let state = AppState::open(&config)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener =
            tokio::net::TcpListener::bind(args.listen).await.with_context(|| format!("binding {}", args.listen))?;
        let addr = listener.local_addr()?;
        println!("listening on http://{addr}");
        std::io::stdout().flush()?;
        cfb_server::serve(state, listener, cfb_server::shutdown_signal()).await?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(Outcome::Success)
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    pub query: String,
    #[arg(long, env = "CFB_DATA_DIR")]
    pub data_dir: PathBuf,
    #[arg(long, env = "CFB_LEXICON")]
    pub lexicon: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEARCH_LIMIT)]
    pub limit: usize,
    #[arg(long, default_value_t = DEFAULT_HIGHLIGHT_LEVELS)]
    pub n_levels: usize,
    /// Print the ranked hits as JSON
    #[arg(long)]
    pub json: bool,
}

pub fn search(args: SearchArgs) -> anyhow::Result<Outcome> {
    if args.n_levels < 2 {
        return Err(UsageError("--n-levels must be at least 2".into()).into());
    }
    let lexicon = cfb_core::annotate::ConceptLexicon::load(&args.lexicon)
        .map_err(|e| anyhow::anyhow!("{}: {e}", args.lexicon.display()))?;
    let store = CatalogStore::open(&args.data_dir)?;
    let snapshot = store.snapshot();
    let videos: Vec<&EnrichedVideo> = snapshot.values().map(|v| v.as_ref()).collect();
    let hits = search_with_vector(&query_vector(&args.query, &lexicon), &videos, args.limit);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&hits)?);
        return Ok(Outcome::Success);
    }
    for (i, hit) in hits.iter().enumerate() {
        let levels: Vec<String> =
            highlight_levels(&hit.fragment_scores, args.n_levels).iter().map(|l| l.0.to_string()).collect();
        println!(
            "{:>3}. {:<24} {:.4}  [{}]  {}",
            i + 1,
            hit.video_id,
            hit.video_score,
            levels.join(""),
            snapshot[&hit.video_id].title
        );
    }
    Ok(Outcome::Success)
}
