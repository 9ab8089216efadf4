use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use cfb_core::annotate::{AnnotateConfig, RemoteAnnotator, DEFAULT_TOP_K};
use cfb_core::catalog::{ingest_video, Annotator, CatalogStore, IngestConfig, VideoMetadata};
use cfb_core::fragment::DEFAULT_TARGET_CHARS;
use cfb_core::transcript::TranscriptFormat;
use clap::Args;
use tokio::task::JoinSet;

use crate::{AnnotatorArgs, AnnotatorMode, Outcome};

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Transcript files or directories containing them
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[arg(long, env = "CFB_DATA_DIR")]
    pub data_dir: PathBuf,
    #[command(flatten)]
    pub annotator: AnnotatorArgs,
    /// Concepts kept per fragment
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    pub top_k: usize,
    /// Target fragment length in characters
    #[arg(long, default_value_t = DEFAULT_TARGET_CHARS)]
    pub target_chars: usize,
    /// Rank concepts by prior mass only, without PageRank
    #[arg(long)]
    pub no_pagerank: bool,
    /// Replace videos that are already in the catalog
    #[arg(long)]
    pub overwrite: bool,
}

fn is_transcript(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).and_then(TranscriptFormat::from_extension).is_some()
}

/// Expands directories (one level) into the transcripts they contain.
fn collect(paths: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                .with_context(|| format!("reading {}", path.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_transcript(p))
                .collect();
            found.sort();
            files.extend(found);
        } else if path.is_file() {
            files.push(path.clone());
        } else {
            bail!("{} does not exist", path.display());
        }
    }
    Ok(files)
}

async fn ingest_one(
    path: PathBuf,
    store: Arc<CatalogStore>,
    annotator: Arc<Annotator>,
    config: IngestConfig,
) -> anyhow::Result<(String, usize, usize)> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    let format = TranscriptFormat::from_extension(ext).with_context(|| format!("unsupported extension `{ext}`"))?;
    let sidecar = path.with_extension("json");
    let meta: VideoMetadata = serde_json::from_slice(
        &std::fs::read(&sidecar).with_context(|| format!("reading metadata {}", sidecar.display()))?,
    )
    .with_context(|| format!("parsing metadata {}", sidecar.display()))?;
    let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let video = match annotator.as_ref() {
        // local linking is CPU-bound
        Annotator::Local(_) => {
            let annotator = annotator.clone();
            tokio::task::spawn_blocking(move || {
                let Annotator::Local(lexicon) = annotator.as_ref() else { unreachable!() };
                cfb_core::catalog::ingest_video_local(&store, &meta, &bytes, format, lexicon, &config)
            })
            .await??
        }
        Annotator::Remote(_) => ingest_video(&store, &meta, &bytes, format, &annotator, &config).await?,
    };
    let concepts: std::collections::BTreeSet<&str> = video
        .fragments
        .iter()
        .flat_map(|f| f.annotations.iter().map(|a| a.concept_id.as_str()))
        .chain(video.video_tags.iter().map(|a| a.concept_id.as_str()))
        .collect();
    Ok((video.video_id.clone(), video.fragments.len(), concepts.len()))
}

pub fn run(args: IngestArgs) -> anyhow::Result<Outcome> {
    args.annotator.validate()?;
    if args.target_chars == 0 {
        return Err(crate::UsageError("--target-chars must be positive".into()).into());
    }
    let files = collect(&args.paths)?;
    if files.is_empty() {
        tracing::warn!("no transcripts found; nothing to ingest");
        return Ok(Outcome::Success);
    }
    std::fs::create_dir_all(&args.data_dir).with_context(|| format!("creating {}", args.data_dir.display()))?;
    let store = Arc::new(CatalogStore::open(&args.data_dir)?);
    let annotator = Arc::new(match args.annotator.annotator {
        AnnotatorMode::Local => Annotator::Local(Arc::new(args.annotator.load_lexicon()?.expect("validated"))),
        AnnotatorMode::Remote => {
            Annotator::Remote(RemoteAnnotator::new(args.annotator.remote_config().expect("validated"))?)
        }
    });
    let config = IngestConfig {
        target_chars: args.target_chars,
        annotate: AnnotateConfig { top_k: args.top_k, use_pagerank: !args.no_pagerank, ..AnnotateConfig::default() },
        overwrite: args.overwrite,
        ..IngestConfig::default()
    };

    let runtime = tokio::runtime::Runtime::new()?;
    let results = runtime.block_on(async {
        let mut tasks = JoinSet::new();
        for (i, file) in files.iter().enumerate() {
            let fut = ingest_one(file.clone(), store.clone(), annotator.clone(), config);
            tasks.spawn(async move { (i, fut.await) });
        }
        let mut results: Vec<_> = tasks.join_all().await;
        results.sort_by_key(|(i, _)| *i);
        results
    });

    let mut failed = 0;
    for (i, result) in results {
        match result {
            Ok((id, fragments, concepts)) => {
                println!("ok    {}  {id}: {fragments} fragments, {concepts} concepts", files[i].display())
            }
            Err(e) => {
                failed += 1;
                println!("FAIL  {}  {e:#}", files[i].display());
            }
        }
    }
    println!("{} ingested, {failed} failed", files.len() - failed);
    Ok(if failed == 0 { Outcome::Success } else { Outcome::PartialFailure })
}
