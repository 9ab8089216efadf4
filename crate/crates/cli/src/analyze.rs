use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use cfb_core::analytics::{
    analyze, sessions_from_events, AnalysisConfig, AnalysisError, PairingOptions, ZeroMethod, DEFAULT_GAP_MERGE,
};
use cfb_core::events::{parse_event_lines, InteractionEvent};
use clap::{Args, ValueEnum};

use crate::{Outcome, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Zeros {
    Wilcox,
    Pratt,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Event log files (.jsonl) or directories containing them
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Directory for report.json and report.txt
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hover episodes closer than this many seconds are merged
    #[arg(long, default_value_t = DEFAULT_GAP_MERGE)]
    pub gap_merge: f64,
    #[arg(long, value_enum, default_value_t = Zeros::Wilcox)]
    pub zero_method: Zeros,
    /// Only pair sessions with the same task order
    #[arg(long)]
    pub strict_order: bool,
}

fn collect_logs(paths: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                .with_context(|| format!("reading {}", path.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
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

fn read_log(path: &Path) -> anyhow::Result<Vec<InteractionEvent>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_event_lines(&text).map_err(|(line, e)| anyhow::anyhow!("{}:{line}: {e}", path.display()))
}

pub fn run(args: AnalyzeArgs) -> anyhow::Result<Outcome> {
    if args.repeats == 0 {
        return Err(UsageError("--repeats must be at least 1".into()).into());
    }
    if !(args.gap_merge >= 0.0 && args.gap_merge.is_finite()) {
        return Err(UsageError("--gap-merge must be a non-negative number".into()).into());
    }
    let mut events = Vec::new();
    for file in collect_logs(&args.paths)? {
        events.extend(read_log(&file)?);
    }
    let sessions = sessions_from_events(events, args.gap_merge).map_err(|failures| {
        let lines: Vec<String> = failures
            .iter()
            .map(|(session, errs)| {
                let msgs: Vec<String> = errs.iter().map(ToString::to_string).collect();
                format!("  {session}: {}", msgs.join("; "))
            })
            .collect();
        anyhow::anyhow!("{} invalid session(s):\n{}", failures.len(), lines.join("\n"))
    })?;
    let config = AnalysisConfig {
        n_repeats: args.repeats,
        base_seed: args.seed,
        zero_method: match args.zero_method {
            Zeros::Wilcox => ZeroMethod::Wilcox,
            Zeros::Pratt => ZeroMethod::Pratt,
        },
        pairing: PairingOptions { strict_order: args.strict_order },
    };
    let report = match analyze(&sessions, &config) {
        Ok(r) => r,
        Err(AnalysisError::NoSessions) => bail!("no sessions"),
    };
    for topic in &report.skipped_topics {
        tracing::warn!(topic, "topic lacks one of the two conditions; not analyzed");
    }
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let json_path = args.out.join("report.json");
    let text_path = args.out.join("report.txt");
    let table = report.to_table();
    std::fs::write(&json_path, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", json_path.display()))?;
    std::fs::write(&text_path, &table).with_context(|| format!("writing {}", text_path.display()))?;
    print!("{table}");
    Ok(Outcome::Success)
}
