//! Loaders for the committed event-log fixtures and their hand-traced
//! expectations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cfb_core::analytics::{sessions_from_events, Metric, TaskSession, DEFAULT_GAP_MERGE};
use cfb_core::events::{parse_event_lines, InteractionEvent};

/// Resolves through the workspace so crates other than core can include
/// this module.
pub fn core_fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn read_events(path: &Path) -> Vec<InteractionEvent> {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_event_lines(&text).unwrap_or_else(|(line, e)| panic!("{}:{line}: {e}", path.display()))
}

pub fn load_sessions(paths: &[PathBuf]) -> Vec<TaskSession> {
    let events: Vec<InteractionEvent> = paths.iter().flat_map(|p| read_events(p)).collect();
    sessions_from_events(events, DEFAULT_GAP_MERGE).unwrap_or_else(|e| panic!("invalid fixture: {e:?}"))
}

pub fn jsonl_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    files
}

/// Metrics compared exactly; everything else is a duration or ratio
/// compared within 1e-6.
pub fn is_exact(metric: Metric) -> bool {
    use Metric::*;
    matches!(
        metric,
        UniqueVideosPlayed
            | PlaySessions
            | QuickRemovals
            | Removals
            | SeekCount
            | DeepestRankPlayed
            | DeepestRankExplored
            | VideosPlayedBeforeSelection
            | VideosExploredBeforeSelection
    )
}

pub fn expected_session_metrics() -> BTreeMap<String, f64> {
    let path = core_fixture_dir().join("session_fixture_metrics.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Mismatches between computed and expected metrics, as readable lines.
pub fn metric_mismatches(session: &TaskSession) -> Vec<String> {
    let expected = expected_session_metrics();
    let got = cfb_core::analytics::compute_metrics(session);
    let mut out = Vec::new();
    for metric in Metric::ALL {
        let want = expected.get(metric.key()).copied();
        let have = got.get(metric);
        let ok = match (want, have) {
            (Some(w), Some(h)) if is_exact(metric) => w == h,
            (Some(w), Some(h)) => (w - h).abs() <= 1e-6,
            _ => false,
        };
        if !ok {
            out.push(format!("{}: expected {want:?}, got {have:?}", metric.key()));
        }
    }
    if expected.len() != Metric::ALL.len() {
        out.push(format!("expected table has {} entries", expected.len()));
    }
    out
}

pub fn analysis_sessions() -> Vec<TaskSession> {
    load_sessions(&jsonl_files(&core_fixture_dir().join("analysis")))
}

/// Differences between a report and the hand-computed expectation for the
/// four-session analysis fixture.
pub fn report_mismatches(report: &cfb_core::analytics::AnalysisReport) -> Vec<String> {
    let path = core_fixture_dir().join("analysis/expected_report.json");
    let expected: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let mut out = Vec::new();
    for summary in &report.metrics {
        let want = &expected["metrics"][summary.metric.key()];
        let diff = want["mean_difference"].as_f64().unwrap();
        let p = want["mean_p"].as_f64().unwrap();
        let close = |a: Option<f64>, b: f64| a.is_some_and(|a| (a - b).abs() <= 1e-9);
        if !close(summary.mean_difference, diff) || !close(summary.mean_p, p) || summary.stars != want["stars"] {
            out.push(format!(
                "{}: expected ({diff}, {p}), got ({:?}, {:?}, {:?})",
                summary.metric.key(),
                summary.mean_difference,
                summary.mean_p,
                summary.stars
            ));
        }
    }
    out
}
