#[path = "../../core/tests/support/mod.rs"]
mod support;

mod common;

use std::path::Path;

use cfb_core::analytics::{AnalysisReport, Metric};
use common::{core_fixtures, lexicon, run, Server};
use support::fixtures::report_mismatches;

fn stage_video(dir: &Path, stem: &str, video_id: &str) {
    let srt = std::fs::read_to_string(core_fixtures().join("lecture.srt")).unwrap();
    std::fs::write(dir.join(format!("{stem}.srt")), srt).unwrap();
    let mut meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(core_fixtures().join("lecture.json")).unwrap()).unwrap();
    meta["video_id"] = video_id.into();
    std::fs::write(dir.join(format!("{stem}.json")), meta.to_string()).unwrap();
}

fn ingest(input: &Path, data: &Path) -> std::process::Output {
    run(&["ingest", input.to_str().unwrap(), "--data-dir", data.to_str().unwrap(), "--lexicon", &lexicon()])
}

fn stdout(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn ingest_two_valid_files() {
    let dir = tempfile::tempdir().unwrap();
    stage_video(dir.path(), "a", "vid-a");
    stage_video(dir.path(), "b", "vid-b");
    let data = dir.path().join("data");
    let out = ingest(dir.path(), &data);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("2 ingested, 0 failed"));
    assert!(data.join("videos/vid-a.json").exists());
    assert!(data.join("videos/vid-b.json").exists());
}

#[test]
fn ingest_partial_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    stage_video(dir.path(), "good", "vid-good");
    stage_video(dir.path(), "bad", "vid-bad");
    std::fs::write(dir.path().join("bad.srt"), "1\nnot a timestamp\nhello\n").unwrap();
    let data = dir.path().join("data");
    let out = ingest(dir.path(), &data);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("1 ingested, 1 failed"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("FAIL") && l.contains("bad.srt")));
    assert!(data.join("videos/vid-good.json").exists());
}

#[test]
fn ingest_empty_directory_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty");
    std::fs::create_dir(&input).unwrap();
    let out = ingest(&input, &dir.path().join("data"));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn existing_video_needs_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    stage_video(dir.path(), "a", "vid-a");
    let data = dir.path().join("data");
    assert_eq!(ingest(dir.path(), &data).status.code(), Some(0));
    assert_eq!(ingest(dir.path(), &data).status.code(), Some(1));
    let again = run(&[
        "ingest",
        dir.path().to_str().unwrap(),
        "--data-dir",
        data.to_str().unwrap(),
        "--lexicon",
        &lexicon(),
        "--overwrite",
    ]);
    assert_eq!(again.status.code(), Some(0), "{}", stderr(&again));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["ingest", "x.srt", "--data-dir", "/tmp/never"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--zero-method", "bogus", "x"]).status.code(), Some(2));
}

#[test]
fn analyze_fixture_matches_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "analyze",
        core_fixtures().join("analysis").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("Time spent completing the task"));
    let report: AnalysisReport =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report_mismatches(&report), Vec::<String>::new());
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn analyze_without_sessions_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["analyze", dir.path().to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no sessions"));
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = run(&["simulate", "--participants", "6", "--seed", "9", "--out", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 12);
    for name in names {
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn doubled_exploration_is_significant() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let out = run(&["simulate", "--participants", "40", "--on-exploration-factor", "2", "--out", sim.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&["analyze", sim.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: AnalysisReport =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report.n_sessions, 80);
    let s = report.metric(Metric::ExplorationTime);
    assert!(s.mean_difference.unwrap() > 0.0);
    assert!(s.mean_p.unwrap() < 0.05, "p = {:?}", s.mean_p);
}

#[test]
fn serve_rejects_missing_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["serve", "--listen", "127.0.0.1:0", "--data-dir", dir.path().join("nope").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[tokio::test]
async fn serve_lists_ingested_videos() {
    let dir = tempfile::tempdir().unwrap();
    stage_video(dir.path(), "a", "vid-a");
    let data = dir.path().join("data");
    assert_eq!(ingest(dir.path(), &data).status.code(), Some(0));
    let server = Server::start(&data, &["--lexicon", &lexicon()]);
    let resp = reqwest::get(format!("{}/videos", server.base)).await.unwrap();
    assert_eq!(resp.status(), 200);
    let videos: Vec<serde_json::Value> = resp.json().await.unwrap();
    assert_eq!(videos.len(), 1);
    assert_eq!(videos[0]["video_id"], "vid-a");
    let resp = reqwest::get(format!("{}/search?q=gradient%20descent", server.base)).await.unwrap();
    let body: serde_json::Value = resp.json().await.unwrap();
    assert_eq!(body["results"][0]["video"]["video_id"], "vid-a");
}

#[test]
fn search_subcommand_prints_ranking() {
    let dir = tempfile::tempdir().unwrap();
    stage_video(dir.path(), "a", "vid-a");
    let data = dir.path().join("data");
    assert_eq!(ingest(dir.path(), &data).status.code(), Some(0));
    let out = run(&["search", "gradient descent", "--data-dir", data.to_str().unwrap(), "--lexicon", &lexicon()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("vid-a"));
}
