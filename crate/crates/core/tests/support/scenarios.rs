//! Simulated study scenarios shared by the statistics tests.

use cfb_core::analytics::{
    relabel_session, sessions_from_events, simulate, Metric, SimulationProfile, TaskSession, DEFAULT_GAP_MERGE,
};
use cfb_core::events::{Condition, InteractionEvent};

/// Metrics that measure time spent exploring content previews.
pub const EXPLORATION_TIME_METRICS: [Metric; 4] = [
    Metric::ExplorationTime,
    Metric::ResultsExplorationTime,
    Metric::PlayerExplorationTime,
    Metric::ResultsExplorationPerExploredVideo,
];

/// `n` participants where CFB-on hovers last twice as long as CFB-off.
pub fn doubled_exploration(seed: u64, n: usize) -> Vec<TaskSession> {
    let profile = SimulationProfile::default().with_on_exploration_factor(2.0);
    let events: Vec<InteractionEvent> = simulate(&profile, n, seed).unwrap().into_iter().flatten().collect();
    sessions_from_events(events, DEFAULT_GAP_MERGE).unwrap()
}

/// Every session, in both conditions, is a copy of one simulated log under
/// a distinct participant, so every paired difference is zero.
pub fn cloned_logs(seed: u64, n: usize) -> Vec<TaskSession> {
    let logs = simulate(&SimulationProfile::default(), 1, seed).unwrap();
    let template = &logs[0];
    let mut events = Vec::new();
    for p in 0..n {
        for (k, condition) in [Condition::CfbOff, Condition::CfbOn].into_iter().enumerate() {
            let participant = format!("clone{:03}", 2 * p + k);
            events.extend(relabel_session(template, &participant, condition, &format!("{participant}-s")));
        }
    }
    sessions_from_events(events, DEFAULT_GAP_MERGE).unwrap()
}

/// A catalog of `n` videos with random sparse fragment annotations over a
/// small concept vocabulary, plus the raw weights for the oracle.
pub fn random_catalog(
    rng: &mut impl rand::Rng,
    n: usize,
) -> (Vec<cfb_core::catalog::EnrichedVideo>, Vec<(String, Vec<std::collections::BTreeMap<String, f64>>)>) {
    use cfb_core::annotate::ConceptAnnotation;
    use cfb_core::catalog::{EnrichedFragment, EnrichedVideo};
    use cfb_core::fragment::Fragment;

    let mut videos = Vec::new();
    let mut raw = Vec::new();
    for v in 0..n {
        let n_frags = rng.random_range(1..=6);
        let mut fragments = Vec::new();
        let mut weights = Vec::new();
        for i in 0..n_frags {
            let mut map = std::collections::BTreeMap::new();
            for _ in 0..rng.random_range(0..=5) {
                map.insert(format!("C{}", rng.random_range(0..12)), rng.random_range(0.01..1.0));
            }
            let annotations = map
                .iter()
                .enumerate()
                .map(|(r, (k, s))| ConceptAnnotation {
                    concept_id: k.clone(),
                    title: k.clone(),
                    url: String::new(),
                    score: *s,
                    rank: r + 1,
                })
                .collect();
            fragments.push(EnrichedFragment {
                fragment: Fragment {
                    index: i,
                    char_start: i * 10,
                    char_end: (i + 1) * 10,
                    time_start: i as f64 * 60.0,
                    time_end: (i + 1) as f64 * 60.0,
                    text: "x".repeat(10),
                },
                annotations,
                relevance: None,
                highlight: None,
            });
            weights.push(map);
        }
        let id = format!("video{v:02}");
        videos.push(EnrichedVideo {
            video_id: id.clone(),
            title: id.clone(),
            description: String::new(),
            duration: n_frags as f64 * 60.0,
            thumbnail_urls: vec![],
            media_url: String::new(),
            fragments,
            video_tags: vec![],
        });
        raw.push((id, weights));
    }
    (videos, raw)
}

/// Checks a ranking against the oracle. Scores must agree within 1e-12;
/// order must agree except inside runs of scores equal within that bound.
pub fn rankings_agree(got: &[(String, f64)], want: &[(String, f64)]) -> Result<(), String> {
    if got.len() != want.len() {
        return Err(format!("{} hits, oracle has {}", got.len(), want.len()));
    }
    let mut i = 0;
    while i < want.len() {
        let mut j = i + 1;
        while j < want.len() && (want[j].1 - want[i].1).abs() < 1e-12 {
            j += 1;
        }
        let mut g: Vec<&String> = got[i..j].iter().map(|x| &x.0).collect();
        let mut w: Vec<&String> = want[i..j].iter().map(|x| &x.0).collect();
        g.sort();
        w.sort();
        if g != w {
            return Err(format!("positions {i}..{j}: got {g:?}, oracle {w:?}"));
        }
        for (a, b) in got[i..j].iter().zip(&want[i..j]) {
            if (a.1 - b.1).abs() > 1e-12 {
                return Err(format!("{}: score {} vs oracle {}", a.0, a.1, b.1));
            }
        }
        i = j;
    }
    Ok(())
}

/// Highlight levels must never decrease as scores increase, the maximum
/// positive score gets the top level and non-positive scores get none.
pub fn highlight_monotone(scores: &[f64], levels: &[cfb_core::relevance::HighlightLevel], n_levels: usize) -> bool {
    let max = scores.iter().copied().fold(0.0, f64::max);
    for (i, a) in scores.iter().enumerate() {
        if *a <= 0.0 && levels[i].0 != 0 {
            return false;
        }
        if *a == max && max > 0.0 && levels[i].0 as usize != n_levels - 1 {
            return false;
        }
        for (j, b) in scores.iter().enumerate() {
            if a < b && levels[i] > levels[j] {
                return false;
            }
        }
    }
    true
}
