//! The 24 interaction metrics, grouped into time, activity, navigation and
//! selection. A metric whose denominator is zero, or that summarizes an
//! empty set, is `None` rather than 0.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::session::{union_length, Interval, TaskSession};
use crate::events::Screen;

/// Removing a segment within this many seconds of selecting it counts as a
/// quick removal.
pub const QUICK_REMOVAL_SECS: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricGroup {
    Time,
    Activity,
    Navigation,
    Selection,
}

impl MetricGroup {
    pub fn label(self) -> &'static str {
        match self {
            MetricGroup::Time => "Time",
            MetricGroup::Activity => "Activity",
            MetricGroup::Navigation => "Navigation",
            MetricGroup::Selection => "Selection",
        }
    }
}

macro_rules! metrics {
    ($($variant:ident => $group:ident, $key:literal, $label:literal;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum Metric {
            $($variant,)*
        }

        impl Metric {
            pub const ALL: [Metric; 24] = [$(Metric::$variant,)*];

            pub fn group(self) -> MetricGroup {
                match self {
                    $(Metric::$variant => MetricGroup::$group,)*
                }
            }

            /// Stable snake_case identifier used in JSON output.
            pub fn key(self) -> &'static str {
                match self {
                    $(Metric::$variant => $key,)*
                }
            }

            pub fn label(self) -> &'static str {
                match self {
                    $(Metric::$variant => $label,)*
                }
            }
        }
    };
}

metrics! {
    TaskDuration => Time, "task_duration", "Time spent completing the task";
    ResultsScreenTime => Time, "results_screen_time", "Time spent in results screen";
    WatchTime => Time, "watch_time", "Time spent watching videos during the task";
    ExplorationTime => Time, "exploration_time", "Time spent exploring during the task";
    ResultsExplorationTime => Time, "results_exploration_time", "Time spent exploring in results screen";
    PlayerExplorationTime => Time, "player_exploration_time", "Time spent exploring in video player screen";
    WatchTimePerOpenedVideo => Time, "watch_time_per_opened_video", "Time spent watching videos per opened video";
    ResultsExplorationPerExploredVideo => Time, "results_exploration_per_explored_video", "Time spent exploring in results screen per explored video";
    UniqueVideosPlayed => Activity, "unique_videos_played", "Number of unique videos played";
    PlaySessions => Activity, "play_sessions", "Number of videos played";
    PlaySessionsPerUniqueVideo => Activity, "play_sessions_per_unique_video", "Number of play sessions per unique video played";
    QuickRemovals => Activity, "quick_removals", "Number of segments removed within 1 minute of selection";
    Removals => Activity, "removals", "Number of segments removed";
    ResultsExplorationFraction => Activity, "results_exploration_fraction", "Fraction time spent exploring in result screen per task";
    PlayerExplorationFraction => Activity, "player_exploration_fraction", "Fraction time spent exploring in video player screen per task";
    SeekCount => Navigation, "seek_count", "Number of seek actions";
    SeeksPerPlayedVideo => Navigation, "seeks_per_played_video", "Number of seek actions per played video";
    DeepestRankPlayed => Navigation, "deepest_rank_played", "Deepest rank of video played";
    DeepestRankExplored => Navigation, "deepest_rank_explored", "Deepest rank of video explored";
    MeanPositionFraction => Navigation, "mean_position_fraction", "Mean position played within the video (fraction)";
    TimeToFirstSelection => Selection, "time_to_first_selection", "Time spent before first selection";
    VideosPlayedBeforeSelection => Selection, "videos_played_before_selection", "Number of videos played before first selection";
    VideosExploredBeforeSelection => Selection, "videos_explored_before_selection", "Number of videos explored before first selection";
    MeanSelectedDuration => Selection, "mean_selected_duration", "Average duration of selected segments";
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Metric::ALL.iter().copied().find(|m| m.key() == s).ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

/// One value per metric, `None` when undefined for the session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics(BTreeMap<Metric, Option<f64>>);

impl TaskMetrics {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        self.0.get(&metric).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Metric, Option<f64>)> + '_ {
        Metric::ALL.iter().map(|m| (*m, self.get(*m)))
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

fn count(n: usize) -> Option<f64> {
    Some(n as f64)
}

pub fn compute_metrics(session: &TaskSession) -> TaskMetrics {
    use Metric::*;

    let task_duration = session.info.task_duration;
    let popup_time = union_length(session.popups.iter().map(|(_, i)| *i));
    let results_time = (task_duration - popup_time).max(0.0);

    let watch_time: f64 = session.watch.values().flatten().map(Interval::len).sum();
    let exploration = union_length(session.episodes.iter().map(|e| e.interval()));
    let exploration_on = |screen: Screen| {
        union_length(session.episodes.iter().filter(|e| e.screen == screen).map(|e| e.interval()))
    };
    let results_exploration = exploration_on(Screen::Results);
    let player_exploration = exploration_on(Screen::Player);

    let opened: BTreeSet<&str> = session.opens.iter().map(|o| o.video_id.as_str()).collect();
    let played: BTreeSet<&str> = session.plays.iter().map(|p| p.video_id.as_str()).collect();
    let explored: BTreeSet<&str> = session.episodes.iter().map(|e| e.video_id.as_str()).collect();

    // match each removal to the most recent earlier selection of the same segment
    let mut live: Vec<Option<&super::session::SegmentAction>> = session.selections.iter().map(Some).collect();
    let mut quick = 0usize;
    for removal in &session.removals {
        let found = live.iter_mut().rev().find(|s| {
            s.is_some_and(|s| s.video_id == removal.video_id && s.segment == removal.segment && s.time <= removal.time)
        });
        if let Some(slot) = found {
            let selected = slot.take().expect("matched slot is live");
            if removal.time - selected.time <= QUICK_REMOVAL_SECS {
                quick += 1;
            }
        }
    }
    let remaining: Vec<f64> = live.iter().flatten().map(|s| s.segment.duration()).collect();

    let rank_of = |video: &str| session.ranks.get(video).copied();
    let deepest = |videos: &BTreeSet<&str>| videos.iter().filter_map(|v| rank_of(v)).max().map(f64::from);

    let position_fractions: Vec<f64> = session
        .watch
        .iter()
        .filter_map(|(video, intervals)| {
            let total: f64 = intervals.iter().map(Interval::len).sum();
            let duration = *session.durations.get(video)?;
            if total <= 0.0 || duration <= 0.0 {
                return None;
            }
            let weighted: f64 = intervals.iter().map(|i| i.len() * (i.start + i.end) / 2.0).sum();
            Some(weighted / total / duration)
        })
        .collect();

    let first_selection = session.selections.iter().map(|s| s.time).fold(None, |acc: Option<f64>, t| {
        Some(acc.map_or(t, |a| a.min(t)))
    });
    let played_before = first_selection.map(|t| {
        session.plays.iter().filter(|p| p.time < t).map(|p| p.video_id.as_str()).collect::<BTreeSet<_>>().len()
    });
    let explored_before = first_selection.map(|t| {
        session.episodes.iter().filter(|e| e.start < t).map(|e| e.video_id.as_str()).collect::<BTreeSet<_>>().len()
    });

    let values: BTreeMap<Metric, Option<f64>> = [
        (TaskDuration, Some(task_duration)),
        (ResultsScreenTime, Some(results_time)),
        (WatchTime, Some(watch_time)),
        (ExplorationTime, Some(exploration)),
        (ResultsExplorationTime, Some(results_exploration)),
        (PlayerExplorationTime, Some(player_exploration)),
        (WatchTimePerOpenedVideo, ratio(watch_time, opened.len() as f64)),
        (ResultsExplorationPerExploredVideo, ratio(results_exploration, explored.len() as f64)),
        (UniqueVideosPlayed, count(played.len())),
        (PlaySessions, count(session.plays.len())),
        (PlaySessionsPerUniqueVideo, ratio(session.plays.len() as f64, played.len() as f64)),
        (QuickRemovals, count(quick)),
        (Removals, count(session.removals.len())),
        (ResultsExplorationFraction, ratio(results_exploration, task_duration)),
        (PlayerExplorationFraction, ratio(player_exploration, task_duration)),
        (SeekCount, count(session.seeks.len())),
        (SeeksPerPlayedVideo, ratio(session.seeks.len() as f64, played.len() as f64)),
        (DeepestRankPlayed, deepest(&opened)),
        (DeepestRankExplored, deepest(&explored)),
        (
            MeanPositionFraction,
            ratio(position_fractions.iter().sum(), position_fractions.len() as f64),
        ),
        (TimeToFirstSelection, first_selection),
        (VideosPlayedBeforeSelection, played_before.map(|n| n as f64)),
        (VideosExploredBeforeSelection, explored_before.map(|n| n as f64)),
        (MeanSelectedDuration, ratio(remaining.iter().sum(), remaining.len() as f64)),
    ]
    .into_iter()
    .collect();
    debug_assert_eq!(values.len(), Metric::ALL.len());
    TaskMetrics(values)
}
