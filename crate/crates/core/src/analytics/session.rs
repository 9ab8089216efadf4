//! Validation of one task's event log and reconstruction of the derived
//! timeline (watch intervals, exploration episodes, selections).
//!
//! Task times are seconds since the session's `task_start`. Watch
//! intervals are in video-position seconds.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{Condition, EventKind, InteractionEvent, Screen, Segment};

pub const DEFAULT_GAP_MERGE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("event {event_id}: {message}")]
    Schema { event_id: String, message: String },
    #[error("events from more than one participant/task: {0}")]
    MixedSession(String),
    #[error("no task_start event")]
    MissingTaskStart,
    #[error("no task_end event")]
    MissingTaskEnd,
    #[error("{count} {kind} events, expected exactly one")]
    DuplicateBoundary { kind: &'static str, count: usize },
    #[error("event {event_id} lies outside the task window")]
    OutsideTask { event_id: String },
    #[error("hover_end without matching hover_start: event {event_id}")]
    UnmatchedHoverEnd { event_id: String },
    #[error("event {event_id}: video `{video_id}` played before it was opened")]
    UnknownVideo { event_id: String, video_id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskOrder {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> f64 {
        (self.end - self.start).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Merges overlapping or touching intervals; empty intervals are dropped.
pub fn merge_intervals(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.retain(|i| !i.is_empty());
    intervals.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.end.total_cmp(&b.end)));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for i in intervals {
        match out.last_mut() {
            Some(last) if i.start <= last.end => last.end = last.end.max(i.end),
            _ => out.push(i),
        }
    }
    out
}

pub fn union_length(intervals: impl IntoIterator<Item = Interval>) -> f64 {
    merge_intervals(intervals.into_iter().collect()).iter().map(Interval::len).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub video_id: String,
    pub screen: Screen,
    pub start: f64,
    pub end: f64,
}

impl Episode {
    pub fn interval(&self) -> Interval {
        Interval::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedVideo {
    pub video_id: String,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentAction {
    pub video_id: String,
    pub segment: Segment,
    pub time: f64,
}

/// Identity fields shared by skeletons and reconstructed sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub participant_id: String,
    pub task_id: String,
    pub topic: String,
    pub condition: Condition,
    /// Wall time of `task_start`, milliseconds since the epoch.
    pub task_start_ms: i64,
    /// Seconds from `task_start` to `task_end`.
    pub task_duration: f64,
}

/// A validated event log with raw (unmerged) derived timelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSkeleton {
    pub info: SessionInfo,
    pub events: Vec<InteractionEvent>,
    pub hovers: Vec<Episode>,
    pub popups: Vec<(String, Interval)>,
    pub watch: Vec<(String, Interval)>,
    pub plays: Vec<TimedVideo>,
    pub seeks: Vec<TimedVideo>,
    pub opens: Vec<TimedVideo>,
    pub selections: Vec<SegmentAction>,
    pub removals: Vec<SegmentAction>,
    pub ranks: BTreeMap<String, u32>,
    pub durations: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSession {
    pub info: SessionInfo,
    pub task_order: Option<TaskOrder>,
    pub events: Vec<InteractionEvent>,
    /// Merged watch intervals per video, in video seconds.
    pub watch: BTreeMap<String, Vec<Interval>>,
    /// Exploration episodes after gap merging, ordered by start.
    pub episodes: Vec<Episode>,
    /// Intervals during which the player pop-up was open.
    pub popups: Vec<(String, Interval)>,
    pub plays: Vec<TimedVideo>,
    pub seeks: Vec<TimedVideo>,
    pub opens: Vec<TimedVideo>,
    pub selections: Vec<SegmentAction>,
    pub removals: Vec<SegmentAction>,
    pub ranks: BTreeMap<String, u32>,
    pub durations: BTreeMap<String, f64>,
}

fn boundary_order(kind: EventKind) -> u8 {
    match kind {
        EventKind::TaskStart => 0,
        EventKind::TaskEnd => 2,
        _ => 1,
    }
}

struct Playing {
    video_id: String,
    position: f64,
    since: f64,
}

/// Sorts and checks one task's events, pairing hover and playback events.
/// Episodes still open at `task_end` are closed there.
pub fn validate_events(mut events: Vec<InteractionEvent>) -> Result<SessionSkeleton, Vec<SessionError>> {
    let mut errors = Vec::new();
    for e in &events {
        if let Err(err) = e.validate() {
            errors.push(SessionError::Schema { event_id: e.event_id.clone(), message: err.to_string() });
        }
    }
    let keys: BTreeSet<(&str, &str)> = events.iter().map(|e| (e.participant_id.as_str(), e.task_id.as_str())).collect();
    if keys.len() > 1 {
        let list = keys.iter().map(|(p, t)| format!("{p}/{t}")).collect::<Vec<_>>().join(", ");
        errors.push(SessionError::MixedSession(list));
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    events.sort_by_key(|e| (e.wall_time, boundary_order(e.kind)));
    let starts: Vec<&InteractionEvent> = events.iter().filter(|e| e.kind == EventKind::TaskStart).collect();
    let ends: Vec<&InteractionEvent> = events.iter().filter(|e| e.kind == EventKind::TaskEnd).collect();
    match starts.len() {
        0 => errors.push(SessionError::MissingTaskStart),
        1 => {}
        count => errors.push(SessionError::DuplicateBoundary { kind: "task_start", count }),
    }
    match ends.len() {
        0 => errors.push(SessionError::MissingTaskEnd),
        1 => {}
        count => errors.push(SessionError::DuplicateBoundary { kind: "task_end", count }),
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let start = starts[0];
    let start_ms = start.wall_time;
    let end_ms = ends[0].wall_time;
    for e in &events {
        if e.wall_time < start_ms || e.wall_time > end_ms {
            errors.push(SessionError::OutsideTask { event_id: e.event_id.clone() });
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    let secs = |e: &InteractionEvent| (e.wall_time - start_ms) as f64 / 1000.0;
    let task_duration = (end_ms - start_ms) as f64 / 1000.0;

    let mut hovers = Vec::new();
    let mut open_hovers: BTreeMap<(String, Screen), f64> = BTreeMap::new();
    let mut popups = Vec::new();
    let mut popup: Option<(String, f64)> = None;
    let mut watch = Vec::new();
    let mut playing: Option<Playing> = None;
    let mut plays = Vec::new();
    let mut seeks = Vec::new();
    let mut opens = Vec::new();
    let mut selections = Vec::new();
    let mut removals = Vec::new();
    let mut ranks = BTreeMap::new();
    let mut durations: BTreeMap<String, f64> = BTreeMap::new();

    let close_play = |playing: &mut Option<Playing>, watch: &mut Vec<(String, Interval)>, t: f64, durations: &BTreeMap<String, f64>| {
        if let Some(p) = playing.take() {
            let duration = durations.get(&p.video_id).copied().unwrap_or(f64::INFINITY);
            let start = p.position.min(duration);
            let end = (p.position + (t - p.since)).min(duration);
            if end > start {
                watch.push((p.video_id, Interval::new(start, end)));
            }
        }
    };

    for e in &events {
        let t = secs(e);
        let video = e.video_id.clone().unwrap_or_default();
        if let Some(rank) = e.video_rank {
            ranks.insert(video.clone(), rank);
        }
        if let Some(d) = e.video_duration {
            durations.insert(video.clone(), d);
        }
        match e.kind {
            EventKind::TaskStart => {}
            EventKind::TaskEnd => {
                close_play(&mut playing, &mut watch, t, &durations);
                if let Some((v, s)) = popup.take() {
                    popups.push((v, Interval::new(s, t)));
                }
                for ((v, screen), s) in std::mem::take(&mut open_hovers) {
                    hovers.push(Episode { video_id: v, screen, start: s, end: t });
                }
            }
            EventKind::OpenVideo => {
                if let Some((v, s)) = popup.take() {
                    if playing.as_ref().is_some_and(|p| p.video_id == v) {
                        close_play(&mut playing, &mut watch, t, &durations);
                    }
                    popups.push((v, Interval::new(s, t)));
                }
                popup = Some((video.clone(), t));
                opens.push(TimedVideo { video_id: video, time: t });
            }
            EventKind::CloseVideo => {
                if playing.as_ref().is_some_and(|p| p.video_id == video) {
                    close_play(&mut playing, &mut watch, t, &durations);
                }
                if popup.as_ref().is_some_and(|(v, _)| *v == video) {
                    let (v, s) = popup.take().expect("checked");
                    popups.push((v, Interval::new(s, t)));
                }
            }
            EventKind::Play => {
                if !durations.contains_key(&video) {
                    errors.push(SessionError::UnknownVideo { event_id: e.event_id.clone(), video_id: video });
                    continue;
                }
                close_play(&mut playing, &mut watch, t, &durations);
                playing = Some(Playing { video_id: video.clone(), position: e.position.unwrap_or(0.0), since: t });
                plays.push(TimedVideo { video_id: video, time: t });
            }
            EventKind::Pause => {
                if playing.as_ref().is_some_and(|p| p.video_id == video) {
                    close_play(&mut playing, &mut watch, t, &durations);
                }
            }
            EventKind::Seek => {
                if playing.as_ref().is_some_and(|p| p.video_id == video) {
                    close_play(&mut playing, &mut watch, t, &durations);
                    playing = Some(Playing { video_id: video.clone(), position: e.position.unwrap_or(0.0), since: t });
                }
                seeks.push(TimedVideo { video_id: video, time: t });
            }
            EventKind::HoverStart => {
                open_hovers.entry((video, e.screen)).or_insert(t);
            }
            EventKind::HoverEnd => match open_hovers.remove(&(video.clone(), e.screen)) {
                Some(s) => hovers.push(Episode { video_id: video, screen: e.screen, start: s, end: t }),
                None => errors.push(SessionError::UnmatchedHoverEnd { event_id: e.event_id.clone() }),
            },
            EventKind::SelectSegment => selections.push(SegmentAction {
                video_id: video,
                segment: e.segment.expect("validated"),
                time: t,
            }),
            EventKind::RemoveSegment => removals.push(SegmentAction {
                video_id: video,
                segment: e.segment.expect("validated"),
                time: t,
            }),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    let info = SessionInfo {
        session_id: start.session_id.clone(),
        participant_id: start.participant_id.clone(),
        task_id: start.task_id.clone(),
        topic: start.topic.clone(),
        condition: start.condition,
        task_start_ms: start_ms,
        task_duration,
    };
    Ok(SessionSkeleton {
        info,
        events,
        hovers,
        popups,
        watch,
        plays,
        seeks,
        opens,
        selections,
        removals,
        ranks,
        durations,
    })
}

/// Merges hover episodes on the same (video, screen) separated by less than
/// `gap_merge` seconds, and unions overlapping watch intervals per video.
pub fn reconstruct_session(skeleton: SessionSkeleton, gap_merge: f64) -> TaskSession {
    let mut by_key: BTreeMap<(String, Screen), Vec<Episode>> = BTreeMap::new();
    for ep in skeleton.hovers {
        by_key.entry((ep.video_id.clone(), ep.screen)).or_default().push(ep);
    }
    let mut episodes = Vec::new();
    for (_, mut list) in by_key {
        list.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut merged: Vec<Episode> = Vec::with_capacity(list.len());
        for ep in list {
            match merged.last_mut() {
                Some(last) if ep.start - last.end < gap_merge => last.end = last.end.max(ep.end),
                _ => merged.push(ep),
            }
        }
        episodes.extend(merged);
    }
    episodes.sort_by(|a, b| {
        a.start
            .total_cmp(&b.start)
            .then_with(|| a.video_id.cmp(&b.video_id))
            .then_with(|| a.screen.cmp(&b.screen))
    });

    let mut watch: BTreeMap<String, Vec<Interval>> = BTreeMap::new();
    for (video, interval) in skeleton.watch {
        watch.entry(video).or_default().push(interval);
    }
    let watch = watch.into_iter().map(|(v, list)| (v, merge_intervals(list))).collect();

    TaskSession {
        info: skeleton.info,
        task_order: None,
        events: skeleton.events,
        watch,
        episodes,
        popups: skeleton.popups,
        plays: skeleton.plays,
        seeks: skeleton.seeks,
        opens: skeleton.opens,
        selections: skeleton.selections,
        removals: skeleton.removals,
        ranks: skeleton.ranks,
        durations: skeleton.durations,
    }
}

/// Splits a flat event stream into per-(participant, task) logs and
/// reconstructs each. Task order is assigned per participant by start time.
pub fn sessions_from_events(
    events: Vec<InteractionEvent>,
    gap_merge: f64,
) -> Result<Vec<TaskSession>, Vec<(String, Vec<SessionError>)>> {
    let mut groups: BTreeMap<(String, String), Vec<InteractionEvent>> = BTreeMap::new();
    for e in events {
        groups.entry((e.participant_id.clone(), e.task_id.clone())).or_default().push(e);
    }
    let mut sessions = Vec::new();
    let mut failures = Vec::new();
    for ((participant, task), group) in groups {
        match validate_events(group) {
            Ok(skeleton) => sessions.push(reconstruct_session(skeleton, gap_merge)),
            Err(errs) => failures.push((format!("{participant}/{task}"), errs)),
        }
    }
    if !failures.is_empty() {
        return Err(failures);
    }
    assign_task_order(&mut sessions);
    Ok(sessions)
}

/// Marks each participant's earliest-starting task as `First`.
pub fn assign_task_order(sessions: &mut [TaskSession]) {
    let mut by_participant: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, s) in sessions.iter().enumerate() {
        by_participant.entry(s.info.participant_id.clone()).or_default().push(i);
    }
    for (_, mut idx) in by_participant {
        idx.sort_by_key(|&i| (sessions[i].info.task_start_ms, sessions[i].info.task_id.clone()));
        for (pos, i) in idx.into_iter().enumerate() {
            sessions[i].task_order = Some(if pos == 0 { TaskOrder::First } else { TaskOrder::Second });
        }
    }
}
