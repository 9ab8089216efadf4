//! Interaction event schema shared by the event log and the analytics engine.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    CfbOn,
    CfbOff,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::CfbOn => "cfb_on",
            Condition::CfbOff => "cfb_off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Screen {
    Results,
    Player,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TaskStart,
    TaskEnd,
    OpenVideo,
    CloseVideo,
    Play,
    Pause,
    Seek,
    HoverStart,
    HoverEnd,
    SelectSegment,
    RemoveSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// One client-side interaction. Optional fields are required for some kinds;
/// see [`InteractionEvent::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub event_id: String,
    pub session_id: String,
    pub participant_id: String,
    pub task_id: String,
    pub condition: Condition,
    pub topic: String,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_rank: Option<u32>,
    /// Length of the video in seconds; carried by `open_video`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_duration: Option<f64>,
    pub screen: Screen,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<Segment>,
    /// Milliseconds since the Unix epoch.
    pub wall_time: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid event: `{field}` {message}")]
pub struct SchemaError {
    pub field: &'static str,
    pub message: String,
}

impl SchemaError {
    fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self { field, message: message.into() }
    }
}

/// Identifiers used as file names must stay inside their directory.
pub fn is_safe_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 200
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl EventKind {
    pub fn requires_video(self) -> bool {
        !matches!(self, EventKind::TaskStart | EventKind::TaskEnd)
    }

    pub fn requires_position(self) -> bool {
        matches!(self, EventKind::Play | EventKind::Pause | EventKind::Seek)
    }

    pub fn requires_segment(self) -> bool {
        matches!(self, EventKind::SelectSegment | EventKind::RemoveSegment)
    }
}

impl InteractionEvent {
    /// Checks identifiers and the per-kind required fields:
    ///
    /// | kind                            | required                       |
    /// |---------------------------------|--------------------------------|
    /// | task_start, task_end            | -                              |
    /// | open_video                      | video_id, video_rank, video_duration |
    /// | close_video, hover_end          | video_id                       |
    /// | hover_start                     | video_id (+ video_rank on results screen) |
    /// | play, pause, seek               | video_id, position             |
    /// | select_segment, remove_segment  | video_id, segment              |
    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.event_id.trim().is_empty() {
            return Err(SchemaError::new("event_id", "must not be empty"));
        }
        if !is_safe_id(&self.session_id) {
            return Err(SchemaError::new("session_id", "must be non-empty and use only [A-Za-z0-9._-]"));
        }
        if self.participant_id.trim().is_empty() {
            return Err(SchemaError::new("participant_id", "must not be empty"));
        }
        if self.task_id.trim().is_empty() {
            return Err(SchemaError::new("task_id", "must not be empty"));
        }
        if self.wall_time < 0 {
            return Err(SchemaError::new("wall_time", "must be non-negative"));
        }
        let kind = self.kind;
        if kind.requires_video() && self.video_id.as_deref().is_none_or(|v| v.is_empty()) {
            return Err(SchemaError::new("video_id", format!("is required for {kind:?}")));
        }
        let rank_required =
            kind == EventKind::OpenVideo || (kind == EventKind::HoverStart && self.screen == Screen::Results);
        if rank_required && self.video_rank.is_none() {
            return Err(SchemaError::new("video_rank", format!("is required for {kind:?} on this screen")));
        }
        if self.video_rank == Some(0) {
            return Err(SchemaError::new("video_rank", "is 1-based"));
        }
        if kind == EventKind::OpenVideo {
            match self.video_duration {
                Some(d) if d > 0.0 && d.is_finite() => {}
                Some(_) => return Err(SchemaError::new("video_duration", "must be positive")),
                None => return Err(SchemaError::new("video_duration", "is required for OpenVideo")),
            }
        }
        if kind.requires_position() {
            match self.position {
                Some(p) if p >= 0.0 && p.is_finite() => {}
                Some(_) => return Err(SchemaError::new("position", "must be a non-negative number")),
                None => return Err(SchemaError::new("position", format!("is required for {kind:?}"))),
            }
        }
        if kind.requires_segment() {
            match self.segment {
                Some(s) if s.start >= 0.0 && s.end > s.start && s.end.is_finite() => {}
                Some(_) => return Err(SchemaError::new("segment", "must satisfy 0 <= start < end")),
                None => return Err(SchemaError::new("segment", format!("is required for {kind:?}"))),
            }
        }
        Ok(())
    }
}

/// Reads line-delimited JSON events, skipping blank lines.
pub fn parse_event_lines(text: &str) -> Result<Vec<InteractionEvent>, (usize, serde_json::Error)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| (i + 1, e)))
        .collect()
}
