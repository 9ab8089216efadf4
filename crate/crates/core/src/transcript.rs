//! Subtitle and transcript parsing into time-aligned text spans.
//!
//! Three input formats are supported: SRT, WebVTT and plain text with a
//! sidecar duration. Every parser strips `<...>` markup, collapses
//! whitespace and returns a [`Transcript`] whose spans still need
//! [`normalize`] before fragmenting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TranscriptError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("transcript contains no text")]
    Empty,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("transcript is not valid UTF-8")]
    Encoding,
}

pub type Result<T> = std::result::Result<T, TranscriptError>;

/// One cue of text with its start and end in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedSpan {
    pub start: f64,
    pub end: f64,
    pub text: String,
}

impl TimedSpan {
    pub fn new(start: f64, end: f64, text: impl Into<String>) -> Self {
        Self { start, end, text: text.into() }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub video_id: String,
    pub duration: f64,
    pub spans: Vec<TimedSpan>,
}

impl Transcript {
    pub fn new(video_id: impl Into<String>, duration: f64, spans: Vec<TimedSpan>) -> Self {
        Self { video_id: video_id.into(), duration, spans }
    }

    pub fn with_video_id(mut self, video_id: impl Into<String>) -> Self {
        self.video_id = video_id.into();
        self
    }

    /// Replaces the duration, e.g. with the value from sidecar metadata.
    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Total number of characters across all span texts.
    pub fn char_count(&self) -> usize {
        self.spans.iter().map(|s| s.text.chars().count()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TranscriptFormat {
    Srt,
    Vtt,
    Plain,
}

impl TranscriptFormat {
    /// Guesses the format from a file extension.
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "srt" => Some(Self::Srt),
            "vtt" => Some(Self::Vtt),
            "txt" => Some(Self::Plain),
            _ => None,
        }
    }
}

impl std::str::FromStr for TranscriptFormat {
    type Err = TranscriptError;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_extension(s)
            .or(match s.to_ascii_lowercase().as_str() {
                "plain" | "text" => Some(Self::Plain),
                "webvtt" => Some(Self::Vtt),
                _ => None,
            })
            .ok_or_else(|| TranscriptError::InvalidArgument(format!("unknown transcript format `{s}`")))
    }
}

/// Dispatches to the matching parser. `duration` is required for plain text
/// and otherwise overrides the duration inferred from the last cue.
pub fn parse(bytes: &[u8], format: TranscriptFormat, duration: Option<f64>) -> Result<Transcript> {
    let transcript = match format {
        TranscriptFormat::Srt => parse_srt(bytes)?,
        TranscriptFormat::Vtt => parse_vtt(bytes)?,
        TranscriptFormat::Plain => {
            let duration = duration.ok_or_else(|| {
                TranscriptError::InvalidArgument("plain transcripts need a duration".into())
            })?;
            return parse_plain(bytes, duration);
        }
    };
    Ok(match duration {
        Some(d) => transcript.with_duration(d),
        None => transcript,
    })
}

fn decode(bytes: &[u8]) -> Result<&str> {
    let text = std::str::from_utf8(bytes).map_err(|_| TranscriptError::Encoding)?;
    Ok(text.strip_prefix('\u{feff}').unwrap_or(text))
}

/// Removes every `<...>` sequence and collapses runs of whitespace.
pub fn clean_text(raw: &str) -> String {
    let mut stripped = String::with_capacity(raw.len());
    let mut in_tag = false;
    for c in raw.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => stripped.push(c),
            _ => {}
        }
    }
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses `HH:MM:SS,mmm`, `HH:MM:SS.mmm` or `MM:SS.mmm` into seconds.
fn parse_timestamp(raw: &str) -> Option<f64> {
    let raw = raw.trim();
    let (clock, millis) = raw.rsplit_once([',', '.'])?;
    if millis.is_empty() || millis.len() > 3 || !millis.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let fraction: f64 = millis.parse::<u32>().ok()? as f64 / 10f64.powi(millis.len() as i32);
    let parts: Vec<&str> = clock.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return None;
    }
    let mut seconds = 0.0;
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let value: u64 = part.parse().ok()?;
        // minutes and seconds fields are bounded, hours are not
        if i > 0 && value >= 60 {
            return None;
        }
        seconds = seconds * 60.0 + value as f64;
    }
    Some(seconds + fraction)
}

fn parse_timing_line(line: &str, line_no: usize) -> Result<(f64, f64)> {
    let err = |message: &str| TranscriptError::Parse { line: line_no, message: message.to_string() };
    let (left, right) = line.split_once("-->").ok_or_else(|| err("expected a `-->` timing line"))?;
    // WebVTT puts cue settings after the end timestamp
    let right = right.split_whitespace().next().unwrap_or("");
    let start = parse_timestamp(left).ok_or_else(|| err("malformed start timestamp"))?;
    let end = parse_timestamp(right).ok_or_else(|| err("malformed end timestamp"))?;
    if end < start {
        return Err(err("cue ends before it starts"));
    }
    Ok((start, end))
}

fn finish(spans: Vec<TimedSpan>) -> Result<Transcript> {
    if spans.is_empty() {
        return Err(TranscriptError::Empty);
    }
    let duration = spans.iter().map(|s| s.end).fold(0.0, f64::max);
    Ok(Transcript::new("", duration, spans))
}

/// Splits content into blocks of non-blank lines, keeping 1-based line numbers.
fn blocks(text: &str) -> Vec<Vec<(usize, &str)>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        } else {
            current.push((i + 1, line));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn cue_span(start: f64, end: f64, lines: &[(usize, &str)]) -> Option<TimedSpan> {
    let raw = lines.iter().map(|(_, l)| *l).collect::<Vec<_>>().join("\n");
    let text = clean_text(&raw);
    (!text.is_empty()).then(|| TimedSpan::new(start, end, text))
}

pub fn parse_srt(bytes: &[u8]) -> Result<Transcript> {
    let text = decode(bytes)?;
    let mut spans = Vec::new();
    for block in blocks(text) {
        let mut lines = block.as_slice();
        if !lines[0].1.contains("-->") {
            // cue counter, discarded
            if lines.len() < 2 {
                return Err(TranscriptError::Parse {
                    line: lines[0].0,
                    message: "cue has no timing line".into(),
                });
            }
            lines = &lines[1..];
        }
        let (line_no, timing) = lines[0];
        let (start, end) = parse_timing_line(timing, line_no)?;
        spans.extend(cue_span(start, end, &lines[1..]));
    }
    finish(spans)
}

pub fn parse_vtt(bytes: &[u8]) -> Result<Transcript> {
    let text = decode(bytes)?;
    let first = text.lines().next().unwrap_or("");
    let header_ok = first
        .strip_prefix("WEBVTT")
        .is_some_and(|rest| rest.is_empty() || rest.starts_with([' ', '\t', '\r']));
    if !header_ok {
        return Err(TranscriptError::Parse { line: 1, message: "missing WEBVTT header".into() });
    }
    let mut spans = Vec::new();
    // the first block is the header (plus optional metadata lines)
    for block in blocks(text).into_iter().skip(1) {
        let head = block[0].1.trim_start();
        if ["NOTE", "STYLE", "REGION"]
            .iter()
            .any(|kw| head == *kw || head.starts_with(&format!("{kw} ")) || head.starts_with(&format!("{kw}\t")))
        {
            continue;
        }
        let mut lines = block.as_slice();
        if !lines[0].1.contains("-->") {
            // cue identifier
            if lines.len() < 2 {
                return Err(TranscriptError::Parse {
                    line: lines[0].0,
                    message: "cue has no timing line".into(),
                });
            }
            lines = &lines[1..];
        }
        let (line_no, timing) = lines[0];
        let (start, end) = parse_timing_line(timing, line_no)?;
        spans.extend(cue_span(start, end, &lines[1..]));
    }
    finish(spans)
}

/// Splits on `.`, `!` or `?` followed by whitespace; the punctuation stays
/// with its sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if matches!(c, '.' | '!' | '?') && chars.peek().is_some_and(|n| n.is_whitespace()) {
            let cleaned = clean_text(&current);
            if !cleaned.is_empty() {
                sentences.push(cleaned);
            }
            current.clear();
        }
    }
    let cleaned = clean_text(&current);
    if !cleaned.is_empty() {
        sentences.push(cleaned);
    }
    sentences
}

/// Plain text: each sentence gets a share of `duration` proportional to its
/// character count.
pub fn parse_plain(bytes: &[u8], duration: f64) -> Result<Transcript> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(TranscriptError::InvalidArgument(format!("duration must be positive, got {duration}")));
    }
    let text = decode(bytes)?;
    let sentences = split_sentences(text);
    let total: usize = sentences.iter().map(|s| s.chars().count()).sum();
    if total == 0 {
        return Err(TranscriptError::Empty);
    }
    let mut spans = Vec::with_capacity(sentences.len());
    let mut consumed = 0usize;
    let last = sentences.len() - 1;
    for (i, sentence) in sentences.into_iter().enumerate() {
        let start = duration * consumed as f64 / total as f64;
        consumed += sentence.chars().count();
        let end = if i == last { duration } else { duration * consumed as f64 / total as f64 };
        spans.push(TimedSpan::new(start, end, sentence));
    }
    Ok(Transcript::new("", duration, spans))
}

/// Sorts spans, merges overlaps, drops zero-length spans and clips to the
/// transcript duration.
pub fn normalize(transcript: &Transcript) -> Transcript {
    let mut spans: Vec<TimedSpan> = transcript
        .spans
        .iter()
        .filter_map(|s| {
            let text = clean_text(&s.text);
            let end = if transcript.duration > 0.0 { s.end.min(transcript.duration) } else { s.end };
            let start = s.start.max(0.0);
            (end > start && !text.is_empty()).then(|| TimedSpan::new(start, end, text))
        })
        .collect();
    spans.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.end.total_cmp(&b.end)));

    let mut merged: Vec<TimedSpan> = Vec::with_capacity(spans.len());
    for span in spans {
        match merged.last_mut() {
            Some(prev) if span.start < prev.end => {
                prev.end = prev.end.max(span.end);
                prev.text.push(' ');
                prev.text.push_str(&span.text);
            }
            _ => merged.push(span),
        }
    }
    Transcript::new(transcript.video_id.clone(), transcript.duration, merged)
}
