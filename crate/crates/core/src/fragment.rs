//! Span-aligned partitioning of a transcript into ~5000-character fragments.
//!
//! The concatenated transcript text is built from one piece per span: the
//! span text followed by a single space. Fragment boundaries always fall on
//! piece boundaries, and character offsets count Unicode scalar values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transcript::Transcript;

pub const DEFAULT_TARGET_CHARS: usize = 5000;

const SEPARATOR: char = ' ';

#[derive(Debug, Error, PartialEq)]
pub enum FragmentError {
    #[error("character offset {offset} outside 0..={len}")]
    OffsetOutOfRange { offset: usize, len: usize },
    #[error("transcript has no spans")]
    EmptyTranscript,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    pub index: usize,
    pub char_start: usize,
    pub char_end: usize,
    pub time_start: f64,
    pub time_end: f64,
    pub text: String,
}

impl Fragment {
    pub fn char_len(&self) -> usize {
        self.char_end - self.char_start
    }
}

fn piece(text: &str) -> String {
    let mut p = String::with_capacity(text.len() + 1);
    p.push_str(text);
    p.push(SEPARATOR);
    p
}

/// Character length each span contributes to the concatenated text.
pub fn span_char_lengths(transcript: &Transcript) -> Vec<usize> {
    transcript.spans.iter().map(|s| s.text.chars().count() + 1).collect()
}

/// The concatenated transcript text that fragments tile.
pub fn full_text(transcript: &Transcript) -> String {
    transcript.spans.iter().map(|s| piece(&s.text)).collect()
}

/// Groups span indices into fragments: spans are added while the running
/// length is below `target_chars`; a final group shorter than a quarter of
/// the target is folded into its predecessor.
pub fn greedy_groups(lengths: &[usize], target_chars: usize) -> Vec<std::ops::Range<usize>> {
    let target = target_chars.max(1);
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0;
    for (i, len) in lengths.iter().enumerate() {
        acc += len;
        if acc >= target {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0;
        }
    }
    if start < lengths.len() {
        let tail = start..lengths.len();
        match groups.last_mut() {
            Some(prev) if acc * 4 < target => prev.end = tail.end,
            _ => groups.push(tail),
        }
    }
    groups
}

/// Partitions a normalized transcript. An empty transcript yields no fragments.
pub fn fragment(transcript: &Transcript, target_chars: usize) -> Vec<Fragment> {
    let spans = &transcript.spans;
    if spans.is_empty() {
        return Vec::new();
    }
    let lengths = span_char_lengths(transcript);
    let groups = greedy_groups(&lengths, target_chars);

    let mut fragments = Vec::with_capacity(groups.len());
    let mut offset = 0;
    for (index, group) in groups.iter().enumerate() {
        let char_len: usize = lengths[group.clone()].iter().sum();
        let text: String = spans[group.clone()].iter().map(|s| piece(&s.text)).collect();
        let time_end = match groups.get(index + 1) {
            Some(next) => spans[next.start].start,
            None => spans[group.end - 1].end,
        };
        fragments.push(Fragment {
            index,
            char_start: offset,
            char_end: offset + char_len,
            time_start: spans[group.start].start,
            time_end,
            text,
        });
        offset += char_len;
    }
    fragments
}

/// Maps a character offset in the concatenated text to a playback time by
/// linear interpolation inside the span that contains it.
pub fn time_of_char(transcript: &Transcript, offset: usize) -> Result<f64, FragmentError> {
    let lengths = span_char_lengths(transcript);
    let total: usize = lengths.iter().sum();
    let last = transcript.spans.last().ok_or(FragmentError::EmptyTranscript)?;
    if offset > total {
        return Err(FragmentError::OffsetOutOfRange { offset, len: total });
    }
    if offset == total {
        return Ok(last.end);
    }
    let mut start_char = 0;
    for (span, len) in transcript.spans.iter().zip(&lengths) {
        if offset < start_char + len {
            let share = (offset - start_char) as f64 / *len as f64;
            return Ok(span.start + share * span.duration());
        }
        start_char += len;
    }
    unreachable!("offset < total is always inside some span")
}
