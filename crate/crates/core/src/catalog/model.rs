use serde::{Deserialize, Serialize};

use crate::annotate::ConceptAnnotation;
use crate::fragment::Fragment;

/// Sidecar metadata supplied alongside a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMetadata {
    pub video_id: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
    /// Seconds. Required for plain-text transcripts; otherwise the last cue
    /// end is used when absent.
    #[serde(default)]
    pub duration: Option<f64>,
    #[serde(default)]
    pub media_url: String,
    #[serde(default)]
    pub thumbnail_urls: Vec<String>,
    /// URL with a `{t}` placeholder replaced by each fragment's start second.
    #[serde(default)]
    pub thumbnail_template: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedFragment {
    #[serde(flatten)]
    pub fragment: Fragment,
    pub annotations: Vec<ConceptAnnotation>,
    /// Query relevance; only populated in search responses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub highlight: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedVideo {
    pub video_id: String,
    pub title: String,
    pub description: String,
    pub duration: f64,
    pub thumbnail_urls: Vec<String>,
    pub media_url: String,
    pub fragments: Vec<EnrichedFragment>,
    pub video_tags: Vec<ConceptAnnotation>,
}

impl EnrichedVideo {
    /// Checks the structural invariants: at least one fragment and fragment
    /// time ranges tiling `[0, duration]`.
    pub fn check(&self) -> Result<(), String> {
        let first = self.fragments.first().ok_or("video has no fragments")?;
        if first.fragment.time_start != 0.0 {
            return Err(format!("first fragment starts at {} instead of 0", first.fragment.time_start));
        }
        for pair in self.fragments.windows(2) {
            if pair[0].fragment.time_end != pair[1].fragment.time_start {
                return Err(format!("gap between fragments {} and {}", pair[0].fragment.index, pair[1].fragment.index));
            }
        }
        let last = self.fragments.last().expect("non-empty");
        if last.fragment.time_end != self.duration {
            return Err(format!("last fragment ends at {} instead of {}", last.fragment.time_end, self.duration));
        }
        Ok(())
    }

    /// Index of the fragment covering a playback position.
    pub fn fragment_at(&self, seconds: f64) -> Option<usize> {
        if self.fragments.is_empty() || !(0.0..=self.duration).contains(&seconds) {
            return None;
        }
        let idx = self.fragments.partition_point(|f| f.fragment.time_end <= seconds);
        Some(idx.min(self.fragments.len() - 1))
    }

    /// Strips query-time fields so the record matches what is stored.
    pub fn without_relevance(mut self) -> Self {
        for f in &mut self.fragments {
            f.relevance = None;
            f.highlight = None;
        }
        self
    }
}
