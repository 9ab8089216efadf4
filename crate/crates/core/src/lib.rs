//! Content Flow Bar core: turns lecture transcripts into fragment-level
//! concept snippets, scores fragments against search queries, stores the
//! enriched catalog and interaction logs, and analyses those logs.

pub mod analytics;
pub mod annotate;
pub mod catalog;
pub mod events;
pub mod fragment;
pub mod relevance;
pub mod transcript;
