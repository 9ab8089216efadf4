//! Python bindings: transcript parsing, fragmentation, concept linking,
//! PageRank, relevance and highlighting, the signed-rank test, session
//! analysis and the interaction simulator.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use cfb_core::analytics::{
    analyze as analyze_sessions, sessions_from_events, simulate as simulate_logs, wilcoxon_signed_rank_with,
    AnalysisConfig, SimulationProfile, ZeroMethod, DEFAULT_GAP_MERGE,
};
use cfb_core::annotate::{
    annotate_text, link_mentions, pagerank_rerank, AnnotateConfig, ConceptAnnotation, ConceptLexicon, PageRankConfig,
};
use cfb_core::events::InteractionEvent;
use cfb_core::fragment::{fragment as fragment_transcript, DEFAULT_TARGET_CHARS};
use cfb_core::relevance::{fragment_relevance, highlight_levels as levels, ConceptVector};
use cfb_core::transcript::{normalize, parse, TimedSpan, Transcript, TranscriptFormat};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts any serializable value to plain Python objects through `json`.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn spans_to_transcript(spans: Vec<(f64, f64, String)>, duration: Option<f64>) -> Transcript {
    let end = spans.last().map_or(0.0, |s| s.1);
    let spans = spans.into_iter().map(|(start, end, text)| TimedSpan::new(start, end, text)).collect();
    normalize(&Transcript::new("", duration.unwrap_or(end), spans))
}

/// Parses an SRT, WebVTT or plain-text transcript into
/// `{"video_id", "duration", "spans": [{"start", "end", "text"}]}`.
#[pyfunction]
#[pyo3(signature = (data, format, duration=None))]
fn parse_transcript<'py>(py: Python<'py>, data: &[u8], format: &str, duration: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let format: TranscriptFormat = format.parse().map_err(value_error)?;
    let transcript = parse(data, format, duration).map_err(value_error)?;
    to_py(py, &normalize(&transcript))
}

/// Splits `(start, end, text)` spans into fragments of about `target_chars`.
#[pyfunction]
#[pyo3(signature = (spans, target_chars=DEFAULT_TARGET_CHARS))]
fn fragment<'py>(py: Python<'py>, spans: Vec<(f64, f64, String)>, target_chars: usize) -> PyResult<Bound<'py, PyAny>> {
    if target_chars == 0 {
        return Err(value_error("target_chars must be positive"));
    }
    to_py(py, &fragment_transcript(&spans_to_transcript(spans, None), target_chars))
}

/// A surface-form lexicon for the local concept linker.
#[pyclass(frozen)]
struct Lexicon {
    inner: ConceptLexicon,
}

#[pymethods]
impl Lexicon {
    #[new]
    fn new(path: PathBuf) -> PyResult<Self> {
        let inner = ConceptLexicon::load(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_jsonl(source: &str) -> PyResult<Self> {
        Ok(Self { inner: ConceptLexicon::from_bytes(source.as_bytes()).map_err(value_error)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Leftmost-longest mentions as `(char_offset, surface, [concept ids])`.
    fn link(&self, text: &str) -> Vec<(usize, String, Vec<String>)> {
        link_mentions(text, &self.inner)
            .into_iter()
            .map(|m| (m.char_offset, m.surface, m.candidates.into_iter().map(|c| c.concept_id).collect()))
            .collect()
    }

    /// Ranked concept annotations for a piece of text.
    #[pyo3(signature = (text, top_k=None, use_pagerank=true))]
    fn annotate<'py>(
        &self,
        py: Python<'py>,
        text: &str,
        top_k: Option<usize>,
        use_pagerank: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let mut config = AnnotateConfig { use_pagerank, ..AnnotateConfig::default() };
        if let Some(k) = top_k {
            config.top_k = k;
        }
        to_py(py, &annotate_text(text, &self.inner, &config))
    }

    fn definition(&self, concept_id: &str) -> Option<String> {
        self.inner.definition(concept_id).map(str::to_string)
    }
}

/// Personalized PageRank over the candidate subgraph. Returns
/// `(pagerank, combined_scores)`, both summing to one.
#[pyfunction]
#[pyo3(signature = (candidates, links, damping=0.85))]
fn pagerank(
    candidates: BTreeMap<String, f64>,
    links: BTreeMap<String, Vec<String>>,
    damping: f64,
) -> PyResult<(BTreeMap<String, f64>, BTreeMap<String, f64>)> {
    if !(0.0..1.0).contains(&damping) {
        return Err(value_error("damping must be in [0, 1)"));
    }
    let links: BTreeMap<String, BTreeSet<String>> =
        links.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
    let result = pagerank_rerank(&candidates, &links, &PageRankConfig { damping, ..PageRankConfig::default() });
    Ok((result.pagerank, result.scores))
}

/// Two-sided Wilcoxon signed-rank test on paired differences.
#[pyfunction]
#[pyo3(signature = (differences, zero_method="wilcox"))]
fn wilcoxon<'py>(py: Python<'py>, differences: Vec<f64>, zero_method: &str) -> PyResult<Bound<'py, PyAny>> {
    let method = match zero_method {
        "wilcox" => ZeroMethod::Wilcox,
        "pratt" => ZeroMethod::Pratt,
        other => return Err(value_error(format!("unknown zero_method `{other}`"))),
    };
    to_py(py, &wilcoxon_signed_rank_with(&differences, method).map_err(value_error)?)
}

/// Cosine similarity between a query vector and a fragment's concept weights.
#[pyfunction]
fn relevance(query: BTreeMap<String, f64>, fragment: BTreeMap<String, f64>) -> f64 {
    let annotations: Vec<ConceptAnnotation> = fragment
        .into_iter()
        .map(|(concept_id, score)| ConceptAnnotation { title: concept_id.clone(), concept_id, url: String::new(), score, rank: 0 })
        .collect();
    fragment_relevance(&ConceptVector::from_weights(query), &annotations)
}

/// Discrete highlight level per fragment score.
#[pyfunction]
#[pyo3(signature = (scores, n_levels=4))]
fn highlight_levels(scores: Vec<f64>, n_levels: usize) -> PyResult<Vec<u8>> {
    if n_levels < 2 {
        return Err(value_error("n_levels must be at least 2"));
    }
    Ok(levels(&scores, n_levels).into_iter().map(|l| l.0).collect())
}

/// Reconstructs sessions from event dicts and runs the repeated-pairing
/// analysis; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (events, n_repeats=5, base_seed=0))]
fn analyze<'py>(py: Python<'py>, events: Bound<'py, PyAny>, n_repeats: usize, base_seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let text: String = py.import("json")?.call_method1("dumps", (events,))?.extract()?;
    let events: Vec<InteractionEvent> = serde_json::from_str(&text).map_err(value_error)?;
    let sessions = sessions_from_events(events, DEFAULT_GAP_MERGE).map_err(|failures| {
        let names: Vec<String> = failures.iter().map(|(name, errs)| format!("{name}: {}", errs[0])).collect();
        value_error(format!("invalid sessions: {}", names.join("; ")))
    })?;
    let config = AnalysisConfig { n_repeats, base_seed, ..AnalysisConfig::default() };
    to_py(py, &analyze_sessions(&sessions, &config).map_err(value_error)?)
}

/// Simulated session logs, two per participant, as lists of event dicts.
#[pyfunction]
#[pyo3(signature = (n_participants=40, seed=0, on_exploration_factor=None))]
fn simulate<'py>(
    py: Python<'py>,
    n_participants: usize,
    seed: u64,
    on_exploration_factor: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut profile = SimulationProfile::default();
    if let Some(factor) = on_exploration_factor {
        profile = profile.with_on_exploration_factor(factor);
    }
    to_py(py, &simulate_logs(&profile, n_participants, seed).map_err(value_error)?)
}

#[pymodule]
pub fn cfb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(parse_transcript, m)?)?;
    m.add_function(wrap_pyfunction!(fragment, m)?)?;
    m.add_function(wrap_pyfunction!(pagerank, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(relevance, m)?)?;
    m.add_function(wrap_pyfunction!(highlight_levels, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_class::<Lexicon>()?;
    m.add("DEFAULT_TARGET_CHARS", DEFAULT_TARGET_CHARS)?;
    Ok(())
}
