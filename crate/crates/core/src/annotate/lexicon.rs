use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AnnotateError;

/// Tolerance on the per-surface prior sum.
const PRIOR_SUM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptInfo {
    pub id: String,
    pub title: String,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub concept_id: String,
    pub prior: f64,
}

/// Surface forms, concept graph and definitions used by the local linker.
///
/// Immutable once loaded; share it behind an `Arc` across workers.
#[derive(Debug, Clone, Default)]
pub struct ConceptLexicon {
    entries: HashMap<String, Vec<Candidate>>,
    concepts: BTreeMap<String, ConceptInfo>,
    links: BTreeMap<String, BTreeSet<String>>,
    definitions: HashMap<String, String>,
    max_surface_chars: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConceptRecord {
    id: String,
    title: String,
    #[serde(default)]
    url: String,
    prior: f64,
}

#[derive(Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum Record {
    Surface { surface: String, concepts: Vec<ConceptRecord> },
    Links { links: BTreeMap<String, Vec<String>> },
    Definitions { definitions: BTreeMap<String, String> },
}

/// Key under which surface forms are stored and looked up.
pub fn surface_key(surface: &str) -> String {
    surface.trim().to_lowercase()
}

impl ConceptLexicon {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, AnnotateError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| AnnotateError::Io(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    /// Parses line-delimited JSON records. Errors carry the 1-based line.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AnnotateError> {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| AnnotateError::Lexicon { line: 0, message: "not valid UTF-8".into() })?;
        let mut lexicon = ConceptLexicon::default();
        let mut surface_lines: HashMap<String, usize> = HashMap::new();
        let mut link_lines: BTreeMap<String, usize> = BTreeMap::new();

        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| AnnotateError::Lexicon { line: line_no, message };
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(line).map_err(|e| err(format!("unrecognized record: {e}")))?;
            match record {
                Record::Surface { surface, concepts } => {
                    let key = surface_key(&surface);
                    if key.is_empty() {
                        return Err(err("empty surface form".into()));
                    }
                    let candidates = lexicon.entries.entry(key.clone()).or_default();
                    for c in concepts {
                        if !(c.prior > 0.0 && c.prior <= 1.0) {
                            return Err(err(format!("prior {} for `{}` outside (0, 1]", c.prior, c.id)));
                        }
                        if c.id.is_empty() {
                            return Err(err("concept with empty id".into()));
                        }
                        if candidates.iter().any(|x| x.concept_id == c.id) {
                            return Err(err(format!("concept `{}` listed twice for surface `{surface}`", c.id)));
                        }
                        candidates.push(Candidate { concept_id: c.id.clone(), prior: c.prior });
                        lexicon
                            .concepts
                            .entry(c.id.clone())
                            .or_insert(ConceptInfo { id: c.id, title: c.title, url: c.url });
                    }
                    let sum: f64 = candidates.iter().map(|c| c.prior).sum();
                    if sum > 1.0 + PRIOR_SUM_EPS {
                        return Err(err(format!("priors for surface `{surface}` sum to {sum} > 1")));
                    }
                    lexicon.max_surface_chars = lexicon.max_surface_chars.max(key.chars().count());
                    surface_lines.insert(key, line_no);
                }
                Record::Links { links } => {
                    for (from, to) in links {
                        link_lines.entry(from.clone()).or_insert(line_no);
                        lexicon.links.entry(from).or_default().extend(to);
                    }
                }
                Record::Definitions { definitions } => lexicon.definitions.extend(definitions),
            }
        }

        for (from, targets) in &lexicon.links {
            for id in std::iter::once(from).chain(targets) {
                if !lexicon.concepts.contains_key(id) && !lexicon.definitions.contains_key(id) {
                    return Err(AnnotateError::Lexicon {
                        line: link_lines[from],
                        message: format!("link references unknown concept `{id}`"),
                    });
                }
            }
        }
        Ok(lexicon)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.definitions.is_empty()
    }

    /// Number of distinct surface forms.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn candidates(&self, surface: &str) -> Option<&[Candidate]> {
        self.entries.get(&surface_key(surface)).map(Vec::as_slice)
    }

    pub(crate) fn candidates_by_key(&self, key: &str) -> Option<&[Candidate]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn contains_surface(&self, surface: &str) -> bool {
        self.entries.contains_key(&surface_key(surface))
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn max_surface_chars(&self) -> usize {
        self.max_surface_chars
    }

    pub fn concept(&self, id: &str) -> Option<&ConceptInfo> {
        self.concepts.get(id)
    }

    pub fn links(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.links
    }

    /// Stored definition; an empty string counts as missing.
    pub fn definition(&self, concept_id: &str) -> Option<&str> {
        self.definitions.get(concept_id).map(String::as_str).filter(|d| !d.trim().is_empty())
    }
}
