//! Independent reference implementations used to check the production code.
//!
//! Each oracle is written for clarity rather than speed and shares no code
//! with the library beyond its public data types.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use cfb_core::annotate::ConceptLexicon;
use cfb_core::transcript::{TimedSpan, Transcript};
use rand::Rng;

/// Fragment boundaries as char ranges, found by walking the literal
/// concatenated text one span at a time.
pub fn fragment_oracle(transcript: &Transcript, target: usize) -> Vec<(usize, usize)> {
    let pieces: Vec<String> = transcript.spans.iter().map(|s| format!("{} ", s.text)).collect();
    let mut out: Vec<(usize, usize)> = Vec::new();
    let mut current = String::new();
    let mut current_len = 0;
    let mut start = 0;
    for piece in &pieces {
        current.push_str(piece);
        current_len += piece.chars().count();
        if current_len >= target {
            out.push((start, start + current_len));
            start += current_len;
            current.clear();
            current_len = 0;
        }
    }
    if !current.is_empty() {
        if !out.is_empty() && 4 * current_len < target {
            out.last_mut().unwrap().1 += current_len;
        } else {
            out.push((start, start + current_len));
        }
    }
    out
}

/// A random normalized transcript whose concatenated text is at most
/// `max_chars` long. Span lengths vary widely so both short and long
/// spans appear near boundaries.
pub fn random_transcript(rng: &mut impl Rng, max_chars: usize) -> Transcript {
    let budget = rng.random_range(0..=max_chars);
    let mut spans = Vec::new();
    let mut used = 0;
    let mut t = 0.0;
    let alphabet: Vec<char> = "abcdefghij klmnopqrstuvwxyzé".chars().collect();
    while used < budget {
        let room = budget - used;
        if room < 2 {
            break;
        }
        let cap = if rng.random_bool(0.1) { 1500 } else { 200 };
        let len = rng.random_range(1..=cap.min(room - 1));
        let mut text: String = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
        // spans never start or end with whitespace after normalization
        text = text.trim().to_string();
        if text.is_empty() {
            text.push('x');
        }
        let dur = rng.random_range(0.5..8.0);
        let gap = if rng.random_bool(0.2) { rng.random_range(0.0..3.0) } else { 0.0 };
        spans.push(TimedSpan::new(t + gap, t + gap + dur, text.clone()));
        t += gap + dur;
        used += text.chars().count() + 1;
    }
    Transcript::new("rand", t, spans)
}

/// Every acceptable (start, end, lowercased surface) match, found by
/// enumerating substrings.
pub fn linker_oracle(text: &str, surfaces: &HashSet<String>) -> Vec<(usize, String)> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let longest = surfaces.iter().map(|s| s.chars().count()).max().unwrap_or(0);
    let word = |c: char| c.is_alphanumeric();
    let mut all: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        if chars[i].is_whitespace() || (i > 0 && word(chars[i - 1])) {
            continue;
        }
        for j in i + 1..=n.min(i + longest) {
            if j < n && word(chars[j]) {
                continue;
            }
            let sub: String = chars[i..j].iter().collect::<String>().to_lowercase();
            if surfaces.contains(&sub) {
                all.push((i, j));
            }
        }
    }
    // leftmost first, longest among equal starts, no overlaps
    all.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut picked = Vec::new();
    let mut cursor = 0;
    for (i, j) in all {
        if i >= cursor {
            picked.push((i, chars[i..j].iter().collect()));
            cursor = j;
        }
    }
    picked
}

/// Lexicon source with `n` random surfaces over a small syllable alphabet,
/// some of them multi-word and some sharing prefixes.
pub fn random_lexicon_source(rng: &mut impl Rng, n: usize) -> (String, HashSet<String>) {
    let syllables = ["ka", "lo", "mi", "ne", "ra", "tu", "si", "ve", "do", "pa"];
    let mut surfaces = HashSet::new();
    let mut src = String::new();
    while surfaces.len() < n {
        let words = rng.random_range(1..=3);
        let surface: Vec<String> = (0..words)
            .map(|_| (0..rng.random_range(1..=3)).map(|_| syllables[rng.random_range(0..syllables.len())]).collect())
            .collect();
        let surface = surface.join(" ");
        if !surfaces.insert(surface.clone()) {
            continue;
        }
        let id = format!("C{}", surfaces.len());
        src.push_str(&format!(
            "{{\"surface\":\"{surface}\",\"concepts\":[{{\"id\":\"{id}\",\"title\":\"{id}\",\"url\":\"\",\"prior\":1.0}}]}}\n"
        ));
    }
    (src, surfaces)
}

/// Random text built from lexicon syllables, separators and mixed case.
pub fn random_linker_text(rng: &mut impl Rng, max_chars: usize) -> String {
    let tokens = ["ka", "lo", "mi", "ne", "ra", "tu", "si", "ve", "do", "pa", "KA", "Lo", "x", "9"];
    let seps = [" ", " ", " ", "  ", ", ", ". ", "-", "\n", ""];
    let target = rng.random_range(0..=max_chars);
    let mut out = String::new();
    while out.chars().count() < target {
        out.push_str(tokens[rng.random_range(0..tokens.len())]);
        out.push_str(seps[rng.random_range(0..seps.len())]);
    }
    out.chars().take(target).collect()
}

pub fn lexicon_surface_set(lexicon: &ConceptLexicon) -> HashSet<String> {
    lexicon.surfaces().map(str::to_string).collect()
}

/// Dense power iteration on the explicit Google matrix, run far past
/// convergence. Returns (stationary vector, final scores) keyed by id.
pub fn pagerank_oracle(
    candidates: &BTreeMap<String, f64>,
    links: &BTreeMap<String, BTreeSet<String>>,
    damping: f64,
) -> (BTreeMap<String, f64>, BTreeMap<String, f64>) {
    let ids: Vec<&String> = candidates.keys().collect();
    let n = ids.len();
    let total: f64 = candidates.values().sum();
    let t: Vec<f64> = candidates.values().map(|v| v / total).collect();
    // column j holds where node j sends its mass
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        let targets: Vec<usize> = (0..n)
            .filter(|&i| i != j && links.get(ids[j]).is_some_and(|s| s.contains(ids[i])))
            .collect();
        if targets.is_empty() {
            for i in 0..n {
                m[i][j] = t[i];
            }
        } else {
            for &i in &targets {
                m[i][j] = 1.0 / targets.len() as f64;
            }
        }
    }
    let g: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| damping * m[i][j] + (1.0 - damping) * t[i]).collect()).collect();
    let mut x = t.clone();
    for _ in 0..5000 {
        x = (0..n).map(|i| (0..n).map(|j| g[i][j] * x[j]).sum()).collect();
    }
    let prod: Vec<f64> = x.iter().zip(&t).map(|(a, b)| a * b).collect();
    let ptotal: f64 = prod.iter().sum();
    let pr = ids.iter().zip(&x).map(|(k, v)| ((*k).clone(), *v)).collect();
    let scores = ids.iter().zip(&prod).map(|(k, v)| ((*k).clone(), v / ptotal)).collect();
    (pr, scores)
}

/// Average ranks of |d| over the non-zero differences by direct counting.
pub fn oracle_signed_ranks(differences: &[f64]) -> Vec<(f64, bool)> {
    let nz: Vec<f64> = differences.iter().copied().filter(|d| *d != 0.0).collect();
    nz.iter()
        .map(|d| {
            let a = d.abs();
            let below = nz.iter().filter(|x| x.abs() < a).count() as f64;
            let equal = nz.iter().filter(|x| x.abs() == a).count() as f64;
            (below + (equal + 1.0) / 2.0, *d > 0.0)
        })
        .collect()
}

/// Exact two-sided p by visiting all 2^n sign assignments.
pub fn wilcoxon_enumeration(differences: &[f64]) -> f64 {
    let signed = oracle_signed_ranks(differences);
    let n = signed.len();
    if n == 0 {
        return 1.0;
    }
    let ranks: Vec<f64> = signed.iter().map(|x| x.0).collect();
    let total: f64 = ranks.iter().sum();
    let w_plus: f64 = signed.iter().filter(|x| x.1).map(|x| x.0).sum();
    let observed = w_plus.min(total - w_plus);
    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| ranks[b]).sum();
        if w.min(total - w) <= observed + 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

/// Exact two-sided p by tabulating the full null distribution of W+ with a
/// hash map from sum to count. Equivalent to enumeration but feasible for
/// n = 30.
pub fn wilcoxon_distribution(differences: &[f64]) -> f64 {
    let signed = oracle_signed_ranks(differences);
    let n = signed.len();
    if n == 0 {
        return 1.0;
    }
    let ranks: Vec<f64> = signed.iter().map(|x| x.0).collect();
    let total: f64 = ranks.iter().sum();
    let w_plus: f64 = signed.iter().filter(|x| x.1).map(|x| x.0).sum();
    let observed = w_plus.min(total - w_plus);
    // keys are sums in half-rank units
    let mut dist: HashMap<i64, f64> = HashMap::from([(0, 1.0)]);
    for r in &ranks {
        let step = (r * 2.0).round() as i64;
        let mut next = dist.clone();
        for (s, c) in &dist {
            *next.entry(s + step).or_default() += c;
        }
        dist = next;
    }
    let total2 = (total * 2.0).round() as i64;
    let obs2 = (observed * 2.0).round() as i64;
    let extreme: f64 = dist.iter().filter(|(s, _)| (**s).min(total2 - **s) <= obs2).map(|(_, c)| c).sum();
    extreme / 2f64.powi(n as i32)
}

/// Cosine of two sparse vectors by explicit densification.
pub fn cosine_oracle(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    let va: Vec<f64> = keys.iter().map(|k| a.get(*k).copied().unwrap_or(0.0).max(0.0)).collect();
    let vb: Vec<f64> = keys.iter().map(|k| b.get(*k).copied().unwrap_or(0.0).max(0.0)).collect();
    let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    va.iter().zip(&vb).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
}

/// Videos ranked by their best fragment cosine, highest first.
pub fn search_oracle(
    query: &BTreeMap<String, f64>,
    videos: &[(String, Vec<BTreeMap<String, f64>>)],
) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = videos
        .iter()
        .map(|(id, frags)| (id.clone(), frags.iter().map(|f| cosine_oracle(query, f)).fold(0.0, f64::max)))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored
}
