//! Randomized cross-participant pairing of control and treatment sessions.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::session::TaskSession;
use crate::events::Condition;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingOptions {
    /// Only pair sessions with the same task order instead of merely
    /// preferring it.
    pub strict_order: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    /// (CFB-off index, CFB-on index) into the input slice.
    pub pairs: Vec<(usize, usize)>,
    pub skipped_topics: Vec<String>,
}

/// Within each topic, matches CFB-off sessions to CFB-on sessions of a
/// different participant without replacement. Candidate lists are shuffled
/// with the seed, same-task-order partners are tried first, and augmenting
/// paths make the matching maximum so no avoidable leftovers are dropped.
pub fn pair_observations(sessions: &[TaskSession], seed: u64, options: PairingOptions) -> Pairing {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut topics: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, s) in sessions.iter().enumerate() {
        let entry = topics.entry(s.info.topic.as_str()).or_default();
        match s.info.condition {
            Condition::CfbOff => entry.0.push(i),
            Condition::CfbOn => entry.1.push(i),
        }
    }

    let mut pairs = Vec::new();
    let mut skipped_topics = Vec::new();
    for (topic, (mut off, mut on)) in topics {
        if off.is_empty() || on.is_empty() {
            tracing::warn!(topic, off = off.len(), on = on.len(), "topic lacks one condition; skipped");
            skipped_topics.push(topic.to_string());
            continue;
        }
        off.shuffle(&mut rng);
        on.shuffle(&mut rng);

        let adjacency: Vec<Vec<usize>> = off
            .iter()
            .map(|&o| {
                let eligible = |&&c: &&usize| sessions[c].info.participant_id != sessions[o].info.participant_id;
                let same_order = |&&c: &&usize| sessions[c].task_order == sessions[o].task_order;
                let mut list: Vec<usize> = on.iter().filter(eligible).filter(same_order).copied().collect();
                if !options.strict_order {
                    list.extend(on.iter().filter(eligible).filter(|c| !same_order(c)).copied());
                }
                list
            })
            .collect();

        let mut matched_on: BTreeMap<usize, usize> = BTreeMap::new();
        for slot in 0..off.len() {
            let mut visited = Vec::new();
            augment(slot, &adjacency, &mut matched_on, &mut visited);
        }
        let mut topic_pairs: Vec<(usize, usize)> = matched_on.into_iter().map(|(c, slot)| (off[slot], c)).collect();
        topic_pairs.sort_unstable();
        pairs.extend(topic_pairs);
    }
    Pairing { pairs, skipped_topics }
}

fn augment(slot: usize, adjacency: &[Vec<usize>], matched_on: &mut BTreeMap<usize, usize>, visited: &mut Vec<usize>) -> bool {
    for &candidate in &adjacency[slot] {
        if visited.contains(&candidate) {
            continue;
        }
        visited.push(candidate);
        let free = match matched_on.get(&candidate) {
            None => true,
            Some(&other) => augment(other, adjacency, matched_on, visited),
        };
        if free {
            matched_on.insert(candidate, slot);
            return true;
        }
    }
    false
}
