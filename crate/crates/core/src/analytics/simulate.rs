//! Seeded generator of schema-valid study logs: every participant does one
//! CFB-on and one CFB-off task on different topics, with condition and topic
//! order counterbalanced by a shuffled Latin square.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{Condition, EventKind, InteractionEvent, Screen, Segment};

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// Per-condition behaviour. Means are for exponential (durations) or
/// Poisson (counts) draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionProfile {
    pub results_hovers_mean: f64,
    pub hover_seconds_mean: f64,
    pub videos_opened_mean: f64,
    pub watch_seconds_mean: f64,
    pub seeks_per_video_mean: f64,
    pub player_hovers_mean: f64,
    pub selection_prob: f64,
    pub removal_prob: f64,
    pub quick_removal_prob: f64,
    pub idle_seconds_mean: f64,
}

impl Default for ConditionProfile {
    fn default() -> Self {
        Self {
            results_hovers_mean: 5.0,
            hover_seconds_mean: 3.0,
            videos_opened_mean: 3.0,
            watch_seconds_mean: 90.0,
            seeks_per_video_mean: 3.0,
            player_hovers_mean: 2.0,
            selection_prob: 0.6,
            removal_prob: 0.2,
            quick_removal_prob: 0.5,
            idle_seconds_mean: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationProfile {
    pub topics: [String; 2],
    pub n_results: u32,
    pub min_video_seconds: f64,
    pub max_video_seconds: f64,
    /// Mean of the exponential used to pick how deep in the results list a
    /// participant looks.
    pub rank_depth_mean: f64,
    pub cfb_off: ConditionProfile,
    pub cfb_on: ConditionProfile,
}

impl Default for SimulationProfile {
    fn default() -> Self {
        Self {
            topics: ["climate change".into(), "machine learning".into()],
            n_results: 18,
            min_video_seconds: 600.0,
            max_video_seconds: 3600.0,
            rank_depth_mean: 5.0,
            cfb_off: ConditionProfile::default(),
            cfb_on: ConditionProfile::default(),
        }
    }
}

impl ConditionProfile {
    fn validate(&self, name: &str) -> Result<(), SimulateError> {
        let means = [
            ("results_hovers_mean", self.results_hovers_mean),
            ("hover_seconds_mean", self.hover_seconds_mean),
            ("videos_opened_mean", self.videos_opened_mean),
            ("watch_seconds_mean", self.watch_seconds_mean),
            ("seeks_per_video_mean", self.seeks_per_video_mean),
            ("player_hovers_mean", self.player_hovers_mean),
            ("idle_seconds_mean", self.idle_seconds_mean),
        ];
        for (field, v) in means {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SimulateError::Profile(format!("{name}.{field} must be a finite non-negative number")));
            }
        }
        for (field, v) in [
            ("selection_prob", self.selection_prob),
            ("removal_prob", self.removal_prob),
            ("quick_removal_prob", self.quick_removal_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimulateError::Profile(format!("{name}.{field} must be within [0, 1]")));
            }
        }
        Ok(())
    }
}

impl SimulationProfile {
    pub fn from_json(text: &str) -> Result<Self, SimulateError> {
        let profile: Self = serde_json::from_str(text).map_err(|e| SimulateError::Profile(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        if self.topics[0] == self.topics[1] {
            return Err(SimulateError::Profile("the two topics must differ".into()));
        }
        if self.n_results == 0 {
            return Err(SimulateError::Profile("n_results must be at least 1".into()));
        }
        if !(self.min_video_seconds > 0.0 && self.max_video_seconds >= self.min_video_seconds) {
            return Err(SimulateError::Profile("video length range must satisfy 0 < min <= max".into()));
        }
        if !(self.rank_depth_mean >= 0.0) {
            return Err(SimulateError::Profile("rank_depth_mean must be non-negative".into()));
        }
        self.cfb_off.validate("cfb_off")?;
        self.cfb_on.validate("cfb_on")
    }

    /// CFB-on behaves like CFB-off except that each hover lasts `factor`
    /// times as long on average.
    pub fn with_on_exploration_factor(mut self, factor: f64) -> Self {
        self.cfb_on = ConditionProfile {
            hover_seconds_mean: self.cfb_off.hover_seconds_mean * factor,
            ..self.cfb_off.clone()
        };
        self
    }

    pub fn condition(&self, condition: Condition) -> &ConditionProfile {
        match condition {
            Condition::CfbOff => &self.cfb_off,
            Condition::CfbOn => &self.cfb_on,
        }
    }
}

const EPOCH_MS: i64 = 1_700_000_000_000;

/// Latin square over (condition, topic index) orders.
const ORDERS: [[(Condition, usize); 2]; 4] = [
    [(Condition::CfbOff, 0), (Condition::CfbOn, 1)],
    [(Condition::CfbOn, 1), (Condition::CfbOff, 0)],
    [(Condition::CfbOff, 1), (Condition::CfbOn, 0)],
    [(Condition::CfbOn, 0), (Condition::CfbOff, 1)],
];

fn exp_draw(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
}

fn poisson_draw(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as usize
}

struct Emitter<'a> {
    session_id: String,
    participant_id: String,
    task_id: String,
    condition: Condition,
    topic: &'a str,
    start_ms: i64,
    events: Vec<InteractionEvent>,
}

impl Emitter<'_> {
    fn emit(&mut self, t: f64, kind: EventKind, screen: Screen, fill: impl FnOnce(&mut InteractionEvent)) {
        let mut e = InteractionEvent {
            event_id: format!("{}-{:04}", self.session_id, self.events.len()),
            session_id: self.session_id.clone(),
            participant_id: self.participant_id.clone(),
            task_id: self.task_id.clone(),
            condition: self.condition,
            topic: self.topic.to_string(),
            kind,
            video_id: None,
            video_rank: None,
            video_duration: None,
            screen,
            position: None,
            segment: None,
            wall_time: self.start_ms + (t * 1000.0).round() as i64,
        };
        fill(&mut e);
        self.events.push(e);
    }
}

struct Catalog {
    durations: Vec<f64>,
}

impl Catalog {
    fn video_id(topic_index: usize, rank: u32) -> String {
        format!("topic{topic_index}-video{rank:02}")
    }
}

fn pick_rank(rng: &mut ChaCha8Rng, profile: &SimulationProfile) -> u32 {
    let depth = exp_draw(rng, profile.rank_depth_mean).floor() as u32;
    (1 + depth).min(profile.n_results)
}

fn simulate_task(
    rng: &mut ChaCha8Rng,
    profile: &SimulationProfile,
    catalog: &Catalog,
    emitter: &mut Emitter<'_>,
    topic_index: usize,
) -> f64 {
    let behaviour = profile.condition(emitter.condition).clone();
    let mut t = 0.0;
    emitter.emit(t, EventKind::TaskStart, Screen::Results, |_| {});
    let mut late_removals: Vec<(String, Segment)> = Vec::new();

    let visits = poisson_draw(rng, behaviour.videos_opened_mean);
    for visit in 0..=visits {
        for _ in 0..poisson_draw(rng, behaviour.results_hovers_mean) {
            t += 0.2 + exp_draw(rng, behaviour.idle_seconds_mean);
            let rank = pick_rank(rng, profile);
            let video = Catalog::video_id(topic_index, rank);
            emitter.emit(t, EventKind::HoverStart, Screen::Results, |e| {
                e.video_id = Some(video.clone());
                e.video_rank = Some(rank);
            });
            t += 0.2 + exp_draw(rng, behaviour.hover_seconds_mean);
            emitter.emit(t, EventKind::HoverEnd, Screen::Results, |e| e.video_id = Some(video));
        }
        if visit == visits {
            break;
        }

        t += 0.5 + exp_draw(rng, behaviour.idle_seconds_mean);
        let rank = pick_rank(rng, profile);
        let video = Catalog::video_id(topic_index, rank);
        let duration = catalog.durations[rank as usize - 1];
        emitter.emit(t, EventKind::OpenVideo, Screen::Results, |e| {
            e.video_id = Some(video.clone());
            e.video_rank = Some(rank);
            e.video_duration = Some(duration);
        });
        t += 1.0;
        let mut position = 0.0;
        emitter.emit(t, EventKind::Play, Screen::Player, |e| {
            e.video_id = Some(video.clone());
            e.position = Some(0.0);
        });

        let seeks = poisson_draw(rng, behaviour.seeks_per_video_mean);
        let watch = 1.0 + exp_draw(rng, behaviour.watch_seconds_mean);
        let chunk = watch / (seeks + 1) as f64;
        for k in 0..=seeks {
            t += chunk;
            position = (position + chunk).min(duration);
            if k < seeks {
                position = rng.random_range(0.0..duration * 0.9);
                emitter.emit(t, EventKind::Seek, Screen::Player, |e| {
                    e.video_id = Some(video.clone());
                    e.position = Some(position);
                });
            }
        }
        emitter.emit(t, EventKind::Pause, Screen::Player, |e| {
            e.video_id = Some(video.clone());
            e.position = Some(position);
        });

        for _ in 0..poisson_draw(rng, behaviour.player_hovers_mean) {
            t += 0.2 + exp_draw(rng, behaviour.idle_seconds_mean);
            emitter.emit(t, EventKind::HoverStart, Screen::Player, |e| e.video_id = Some(video.clone()));
            t += 0.2 + exp_draw(rng, behaviour.hover_seconds_mean);
            emitter.emit(t, EventKind::HoverEnd, Screen::Player, |e| e.video_id = Some(video.clone()));
        }

        if rng.random_bool(behaviour.selection_prob) {
            t += 1.0 + exp_draw(rng, behaviour.idle_seconds_mean);
            let start = rng.random_range(0.0..duration * 0.8);
            let end = (start + 10.0 + exp_draw(rng, 60.0)).min(duration);
            let segment = Segment { start, end };
            emitter.emit(t, EventKind::SelectSegment, Screen::Player, |e| {
                e.video_id = Some(video.clone());
                e.segment = Some(segment);
            });
            if rng.random_bool(behaviour.removal_prob) {
                if rng.random_bool(behaviour.quick_removal_prob) {
                    t += 1.0 + rng.random_range(0.0..30.0);
                    emitter.emit(t, EventKind::RemoveSegment, Screen::Player, |e| {
                        e.video_id = Some(video.clone());
                        e.segment = Some(segment);
                    });
                } else {
                    late_removals.push((video.clone(), segment));
                }
            }
        }
        t += 1.0;
        emitter.emit(t, EventKind::CloseVideo, Screen::Player, |e| e.video_id = Some(video));
    }

    if !late_removals.is_empty() {
        // ensure these land well past the quick-removal window
        t += 61.0;
        for (video, segment) in late_removals {
            t += 1.0;
            emitter.emit(t, EventKind::RemoveSegment, Screen::Results, |e| {
                e.video_id = Some(video);
                e.segment = Some(segment);
            });
        }
    }
    t += 1.0 + exp_draw(rng, behaviour.idle_seconds_mean);
    emitter.emit(t, EventKind::TaskEnd, Screen::Results, |_| {});
    t
}

/// Generates `n_participants × 2` session logs, deterministic per seed.
pub fn simulate(
    profile: &SimulationProfile,
    n_participants: usize,
    seed: u64,
) -> Result<Vec<Vec<InteractionEvent>>, SimulateError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let catalogs: Vec<Catalog> = (0..2)
        .map(|_| Catalog {
            durations: (0..profile.n_results)
                .map(|_| {
                    let secs = rng.random_range(profile.min_video_seconds..=profile.max_video_seconds);
                    secs.round()
                })
                .collect(),
        })
        .collect();
    let mut rows: Vec<usize> = (0..ORDERS.len()).collect();
    rand::seq::SliceRandom::shuffle(rows.as_mut_slice(), &mut rng);

    let mut sessions = Vec::with_capacity(n_participants * 2);
    for p in 0..n_participants {
        let order = ORDERS[rows[p % rows.len()]];
        let mut start_ms = EPOCH_MS + p as i64 * 10_000_000;
        for (task, (condition, topic_index)) in order.into_iter().enumerate() {
            let mut task_rng = ChaCha8Rng::seed_from_u64(seed);
            task_rng.set_stream((p * 2 + task) as u64 + 1);
            let mut emitter = Emitter {
                session_id: format!("sim-p{p:03}-t{}", task + 1),
                participant_id: format!("p{p:03}"),
                task_id: format!("t{}", task + 1),
                condition,
                topic: &profile.topics[topic_index],
                start_ms,
                events: Vec::new(),
            };
            let length = simulate_task(&mut task_rng, profile, &catalogs[topic_index], &mut emitter, topic_index);
            start_ms += (length * 1000.0).round() as i64 + 60_000;
            sessions.push(emitter.events);
        }
    }
    Ok(sessions)
}

/// Copies a session log under a new participant, condition and session id.
pub fn relabel_session(
    events: &[InteractionEvent],
    participant_id: &str,
    condition: Condition,
    session_id: &str,
) -> Vec<InteractionEvent> {
    events
        .iter()
        .enumerate()
        .map(|(i, e)| InteractionEvent {
            event_id: format!("{session_id}-{i:04}"),
            session_id: session_id.to_string(),
            participant_id: participant_id.to_string(),
            condition,
            ..e.clone()
        })
        .collect()
}

/// Writes one `<session_id>.jsonl` file per session.
pub fn write_sessions(dir: &Path, sessions: &[Vec<InteractionEvent>]) -> Result<(), SimulateError> {
    fs::create_dir_all(dir).map_err(|e| SimulateError::Io(format!("{}: {e}", dir.display())))?;
    for events in sessions {
        let Some(first) = events.first() else { continue };
        let path = dir.join(format!("{}.jsonl", first.session_id));
        let mut out = Vec::new();
        for e in events {
            serde_json::to_writer(&mut out, e).map_err(|e| SimulateError::Io(e.to_string()))?;
            out.push(b'\n');
        }
        fs::File::create(&path)
            .and_then(|mut f| f.write_all(&out))
            .map_err(|e| SimulateError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
