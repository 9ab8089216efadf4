//! Append-only, per-session line-delimited JSON event logs.
//!
//! An event is acknowledged only after its line has been written and
//! `fdatasync`ed. Appends to one session are serialized by a per-session
//! lock; different sessions proceed in parallel.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::events::{is_safe_id, InteractionEvent, SchemaError};

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("unknown session `{0}`")]
    NotFound(String),
    #[error("event log i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppendOutcome {
    Stored,
    /// The event id was already in the log; nothing was written.
    Duplicate,
}

struct SessionLog {
    file: File,
    ids: HashSet<String>,
}

pub struct EventStore {
    dir: PathBuf,
    sessions: Mutex<HashMap<String, Arc<Mutex<SessionLog>>>>,
}

impl EventStore {
    pub fn open(data_dir: impl AsRef<Path>) -> Result<Self, EventLogError> {
        let dir = data_dir.as_ref().join("events");
        fs::create_dir_all(&dir).map_err(|e| EventLogError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir, sessions: Mutex::new(HashMap::new()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, session_id: &str) -> PathBuf {
        self.dir.join(format!("{session_id}.jsonl"))
    }

    fn session(&self, session_id: &str) -> Result<Arc<Mutex<SessionLog>>, EventLogError> {
        let mut sessions = self.sessions.lock().expect("session table poisoned");
        if let Some(log) = sessions.get(session_id) {
            return Ok(log.clone());
        }
        let path = self.path_of(session_id);
        let existed = path.exists();
        let io = |e: std::io::Error| EventLogError::Io(format!("{}: {e}", path.display()));
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&path).map_err(io)?;
        let mut contents = String::new();
        file.read_to_string(&mut contents).map_err(io)?;
        // a crash can leave a torn final line; cut it so the next append
        // starts on a fresh line
        let complete = contents.rfind('\n').map_or(0, |i| i + 1);
        if complete < contents.len() {
            tracing::warn!(session = session_id, bytes = contents.len() - complete, "truncating torn event line");
            file.set_len(complete as u64).map_err(io)?;
            file.seek(SeekFrom::End(0)).map_err(io)?;
            contents.truncate(complete);
        }
        let ids = parse_lines(&contents).map(|e| e.event_id).collect();
        if !existed {
            if let Ok(d) = File::open(&self.dir) {
                let _ = d.sync_all();
            }
        }
        let log = Arc::new(Mutex::new(SessionLog { file, ids }));
        sessions.insert(session_id.to_string(), log.clone());
        Ok(log)
    }

    /// Validates and durably appends an event. Re-sending an event id that
    /// is already stored is acknowledged without writing.
    pub fn append(&self, event: &InteractionEvent) -> Result<AppendOutcome, EventLogError> {
        event.validate()?;
        let log = self.session(&event.session_id)?;
        let mut log = log.lock().expect("session log poisoned");
        if log.ids.contains(&event.event_id) {
            return Ok(AppendOutcome::Duplicate);
        }
        let mut line = serde_json::to_vec(event).map_err(|e| EventLogError::Io(e.to_string()))?;
        line.push(b'\n');
        let io = |e: std::io::Error| EventLogError::Io(e.to_string());
        log.file.write_all(&line).map_err(io)?;
        log.file.sync_data().map_err(io)?;
        log.ids.insert(event.event_id.clone());
        Ok(AppendOutcome::Stored)
    }

    /// All complete events of a session in append order.
    pub fn read_session(&self, session_id: &str) -> Result<Vec<InteractionEvent>, EventLogError> {
        if !is_safe_id(session_id) {
            return Err(EventLogError::NotFound(session_id.to_string()));
        }
        let path = self.path_of(session_id);
        if !path.exists() {
            return Err(EventLogError::NotFound(session_id.to_string()));
        }
        // hold the session lock so we never observe a half-written line
        let log = self.session(session_id)?;
        let _guard = log.lock().expect("session log poisoned");
        let contents = fs::read_to_string(&path).map_err(|e| EventLogError::Io(e.to_string()))?;
        Ok(parse_lines(&contents).collect())
    }

    pub fn session_ids(&self) -> Result<Vec<String>, EventLogError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(|e| EventLogError::Io(e.to_string()))? {
            let path = entry.map_err(|e| EventLogError::Io(e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("jsonl") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}

fn parse_lines(contents: &str) -> impl Iterator<Item = InteractionEvent> + '_ {
    contents.lines().filter(|l| !l.trim().is_empty()).filter_map(|l| match serde_json::from_str(l) {
        Ok(e) => Some(e),
        Err(err) => {
            tracing::warn!(error = %err, "skipping unreadable event line");
            None
        }
    })
}
