use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use arc_swap::ArcSwap;

use super::{CatalogError, EnrichedVideo};
use crate::events::is_safe_id;

pub type Snapshot = BTreeMap<String, Arc<EnrichedVideo>>;

/// Directory of JSON documents, one per video, with an in-memory snapshot
/// that readers access without locking.
pub struct CatalogStore {
    dir: PathBuf,
    snapshot: ArcSwap<Snapshot>,
    writer: Mutex<()>,
}

impl CatalogStore {
    /// Opens `<data_dir>/videos`, creating it if needed. `data_dir` itself
    /// must already exist.
    pub fn open(data_dir: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let data_dir = data_dir.as_ref();
        if !data_dir.is_dir() {
            return Err(CatalogError::Io(format!("data directory {} does not exist", data_dir.display())));
        }
        let dir = data_dir.join("videos");
        fs::create_dir_all(&dir).map_err(|e| CatalogError::Io(format!("{}: {e}", dir.display())))?;
        let store = Self { dir, snapshot: ArcSwap::from_pointee(Snapshot::new()), writer: Mutex::new(()) };
        store.reload()?;
        Ok(store)
    }

    /// Re-reads every document from disk.
    pub fn reload(&self) -> Result<(), CatalogError> {
        let mut snapshot = Snapshot::new();
        let entries = fs::read_dir(&self.dir).map_err(|e| CatalogError::Io(e.to_string()))?;
        for entry in entries {
            let path = entry.map_err(|e| CatalogError::Io(e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let video = read_video(&path)?;
            snapshot.insert(video.video_id.clone(), Arc::new(video));
        }
        self.snapshot.store(Arc::new(snapshot));
        Ok(())
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.load_full()
    }

    pub fn contains(&self, video_id: &str) -> bool {
        self.snapshot.load().contains_key(video_id)
    }

    pub fn load(&self, video_id: &str) -> Result<Arc<EnrichedVideo>, CatalogError> {
        self.snapshot.load().get(video_id).cloned().ok_or_else(|| CatalogError::NotFound(video_id.to_string()))
    }

    pub fn list(&self) -> Vec<Arc<EnrichedVideo>> {
        self.snapshot.load().values().cloned().collect()
    }

    /// Writes the document atomically (temp file + rename) and publishes a
    /// new snapshot. An existing id is a conflict unless `overwrite` is set.
    pub fn store(&self, video: EnrichedVideo, overwrite: bool) -> Result<Arc<EnrichedVideo>, CatalogError> {
        if !is_safe_id(&video.video_id) {
            return Err(CatalogError::InvalidId(video.video_id));
        }
        video.check().map_err(CatalogError::Invalid)?;
        let _guard = self.writer.lock().expect("catalog writer poisoned");
        if !overwrite && self.contains(&video.video_id) {
            return Err(CatalogError::Conflict(video.video_id));
        }
        let path = self.dir.join(format!("{}.json", video.video_id));
        let tmp = self.dir.join(format!(".{}.json.tmp", video.video_id));
        let json = serde_json::to_vec_pretty(&video).map_err(|e| CatalogError::Io(e.to_string()))?;
        let io = |e: std::io::Error| CatalogError::Io(format!("{}: {e}", path.display()));
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            f.write_all(&json).map_err(io)?;
            f.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, &path).map_err(io)?;
        if let Ok(d) = fs::File::open(&self.dir) {
            let _ = d.sync_all();
        }

        let video = Arc::new(video);
        let mut next = Snapshot::clone(&self.snapshot.load());
        next.insert(video.video_id.clone(), video.clone());
        self.snapshot.store(Arc::new(next));
        Ok(video)
    }
}

fn read_video(path: &Path) -> Result<EnrichedVideo, CatalogError> {
    let bytes = fs::read(path).map_err(|e| CatalogError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| CatalogError::Corrupt { path: path.display().to_string(), message: e.to_string() })
}
