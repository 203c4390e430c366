//! Append-only record of generator responses, keyed by request id.
//!
//! Stored as one JSON object per line. Replay requires the prompt to match
//! byte for byte: a changed prompt under a reused id is a cache miss, and
//! recording it again appends a fresh line. On load, the last line for an id
//! wins, so the newest response shadows stale ones without rewriting.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::LlmError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub request_id: String,
    pub prompt: String,
    pub response: String,
    pub timestamp: u64,
}

#[derive(Debug)]
pub struct GeneratorTranscript {
    path: Option<PathBuf>,
    entries: Mutex<HashMap<String, TranscriptEntry>>,
}

impl GeneratorTranscript {
    /// A transcript that lives only for this process; useful for tests and
    /// for callers that do not want a cache file.
    pub fn in_memory() -> GeneratorTranscript {
        GeneratorTranscript { path: None, entries: Mutex::new(HashMap::new()) }
    }

    /// Opens (or prepares to create) the transcript at `path`. An existing
    /// file is loaded eagerly; a missing one appears on the first record.
    pub fn open(path: impl AsRef<Path>) -> Result<GeneratorTranscript, LlmError> {
        let path = path.as_ref().to_owned();
        let mut entries = HashMap::new();
        match File::open(&path) {
            Ok(file) => {
                for (number, line) in BufReader::new(file).lines().enumerate() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let entry: TranscriptEntry =
                        serde_json::from_str(&line).map_err(|e| LlmError::TranscriptFormat {
                            line: number + 1,
                            message: e.to_string(),
                        })?;
                    entries.insert(entry.request_id.clone(), entry);
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        Ok(GeneratorTranscript { path: Some(path), entries: Mutex::new(entries) })
    }

    /// The prior response for this exact (request id, prompt) pair, if any.
    pub fn replay(&self, request_id: &str, prompt: &str) -> Option<String> {
        let entries = self.entries.lock().unwrap();
        let entry = entries.get(request_id)?;
        if entry.prompt == prompt {
            Some(entry.response.clone())
        } else {
            None
        }
    }

    /// Appends one entry, both in memory and (when file-backed) on disk.
    /// The lock is held across the write so concurrent callers interleave
    /// whole lines.
    pub fn record(&self, request_id: &str, prompt: &str, response: &str) -> io::Result<()> {
        let entry = TranscriptEntry {
            request_id: request_id.to_owned(),
            prompt: prompt.to_owned(),
            response: response.to_owned(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mut entries = self.entries.lock().unwrap();
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            let mut line = serde_json::to_string(&entry).expect("transcript entry serializes");
            line.push('\n');
            file.write_all(line.as_bytes())?;
        }
        entries.insert(entry.request_id.clone(), entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
