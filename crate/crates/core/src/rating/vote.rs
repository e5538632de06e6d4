//! Votes and the append-only vote log.
//!
//! The log is JSON Lines, one [`Vote`] per line. A line is committed once its
//! terminating newline has been written and synced; a torn final line left by
//! a crash is discarded (and truncated away when the log is reopened for
//! writing).

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::RatingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    AWins,
    BWins,
    BothGood,
    Neither,
}

impl Outcome {
    /// Score credited to model A for Elo; `None` for outcomes Elo skips.
    pub fn score_a(self) -> Option<f64> {
        match self {
            Outcome::AWins => Some(1.0),
            Outcome::BWins => Some(0.0),
            Outcome::BothGood => Some(0.5),
            Outcome::Neither => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vote {
    pub vote_id: String,
    pub record_id: String,
    pub model_a: String,
    pub model_b: String,
    pub outcome: Outcome,
    pub judge_id: String,
    pub timestamp: DateTime<Utc>,
}

impl Vote {
    pub fn involves(&self, model: &str) -> bool {
        self.model_a == model || self.model_b == model
    }

    /// Whether `model` was credited by this vote (won, or both were good).
    pub fn credits(&self, model: &str) -> bool {
        match self.outcome {
            Outcome::AWins => self.model_a == model,
            Outcome::BWins => self.model_b == model,
            Outcome::BothGood => self.involves(model),
            Outcome::Neither => false,
        }
    }

    pub fn validate(&self) -> Result<(), RatingError> {
        if self.vote_id.is_empty() {
            return Err(RatingError::InvalidVote {
                vote_id: self.vote_id.clone(),
                reason: "empty vote_id".into(),
            });
        }
        if self.model_a == self.model_b {
            return Err(RatingError::InvalidVote {
                vote_id: self.vote_id.clone(),
                reason: format!("model_a and model_b are both {:?}", self.model_a),
            });
        }
        Ok(())
    }
}

/// Checks per-vote invariants, id uniqueness and timestamp monotonicity.
pub fn validate_votes(votes: &[Vote]) -> Result<(), RatingError> {
    let mut ids = HashSet::with_capacity(votes.len());
    let mut last: Option<DateTime<Utc>> = None;
    for v in votes {
        v.validate()?;
        if !ids.insert(v.vote_id.as_str()) {
            return Err(RatingError::InvalidVote {
                vote_id: v.vote_id.clone(),
                reason: "duplicate vote_id".into(),
            });
        }
        if last.is_some_and(|t| v.timestamp < t) {
            return Err(RatingError::InvalidVote {
                vote_id: v.vote_id.clone(),
                reason: "timestamp earlier than previous vote".into(),
            });
        }
        last = Some(v.timestamp);
    }
    Ok(())
}

/// Parses committed votes from raw log bytes. Returns the votes and the byte
/// length of the committed prefix.
fn parse_log(path: &Path, bytes: &[u8]) -> Result<(Vec<Vote>, usize), RatingError> {
    let committed = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    let text = std::str::from_utf8(&bytes[..committed]).map_err(|e| RatingError::LogParse {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut votes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vote: Vote = serde_json::from_str(line).map_err(|e| RatingError::LogParse {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        votes.push(vote);
    }
    Ok((votes, committed))
}

/// Reads every committed vote from a log file and validates the sequence.
pub fn read_votes(path: &Path) -> Result<Vec<Vote>, RatingError> {
    let bytes = std::fs::read(path).map_err(|e| RatingError::io(path, e))?;
    let (votes, _) = parse_log(path, &bytes)?;
    validate_votes(&votes)?;
    Ok(votes)
}

pub fn write_votes(path: &Path, votes: &[Vote]) -> Result<(), RatingError> {
    crate::io::write_atomic(path, &crate::io::to_jsonl(votes))
        .map_err(|e| RatingError::Io(e.to_string()))
}

/// Single-writer handle on an append-only vote log.
#[derive(Debug)]
pub struct VoteLog {
    path: PathBuf,
    file: File,
    last_timestamp: Option<DateTime<Utc>>,
    len: usize,
}

impl VoteLog {
    /// Opens (creating if needed) the log, drops any torn trailing line and
    /// returns the committed votes for replay.
    pub fn open(path: impl Into<PathBuf>) -> Result<(Self, Vec<Vote>), RatingError> {
        let path = path.into();
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(|e| RatingError::io(&path, e))?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)
            .map_err(|e| RatingError::io(&path, e))?;
        let (votes, committed) = parse_log(&path, &bytes)?;
        validate_votes(&votes)?;
        if committed < bytes.len() {
            file.set_len(committed as u64)
                .map_err(|e| RatingError::io(&path, e))?;
            file.sync_all().map_err(|e| RatingError::io(&path, e))?;
        }
        file.seek(SeekFrom::End(0))
            .map_err(|e| RatingError::io(&path, e))?;
        let log = Self {
            path,
            file,
            last_timestamp: votes.last().map(|v| v.timestamp),
            len: votes.len(),
        };
        Ok((log, votes))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn last_timestamp(&self) -> Option<DateTime<Utc>> {
        self.last_timestamp
    }

    /// Appends and syncs one vote. The vote is durable once this returns `Ok`.
    pub fn append(&mut self, vote: &Vote) -> Result<(), RatingError> {
        vote.validate()?;
        if self.last_timestamp.is_some_and(|t| vote.timestamp < t) {
            return Err(RatingError::InvalidVote {
                vote_id: vote.vote_id.clone(),
                reason: "timestamp earlier than last logged vote".into(),
            });
        }
        let mut line = serde_json::to_vec(vote).expect("serialize vote");
        line.push(b'\n');
        self.file
            .write_all(&line)
            .map_err(|e| RatingError::io(&self.path, e))?;
        self.file
            .sync_data()
            .map_err(|e| RatingError::io(&self.path, e))?;
        self.last_timestamp = Some(vote.timestamp);
        self.len += 1;
        Ok(())
    }
}
