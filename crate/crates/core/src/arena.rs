//! Blind pairwise voting: matchup scheduling, vote recording and live
//! leaderboard snapshots.
//!
//! [`Arena`] is a single-writer state machine. The HTTP layer wraps it in a
//! mutex so matchup issuance and vote appends form one total order; the vote
//! log is the only persistent state and is replayed on startup.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::{DateTime, Utc};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{category_winpct, CategoryBreakdown};
use crate::corpus::{EvalDataset, ResponseSet};
use crate::rating::{rating_report, EloConfig, Outcome, RatingError, RatingReport, Vote, VoteLog};

#[derive(Debug, thiserror::Error)]
pub enum ArenaError {
    #[error("at least two models with responses are required")]
    InsufficientModels,
    #[error("no record has responses from two different models")]
    NoCommonRecord,
    #[error("unknown match {0:?}")]
    UnknownMatch(String),
    #[error("match {0:?} already resolved")]
    AlreadyResolved(String),
    #[error("match {0:?} was issued to a different judge")]
    JudgeMismatch(String),
    #[error("judge id is empty")]
    EmptyJudge,
    #[error("duplicate model {0:?}")]
    DuplicateModel(String),
    #[error("response set of {model:?} targets dataset {found:?}, expected {expected:?}")]
    DatasetMismatch {
        model: String,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Log(#[from] RatingError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerPolicy {
    /// Least-issued model pair first, then least-issued record within it; ties
    /// broken uniformly at random.
    #[default]
    Balanced,
    /// Uniformly random pair, then uniformly random shared record.
    Uniform,
}

/// Judge's verdict as seen on screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SideOutcome {
    Left,
    Right,
    BothGood,
    Neither,
}

#[derive(Debug, Clone, Copy)]
pub struct ArenaConfig {
    pub policy: SchedulerPolicy,
    pub scheduler_seed: u64,
    /// Elo parameters for the live leaderboard; `permutations` defaults to 200.
    pub elo: EloConfig,
}

impl Default for ArenaConfig {
    fn default() -> Self {
        Self {
            policy: SchedulerPolicy::Balanced,
            scheduler_seed: 0,
            elo: EloConfig {
                permutations: 200,
                ..EloConfig::default()
            },
        }
    }
}

/// Server-side matchup state. Never sent to clients.
#[derive(Debug, Clone, PartialEq)]
pub struct Matchup {
    pub match_id: String,
    pub record_id: String,
    pub left_model: String,
    pub right_model: String,
    pub judge_id: String,
    pub issued_at: DateTime<Utc>,
    pub resolved: bool,
}

/// What a judge sees. Carries no model identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientMatchup {
    pub match_id: String,
    pub instruction: String,
    pub category: Option<String>,
    pub response_left: String,
    pub response_right: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteAck {
    pub vote_id: String,
    pub match_id: String,
    pub judge_votes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub version: u64,
    pub ratings: RatingReport,
    pub categories: CategoryBreakdown,
    pub judges: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
struct PairSlot {
    a: usize,
    b: usize,
    /// Dataset positions where both models answered.
    records: Vec<usize>,
    record_counts: Vec<u64>,
    count: u64,
}

type Clock = Box<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct Arena {
    dataset: EvalDataset,
    models: Vec<String>,
    sets: Vec<ResponseSet>,
    pairs: Vec<PairSlot>,
    pair_index: HashMap<(usize, usize), usize>,
    matchups: HashMap<String, Matchup>,
    judges: BTreeMap<String, u64>,
    votes: Vec<Vote>,
    log: VoteLog,
    cfg: ArenaConfig,
    scheduler_rng: ChaCha8Rng,
    clock: Clock,
    cached: Option<Leaderboard>,
}

fn answered(set: &ResponseSet, id: &str) -> bool {
    set.get(id).is_some_and(|t| !t.trim().is_empty())
}

impl Arena {
    /// Opens the vote log at `log_path` and replays it.
    pub fn open(
        dataset: EvalDataset,
        sets: Vec<ResponseSet>,
        log_path: &Path,
        cfg: ArenaConfig,
    ) -> Result<Self, ArenaError> {
        let (log, votes) = VoteLog::open(log_path)?;
        Self::new(dataset, sets, log, votes, cfg)
    }

    pub fn new(
        dataset: EvalDataset,
        sets: Vec<ResponseSet>,
        log: VoteLog,
        replay: Vec<Vote>,
        cfg: ArenaConfig,
    ) -> Result<Self, ArenaError> {
        cfg.elo.validate()?;
        let mut models = Vec::with_capacity(sets.len());
        for set in &sets {
            if set.dataset_name != dataset.name() {
                return Err(ArenaError::DatasetMismatch {
                    model: set.model_name.clone(),
                    expected: dataset.name().to_string(),
                    found: set.dataset_name.clone(),
                });
            }
            if models.contains(&set.model_name) {
                return Err(ArenaError::DuplicateModel(set.model_name.clone()));
            }
            models.push(set.model_name.clone());
        }
        if models.len() < 2 {
            return Err(ArenaError::InsufficientModels);
        }

        let mut pairs = Vec::new();
        let mut pair_index = HashMap::new();
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                let records: Vec<usize> = dataset
                    .records()
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| answered(&sets[a], &r.id) && answered(&sets[b], &r.id))
                    .map(|(i, _)| i)
                    .collect();
                if records.is_empty() {
                    continue;
                }
                pair_index.insert((a, b), pairs.len());
                pairs.push(PairSlot {
                    a,
                    b,
                    record_counts: vec![0; records.len()],
                    records,
                    count: 0,
                });
            }
        }
        if pairs.is_empty() {
            return Err(ArenaError::NoCommonRecord);
        }

        let mut arena = Self {
            dataset,
            models,
            sets,
            pairs,
            pair_index,
            matchups: HashMap::new(),
            judges: BTreeMap::new(),
            votes: Vec::with_capacity(replay.len()),
            log,
            scheduler_rng: ChaCha8Rng::seed_from_u64(cfg.scheduler_seed),
            cfg,
            clock: Box::new(Utc::now),
            cached: None,
        };
        for vote in replay {
            arena.record_replayed(vote);
        }
        Ok(arena)
    }

    /// Replaces the wall clock, for tests.
    pub fn with_clock(mut self, clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    fn model_index(&self, name: &str) -> Option<usize> {
        self.models.iter().position(|m| m == name)
    }

    fn slot_for(&self, x: &str, y: &str) -> Option<usize> {
        let (i, j) = (self.model_index(x)?, self.model_index(y)?);
        self.pair_index.get(&(i.min(j), i.max(j))).copied()
    }

    fn record_replayed(&mut self, vote: Vote) {
        if let Some(slot) = self.slot_for(&vote.model_a, &vote.model_b) {
            let pos = self.dataset.position(&vote.record_id);
            let pair = &mut self.pairs[slot];
            pair.count += 1;
            if let Some(k) = pos.and_then(|p| pair.records.iter().position(|&r| r == p)) {
                pair.record_counts[k] += 1;
            }
        }
        *self.judges.entry(vote.judge_id.clone()).or_insert(0) += 1;
        self.votes.push(vote);
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn dataset(&self) -> &EvalDataset {
        &self.dataset
    }

    pub fn votes(&self) -> &[Vote] {
        &self.votes
    }

    pub fn config(&self) -> &ArenaConfig {
        &self.cfg
    }

    /// Monotone snapshot version: the number of committed votes.
    pub fn version(&self) -> u64 {
        self.votes.len() as u64
    }

    pub fn judge_counts(&self) -> &BTreeMap<String, u64> {
        &self.judges
    }

    pub fn matchup(&self, match_id: &str) -> Option<&Matchup> {
        self.matchups.get(match_id)
    }

    /// Issued-matchup count per unordered model pair.
    pub fn pair_counts(&self) -> Vec<((String, String), u64)> {
        self.pairs
            .iter()
            .map(|p| {
                (
                    (self.models[p.a].clone(), self.models[p.b].clone()),
                    p.count,
                )
            })
            .collect()
    }

    fn pick_min<T>(rng: &mut ChaCha8Rng, items: impl Iterator<Item = (T, u64)>) -> T {
        let mut best: Vec<T> = Vec::new();
        let mut min = u64::MAX;
        for (item, count) in items {
            if count < min {
                min = count;
                best.clear();
            }
            if count == min {
                best.push(item);
            }
        }
        let k = rng.random_range(0..best.len());
        best.swap_remove(k)
    }

    fn schedule(&mut self) -> (usize, usize) {
        let rng = &mut self.scheduler_rng;
        match self.cfg.policy {
            SchedulerPolicy::Balanced => {
                let slot = Self::pick_min(
                    rng,
                    self.pairs.iter().enumerate().map(|(i, p)| (i, p.count)),
                );
                let pair = &self.pairs[slot];
                let k = Self::pick_min(rng, pair.record_counts.iter().copied().enumerate());
                (slot, k)
            }
            SchedulerPolicy::Uniform => {
                let slot = rng.random_range(0..self.pairs.len());
                let k = rng.random_range(0..self.pairs[slot].records.len());
                (slot, k)
            }
        }
    }

    fn fresh_token() -> String {
        let mut bytes = [0u8; 16];
        rand::rng().fill_bytes(&mut bytes);
        hex::encode(bytes)
    }

    fn now(&self) -> DateTime<Utc> {
        let now = (self.clock)();
        match self.log.last_timestamp() {
            Some(last) if last > now => last,
            _ => now,
        }
    }

    /// Issues a new blind matchup to `judge_id`.
    pub fn next_matchup(&mut self, judge_id: &str) -> Result<ClientMatchup, ArenaError> {
        if judge_id.trim().is_empty() {
            return Err(ArenaError::EmptyJudge);
        }
        let (slot, k) = self.schedule();
        let swap = self.scheduler_rng.random_bool(0.5);
        let pair = &mut self.pairs[slot];
        pair.count += 1;
        pair.record_counts[k] += 1;
        let (left, right) = if swap {
            (pair.b, pair.a)
        } else {
            (pair.a, pair.b)
        };
        let record = &self.dataset.records()[pair.records[k]];

        let match_id = Self::fresh_token();
        let payload = ClientMatchup {
            match_id: match_id.clone(),
            instruction: record.instruction.clone(),
            category: record.category.clone(),
            response_left: self.sets[left]
                .get(&record.id)
                .unwrap_or_default()
                .to_string(),
            response_right: self.sets[right]
                .get(&record.id)
                .unwrap_or_default()
                .to_string(),
        };
        let matchup = Matchup {
            match_id: match_id.clone(),
            record_id: record.id.clone(),
            left_model: self.models[left].clone(),
            right_model: self.models[right].clone(),
            judge_id: judge_id.to_string(),
            issued_at: (self.clock)(),
            resolved: false,
        };
        self.matchups.insert(match_id, matchup);
        Ok(payload)
    }

    /// Resolves a matchup. The vote is appended and synced to the log before
    /// this returns; a failed append leaves the matchup open.
    pub fn submit_vote(
        &mut self,
        match_id: &str,
        outcome: SideOutcome,
        judge_id: &str,
    ) -> Result<VoteAck, ArenaError> {
        let timestamp = self.now();
        let m = self
            .matchups
            .get(match_id)
            .ok_or_else(|| ArenaError::UnknownMatch(match_id.to_string()))?;
        if m.resolved {
            return Err(ArenaError::AlreadyResolved(match_id.to_string()));
        }
        if m.judge_id != judge_id {
            return Err(ArenaError::JudgeMismatch(match_id.to_string()));
        }
        let vote = Vote {
            vote_id: Self::fresh_token(),
            record_id: m.record_id.clone(),
            model_a: m.left_model.clone(),
            model_b: m.right_model.clone(),
            outcome: match outcome {
                SideOutcome::Left => Outcome::AWins,
                SideOutcome::Right => Outcome::BWins,
                SideOutcome::BothGood => Outcome::BothGood,
                SideOutcome::Neither => Outcome::Neither,
            },
            judge_id: judge_id.to_string(),
            timestamp,
        };
        self.log.append(&vote)?;

        self.matchups.get_mut(match_id).unwrap().resolved = true;
        let judge_votes = {
            let n = self.judges.entry(judge_id.to_string()).or_insert(0);
            *n += 1;
            *n
        };
        let vote_id = vote.vote_id.clone();
        self.votes.push(vote);
        Ok(VoteAck {
            vote_id,
            match_id: match_id.to_string(),
            judge_votes,
        })
    }

    /// Leaderboard for the current log, recomputed only when new votes have
    /// arrived since the last call.
    pub fn leaderboard(&mut self) -> Result<Leaderboard, ArenaError> {
        if let Some(c) = &self.cached {
            if c.version == self.version() {
                return Ok(c.clone());
            }
        }
        let board = compute_leaderboard(
            &self.votes,
            &self.models,
            &self.dataset,
            &self.cfg.elo,
            self.version(),
            self.judges.clone(),
        )?;
        self.cached = Some(board.clone());
        Ok(board)
    }
}

/// Builds a leaderboard snapshot from an immutable copy of the log. Votes
/// whose record has no category are left out of the category breakdown.
pub fn compute_leaderboard(
    votes: &[Vote],
    models: &[String],
    dataset: &EvalDataset,
    elo: &EloConfig,
    version: u64,
    judges: BTreeMap<String, u64>,
) -> Result<Leaderboard, ArenaError> {
    let ratings = rating_report(votes, models, elo)?;
    let categorized: Vec<Vote> = votes
        .iter()
        .filter(|v| {
            dataset
                .get(&v.record_id)
                .is_some_and(|r| r.category.is_some())
        })
        .cloned()
        .collect();
    let categories = category_winpct(&categorized, dataset).unwrap_or_default();
    Ok(Leaderboard {
        version,
        ratings,
        categories,
        judges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::InstructionRecord;

    fn dataset(n: usize) -> EvalDataset {
        EvalDataset::new(
            "v",
            (0..n)
                .map(|i| InstructionRecord {
                    id: format!("q{i}"),
                    category: Some(
                        if i % 2 == 0 {
                            "Basit Matematik"
                        } else {
                            "Hikaye Oluşturma"
                        }
                        .into(),
                    ),
                    instruction: format!("soru {i}"),
                    reference_answer: None,
                })
                .collect(),
        )
        .unwrap()
    }

    fn set(model: &str, ids: &[usize]) -> ResponseSet {
        ResponseSet {
            model_name: model.into(),
            dataset_name: "v".into(),
            responses: ids
                .iter()
                .map(|i| (format!("q{i}"), format!("cevap {i} / {}", model.len())))
                .collect(),
        }
    }

    fn open(
        dir: &tempfile::TempDir,
        sets: Vec<ResponseSet>,
        n: usize,
    ) -> Result<Arena, ArenaError> {
        Arena::open(
            dataset(n),
            sets,
            &dir.path().join("votes.log"),
            ArenaConfig::default(),
        )
    }

    #[test]
    fn forced_matchup_with_one_shared_record() {
        let dir = tempfile::tempdir().unwrap();
        let mut arena = open(&dir, vec![set("alpha", &[0, 1]), set("beta", &[1])], 2).unwrap();
        let mut lefts = std::collections::HashSet::new();
        for _ in 0..40 {
            let m = arena.next_matchup("j1").unwrap();
            assert_eq!(m.instruction, "soru 1");
            lefts.insert(arena.matchup(&m.match_id).unwrap().left_model.clone());
        }
        assert_eq!(lefts.len(), 2, "both side assignments should occur");
    }

    #[test]
    fn construction_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            open(&dir, vec![set("alpha", &[0])], 2),
            Err(ArenaError::InsufficientModels)
        ));
        assert!(matches!(
            open(&dir, vec![set("alpha", &[0]), set("beta", &[1])], 2),
            Err(ArenaError::NoCommonRecord)
        ));
        assert!(matches!(
            open(&dir, vec![set("alpha", &[0]), set("alpha", &[0])], 2),
            Err(ArenaError::DuplicateModel(_))
        ));
    }

    #[test]
    fn vote_mapping_and_guards() {
        let dir = tempfile::tempdir().unwrap();
        let mut arena = open(
            &dir,
            vec![set("cosmosGPT-Large-BM", &[0]), set("gemma-2b-it", &[0])],
            1,
        )
        .unwrap();
        let m = arena.next_matchup("j1").unwrap();
        let left = arena.matchup(&m.match_id).unwrap().left_model.clone();
        assert!(matches!(
            arena.submit_vote(&m.match_id, SideOutcome::Left, "j2"),
            Err(ArenaError::JudgeMismatch(_))
        ));
        let ack = arena
            .submit_vote(&m.match_id, SideOutcome::Left, "j1")
            .unwrap();
        assert_eq!(ack.judge_votes, 1);
        let v = &arena.votes()[0];
        assert_eq!(v.outcome, Outcome::AWins);
        assert_eq!(v.model_a, left);
        assert!(v.credits(&left));
        assert!(matches!(
            arena.submit_vote(&m.match_id, SideOutcome::Right, "j1"),
            Err(ArenaError::AlreadyResolved(_))
        ));
        assert!(matches!(
            arena.submit_vote("nope", SideOutcome::Right, "j1"),
            Err(ArenaError::UnknownMatch(_))
        ));
        assert!(matches!(
            arena.next_matchup(" "),
            Err(ArenaError::EmptyJudge)
        ));
    }

    #[test]
    fn right_maps_to_b_wins() {
        let dir = tempfile::tempdir().unwrap();
        let mut arena = open(&dir, vec![set("x", &[0]), set("y", &[0])], 1).unwrap();
        let m = arena.next_matchup("j").unwrap();
        let right = arena.matchup(&m.match_id).unwrap().right_model.clone();
        arena
            .submit_vote(&m.match_id, SideOutcome::Right, "j")
            .unwrap();
        let v = &arena.votes()[0];
        assert_eq!(
            (v.outcome, v.model_b.as_str()),
            (Outcome::BWins, right.as_str())
        );
    }

    #[test]
    fn leaderboard_caches_by_version() {
        let dir = tempfile::tempdir().unwrap();
        let mut arena = open(&dir, vec![set("x", &[0, 1]), set("y", &[0, 1])], 2).unwrap();
        let empty = arena.leaderboard().unwrap();
        assert_eq!(empty.version, 0);
        assert!(empty
            .ratings
            .rows
            .iter()
            .all(|r| r.elo_mean == 1000.0 && r.winpct == 0.0));
        assert_eq!(arena.leaderboard().unwrap(), empty);
        let m = arena.next_matchup("j").unwrap();
        arena
            .submit_vote(&m.match_id, SideOutcome::BothGood, "j")
            .unwrap();
        let after = arena.leaderboard().unwrap();
        assert_eq!(after.version, 1);
        assert!(!after.categories.cells.is_empty());
    }
}
