//! Elo ratings with permutation-resampled confidence intervals, and WinPct.

mod elo;
mod vote;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use elo::{
    elo_permuted, elo_sequential, elo_update, expected_score, nearest_rank, permutation_finals,
    permutation_order, EloConfig, EloSummary,
};
pub use vote::{read_votes, validate_votes, write_votes, Outcome, Vote, VoteLog};

#[derive(Debug, thiserror::Error)]
pub enum RatingError {
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("invalid vote {vote_id:?}: {reason}")]
    InvalidVote { vote_id: String, reason: String },
    #[error("invalid Elo configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    LogParse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Io(String),
}

impl RatingError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        RatingError::Io(format!("{}: {e}", path.display()))
    }
}

/// Tally of one model's votes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinTally {
    pub win: usize,
    pub both: usize,
    pub total: usize,
}

impl WinTally {
    pub fn of<'a>(votes: impl IntoIterator<Item = &'a Vote>, model: &str) -> Self {
        let mut t = WinTally::default();
        for v in votes.into_iter().filter(|v| v.involves(model)) {
            t.total += 1;
            match v.outcome {
                Outcome::BothGood => t.both += 1,
                Outcome::AWins if v.model_a == model => t.win += 1,
                Outcome::BWins if v.model_b == model => t.win += 1,
                _ => {}
            }
        }
        t
    }

    /// `(win + both) / total`, or 0 when the model has no votes.
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.win + self.both) as f64 / self.total as f64
        }
    }
}

/// Share of the votes involving `model` that credited it. `Neither` votes
/// count in the denominator only.
pub fn winpct(votes: &[Vote], model: &str) -> f64 {
    WinTally::of(votes, model).ratio()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRow {
    pub model: String,
    pub elo_sequential: f64,
    pub elo_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub winpct: f64,
    pub vote_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingReport {
    /// Sorted by `elo_mean`, highest first; ties by model name.
    pub rows: Vec<RatingRow>,
}

impl RatingReport {
    pub fn get(&self, model: &str) -> Option<&RatingRow> {
        self.rows.iter().find(|r| r.model == model)
    }
}

/// Models named anywhere in the log, sorted.
pub fn models_in(votes: &[Vote]) -> Vec<String> {
    votes
        .iter()
        .flat_map(|v| [v.model_a.clone(), v.model_b.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Sequential Elo, permutation mean and CI, and WinPct for every model.
pub fn rating_report(
    votes: &[Vote],
    models: &[String],
    cfg: &EloConfig,
) -> Result<RatingReport, RatingError> {
    let sequential = elo_sequential(votes, models, cfg)?;
    let permuted = elo_permuted(votes, models, cfg)?;
    let mut rows: Vec<RatingRow> = permuted
        .into_iter()
        .map(|s| {
            let tally = WinTally::of(votes, &s.model);
            RatingRow {
                elo_sequential: sequential[&s.model],
                elo_mean: s.mean,
                ci_low: s.ci_low,
                ci_high: s.ci_high,
                winpct: tally.ratio(),
                vote_count: tally.total,
                model: s.model,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.elo_mean
            .total_cmp(&a.elo_mean)
            .then_with(|| a.model.cmp(&b.model))
    });
    Ok(RatingReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn vote(a: &str, b: &str, outcome: Outcome) -> Vote {
        Vote {
            vote_id: String::new(),
            record_id: "q1".into(),
            model_a: a.into(),
            model_b: b.into(),
            outcome,
            judge_id: "j".into(),
            timestamp: Utc.timestamp_opt(0, 0).unwrap(),
        }
    }

    #[test]
    fn winpct_formula() {
        // x: 5 wins, 2 both-good, 2 losses, 1 neither.
        let mut votes = Vec::new();
        for _ in 0..3 {
            votes.push(vote("x", "y", Outcome::AWins));
        }
        for _ in 0..2 {
            votes.push(vote("y", "x", Outcome::BWins));
        }
        for _ in 0..2 {
            votes.push(vote("x", "y", Outcome::BothGood));
        }
        votes.push(vote("x", "y", Outcome::BWins));
        votes.push(vote("y", "x", Outcome::AWins));
        votes.push(vote("x", "y", Outcome::Neither));
        let t = WinTally::of(&votes, "x");
        assert_eq!((t.win, t.both, t.total), (5, 2, 10));
        assert_eq!(winpct(&votes, "x"), 0.7);
        assert_eq!(winpct(&votes, "absent"), 0.0);
    }

    #[test]
    fn all_both_good() {
        let votes = vec![vote("x", "y", Outcome::BothGood); 4];
        assert_eq!(winpct(&votes, "x"), 1.0);
        assert_eq!(winpct(&votes, "y"), 1.0);
    }

    #[test]
    fn report_rows_sorted_and_consistent() {
        let votes = vec![
            vote("a", "b", Outcome::AWins),
            vote("a", "c", Outcome::AWins),
            vote("b", "c", Outcome::AWins),
        ];
        let models = models_in(&votes);
        assert_eq!(models, ["a", "b", "c"]);
        let cfg = EloConfig {
            permutations: 50,
            ..Default::default()
        };
        let report = rating_report(&votes, &models, &cfg).unwrap();
        let order: Vec<_> = report.rows.iter().map(|r| r.model.as_str()).collect();
        assert_eq!(order, ["a", "b", "c"]);
        for r in &report.rows {
            assert!(r.ci_low <= r.elo_mean && r.elo_mean <= r.ci_high);
            assert_eq!(r.vote_count, 2);
        }
        assert_eq!(report.get("a").unwrap().winpct, 1.0);
    }
}
