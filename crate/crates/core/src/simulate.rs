//! Synthetic vote logs drawn from a planted Bradley–Terry model.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rating::{Outcome, Vote};

#[derive(Debug, Clone)]
pub struct BradleyTerry {
    /// `(model, strength)`; strengths must be positive.
    pub models: Vec<(String, f64)>,
    /// Probability that a vote is `BOTH_GOOD` instead of decisive.
    pub both_good: f64,
    /// Probability that a vote is `NEITHER` instead of decisive.
    pub neither: f64,
}

impl BradleyTerry {
    pub fn new<S: Into<String>>(models: impl IntoIterator<Item = (S, f64)>) -> Self {
        Self {
            models: models.into_iter().map(|(m, s)| (m.into(), s)).collect(),
            both_good: 0.0,
            neither: 0.0,
        }
    }

    pub fn with_draws(mut self, both_good: f64, neither: f64) -> Self {
        self.both_good = both_good;
        self.neither = neither;
        self
    }

    /// Probability that model `i` is preferred over model `j`.
    pub fn p_beats(&self, i: usize, j: usize) -> f64 {
        let (si, sj) = (self.models[i].1, self.models[j].1);
        si / (si + sj)
    }

    pub fn names(&self) -> Vec<String> {
        self.models.iter().map(|(m, _)| m.clone()).collect()
    }

    /// Draws `n` votes. Each vote picks an unordered pair uniformly, a random
    /// side assignment, a record from `record_ids` and a judge from `judges`.
    /// Timestamps advance one second per vote from a fixed epoch.
    pub fn simulate(
        &self,
        n: usize,
        record_ids: &[String],
        judges: &[String],
        seed: u64,
    ) -> Vec<Vote> {
        assert!(self.models.len() >= 2, "need at least two models");
        assert!(!record_ids.is_empty() && !judges.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.models.len();
        let start: DateTime<Utc> = Utc.with_ymd_and_hms(2024, 3, 1, 9, 0, 0).unwrap();
        (0..n)
            .map(|idx| {
                let i = rng.random_range(0..k);
                let mut j = rng.random_range(0..k - 1);
                if j >= i {
                    j += 1;
                }
                let u: f64 = rng.random();
                let outcome = if u < self.both_good {
                    Outcome::BothGood
                } else if u < self.both_good + self.neither {
                    Outcome::Neither
                } else if rng.random::<f64>() < self.p_beats(i, j) {
                    Outcome::AWins
                } else {
                    Outcome::BWins
                };
                Vote {
                    vote_id: format!("sim-{idx:06}"),
                    record_id: record_ids[rng.random_range(0..record_ids.len())].clone(),
                    model_a: self.models[i].0.clone(),
                    model_b: self.models[j].0.clone(),
                    outcome,
                    judge_id: judges[rng.random_range(0..judges.len())].clone(),
                    timestamp: start + Duration::seconds(idx as i64),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_preference_matches_strengths() {
        let bt = BradleyTerry::new([("strong", 3.0), ("weak", 1.0)]);
        let votes = bt.simulate(20_000, &["q".to_string()], &["j".to_string()], 1);
        let strong_wins = votes.iter().filter(|v| v.credits("strong")).count();
        let p = strong_wins as f64 / votes.len() as f64;
        assert!((p - 0.75).abs() < 0.015, "{p}");
        assert!(votes.iter().all(|v| v.model_a != v.model_b));
        assert!(votes.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn seeded() {
        let bt = BradleyTerry::new([("a", 1.0), ("b", 2.0), ("c", 0.5)]).with_draws(0.1, 0.05);
        let r = vec!["q1".to_string(), "q2".to_string()];
        let j = vec!["j".to_string()];
        assert_eq!(bt.simulate(50, &r, &j, 7), bt.simulate(50, &r, &j, 7));
        assert_ne!(bt.simulate(50, &r, &j, 7), bt.simulate(50, &r, &j, 8));
    }
}
