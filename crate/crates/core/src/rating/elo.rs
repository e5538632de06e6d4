//! Logistic Elo, applied sequentially or over random reorderings of the log.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Outcome, RatingError, Vote};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EloConfig {
    pub initial_rating: f64,
    pub k_factor: f64,
    pub scale: f64,
    pub permutations: usize,
    pub ci_level: f64,
    pub rng_seed: u64,
}

impl Default for EloConfig {
    fn default() -> Self {
        Self {
            initial_rating: 1000.0,
            k_factor: 32.0,
            scale: 400.0,
            permutations: 1000,
            ci_level: 0.95,
            rng_seed: 0,
        }
    }
}

impl EloConfig {
    pub fn validate(&self) -> Result<(), RatingError> {
        let bad = |msg: &str| Err(RatingError::Config(msg.to_string()));
        if !self.initial_rating.is_finite() {
            return bad("initial_rating must be finite");
        }
        if !(self.k_factor > 0.0 && self.k_factor.is_finite()) {
            return bad("k_factor must be > 0");
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad("scale must be > 0");
        }
        if self.permutations == 0 {
            return bad("permutations must be >= 1");
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return bad("ci_level must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Expected score of A against B.
pub fn expected_score(r_a: f64, r_b: f64, scale: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((r_b - r_a) / scale))
}

/// One Elo update. The exchange is zero-sum: whatever A gains, B loses.
/// `Neither` leaves both ratings unchanged.
pub fn elo_update(r_a: f64, r_b: f64, outcome: Outcome, cfg: &EloConfig) -> (f64, f64) {
    match outcome.score_a() {
        Some(s_a) => apply(r_a, r_b, s_a, cfg.k_factor, cfg.scale),
        None => (r_a, r_b),
    }
}

#[inline]
fn apply(r_a: f64, r_b: f64, s_a: f64, k: f64, scale: f64) -> (f64, f64) {
    let delta = k * (s_a - expected_score(r_a, r_b, scale));
    (r_a + delta, r_b - delta)
}

/// Votes resolved to model indices; `None` score marks a vote Elo skips.
struct Compiled {
    games: Vec<(usize, usize, Option<f64>)>,
}

fn compile(votes: &[Vote], models: &[String]) -> Result<Compiled, RatingError> {
    let index: HashMap<&str, usize> = models
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_str(), i))
        .collect();
    let lookup = |m: &str| {
        index
            .get(m)
            .copied()
            .ok_or_else(|| RatingError::UnknownModel(m.to_string()))
    };
    let games = votes
        .iter()
        .map(|v| {
            Ok((
                lookup(&v.model_a)?,
                lookup(&v.model_b)?,
                v.outcome.score_a(),
            ))
        })
        .collect::<Result<_, RatingError>>()?;
    Ok(Compiled { games })
}

impl Compiled {
    fn run(
        &self,
        order: impl Iterator<Item = usize>,
        n_models: usize,
        cfg: &EloConfig,
    ) -> Vec<f64> {
        let mut ratings = vec![cfg.initial_rating; n_models];
        for i in order {
            let (a, b, score) = self.games[i];
            if let Some(s_a) = score {
                let (ra, rb) = apply(ratings[a], ratings[b], s_a, cfg.k_factor, cfg.scale);
                ratings[a] = ra;
                ratings[b] = rb;
            }
        }
        ratings
    }
}

/// Runs Elo over `votes` in the given order. Every model in `models` starts at
/// the initial rating; votes naming any other model are rejected.
pub fn elo_sequential(
    votes: &[Vote],
    models: &[String],
    cfg: &EloConfig,
) -> Result<BTreeMap<String, f64>, RatingError> {
    cfg.validate()?;
    let compiled = compile(votes, models)?;
    let finals = compiled.run(0..votes.len(), models.len(), cfg);
    Ok(models.iter().cloned().zip(finals).collect())
}

/// The vote order used by permutation `index` under `cfg.rng_seed`.
pub fn permutation_order(n_votes: usize, cfg: &EloConfig, index: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(index as u64);
    let mut order: Vec<usize> = (0..n_votes).collect();
    order.shuffle(&mut rng);
    order
}

/// Per-model summary of the permutation distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EloSummary {
    pub model: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Nearest-rank empirical quantile of sorted `samples`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    // Guard against 0.025 * 1000 evaluating to 25.000000000000004.
    let rank = (p * n as f64 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

/// Final ratings of every model under each seeded permutation, indexed
/// `[permutation][model]`.
pub fn permutation_finals(
    votes: &[Vote],
    models: &[String],
    cfg: &EloConfig,
) -> Result<Vec<Vec<f64>>, RatingError> {
    cfg.validate()?;
    let compiled = compile(votes, models)?;
    Ok((0..cfg.permutations)
        .into_par_iter()
        .map(|p| {
            let order = permutation_order(votes.len(), cfg, p);
            compiled.run(order.into_iter(), models.len(), cfg)
        })
        .collect())
}

/// Elo mean and confidence interval over `cfg.permutations` random orderings
/// of the vote log. Deterministic for a given seed regardless of thread count.
pub fn elo_permuted(
    votes: &[Vote],
    models: &[String],
    cfg: &EloConfig,
) -> Result<Vec<EloSummary>, RatingError> {
    let finals = permutation_finals(votes, models, cfg)?;
    let p_low = (1.0 - cfg.ci_level) / 2.0;
    let p_high = 1.0 - p_low;
    Ok(models
        .iter()
        .enumerate()
        .map(|(m, model)| {
            let mut samples: Vec<f64> = finals.iter().map(|f| f[m]).collect();
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            samples.sort_by(f64::total_cmp);
            EloSummary {
                model: model.clone(),
                mean,
                ci_low: nearest_rank(&samples, p_low),
                ci_high: nearest_rank(&samples, p_high),
            }
        })
        .collect())
}
