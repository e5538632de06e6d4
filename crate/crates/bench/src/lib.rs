//! Input generators shared by the benchmarks under `benches/`.

use evalarena::rating::Vote;
use evalarena::simulate::BradleyTerry;

const VOCAB: [&str; 16] = [
    "bir", "iki", "üç", "dört", "beş", "altı", "yedi", "sekiz", "dokuz", "on", "kedi", "köpek",
    "ev", "yol", "çay", "ılık",
];

/// Deterministic pseudo-random token sequence of length `len`.
pub fn tokens(len: usize, seed: u64) -> Vec<String> {
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (0..len)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            VOCAB[(state >> 60) as usize].to_string()
        })
        .collect()
}

/// Whitespace-joined text of `words` tokens.
pub fn sentence(words: usize, seed: u64) -> String {
    tokens(words, seed).join(" ")
}

/// Votes drawn from a three-model Bradley–Terry log with strengths 3:1:0.5.
pub fn planted_votes(n: usize, seed: u64) -> (Vec<Vote>, Vec<String>) {
    let bt =
        BradleyTerry::new([("strong", 3.0), ("middle", 1.0), ("weak", 0.5)]).with_draws(0.1, 0.05);
    let records: Vec<String> = (0..40).map(|i| format!("q{i}")).collect();
    let judges: Vec<String> = (0..8).map(|i| format!("judge-{i}")).collect();
    (bt.simulate(n, &records, &judges, seed), bt.names())
}
