use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn evalarena(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evalarena"))
        .args(args)
        .env_remove("EVALARENA_SEED")
        .env_remove("EVALARENA_FORMAT")
        .output()
        .unwrap()
}

fn fx(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn elo_on_one_vote() {
    let out = evalarena(&["elo", "--votes", &fx("one_vote.log"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["model"], "model-alpha");
    assert_eq!(rows[0]["elo_sequential"], 1016.0);
    assert_eq!(rows[1]["elo_sequential"], 984.0);
    assert_eq!(rows[0]["ci_low"], 1016.0);
}

#[test]
fn elo_output_file_is_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let svg = dir.path().join("r.svg");
    let out = evalarena(&[
        "elo",
        "--votes",
        &fx("votes.log"),
        "--permutations",
        "50",
        "--output",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    stdout(&out);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("model,elo_sequential,elo_mean,ci_low,ci_high,winpct,vote_count\n"));
    assert_eq!(text.lines().count(), 4);
    assert!(std::fs::read_to_string(&svg)
        .unwrap()
        .contains("model-alpha"));
}

#[test]
fn seed_makes_reports_reproducible() {
    let run = |seed: &str| {
        stdout(&evalarena(&[
            "elo",
            "--votes",
            &fx("votes.log"),
            "--permutations",
            "100",
            "--seed",
            seed,
            "--format",
            "json",
        ]))
    };
    assert_eq!(run("5"), run("5"));
    assert_ne!(run("5"), run("6"));
}

#[test]
fn filter_keeps_one_of_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("kept.jsonl");
    stdout(&evalarena(&[
        "filter",
        "--input",
        &fx("pairs.jsonl"),
        "--threshold",
        "0.6",
        "--output",
        out_path.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.contains("\"id\":\"m2\""));
}

#[test]
fn combine_prefixes_sources() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("all.jsonl");
    stdout(&evalarena(&[
        "combine",
        "--input",
        &fx("pairs.jsonl"),
        "--input",
        &fx("pairs.jsonl"),
        "--output",
        out_path.to_str().unwrap(),
    ]));
    let ids: Vec<String> = std::fs::read_to_string(&out_path)
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["id"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert_eq!(ids, ["M/m1", "M/m2", "M/m1", "M/m2"]);
}

#[test]
fn winpct_matches_hand_count() {
    let out = stdout(&evalarena(&[
        "winpct",
        "--votes",
        &fx("one_vote.log"),
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["model"], "model-alpha");
    assert_eq!(v[0]["winpct"], 1.0);
    assert_eq!(v[1]["winpct"], 0.0);
    assert_eq!(v[1]["total"], 1);
}

#[test]
fn score_uses_cache_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = [
        "score",
        "--dataset",
        &fx("v.jsonl"),
        "--responses",
        &fx("responses/v"),
        "--cache-dir",
        cache.to_str().unwrap(),
        "--format",
        "json",
    ];
    let first = stdout(&evalarena(&args));
    let cached = std::fs::read_dir(&cache).unwrap().count();
    assert!(cached > 0);
    assert_eq!(stdout(&evalarena(&args)), first);
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), cached);
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn categories_cover_fixture() {
    let out = stdout(&evalarena(&[
        "categories",
        "--votes",
        &fx("votes.log"),
        "--dataset",
        &fx("v.jsonl"),
    ]));
    for c in ["Hikaye Oluşturma", "Basit Matematik", "Benzerlik Bulma"] {
        assert_eq!(out.matches(c).count(), 3, "{c}");
    }
}

#[test]
fn correlate_spearman_has_ten_columns() {
    let out = stdout(&evalarena(&[
        "correlate",
        "--v-dataset",
        &fx("v.jsonl"),
        "--v-responses",
        &fx("responses/v"),
        "--g-dataset",
        &fx("g.jsonl"),
        "--g-responses",
        &fx("responses/g"),
        "--votes",
        &fx("votes.log"),
        "--permutations",
        "100",
        "--method",
        "spearman",
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["metric_names"].as_array().unwrap().len(), 10);
}

#[test]
fn errors_are_one_json_line() {
    let out = evalarena(&["elo", "--votes", "/definitely/missing.log"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert!(v["error"].as_str().unwrap().contains("missing.log"));

    let out = evalarena(&[
        "filter",
        "--input",
        &fx("pairs.jsonl"),
        "--threshold",
        "1.5",
        "--output",
        "/tmp/x",
    ]);
    assert!(!out.status.success());
    assert!(serde_json::from_slice::<serde_json::Value>(&out.stderr).is_ok());
}

#[test]
fn failed_write_leaves_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.csv");
    std::fs::write(&target, "previous\n").unwrap();
    let out = evalarena(&[
        "elo",
        "--votes",
        "/missing",
        "--output",
        target.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert_eq!(std::fs::read_to_string(&target).unwrap(), "previous\n");
}
