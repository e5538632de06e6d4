use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use evalarena::analysis::plot::{category_bars_svg, elo_interval_svg};
use evalarena::analysis::tables::{
    category_table, correlation_table, general_score_table, metric_table, rating_table,
    voting_score_table, Table,
};
use evalarena::analysis::{score_columns, CorrelationMethod};
use evalarena::corpus::{
    load_finetune, load_response_dir, save_finetune, HttpScorer, PrecomputedScorer,
};
use evalarena::io::write_atomic;
use evalarena::metrics::{EmbeddingError, HttpEmbeddingProvider, StubEmbeddingProvider};
use evalarena::rating::{models_in, read_votes, WinTally};
use evalarena::{
    category_winpct, metric_correlations, rating_report, score_models, Arena, ArenaConfig,
    CachedEmbedder, EloConfig, EmbeddingProvider, EvalDataset, MetricReport, QualityScorer,
    RatingReport, SchedulerPolicy,
};
use serde::Serialize;

use crate::{EloArgs, EmbedArgs, Format, Method, OutputArgs, Policy};

pub struct Inputs {
    pub v_dataset: PathBuf,
    pub v_responses: PathBuf,
    pub g: Option<(PathBuf, PathBuf)>,
}

enum Provider {
    Stub(StubEmbeddingProvider),
    Http(HttpEmbeddingProvider),
}

impl EmbeddingProvider for Provider {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        match self {
            Provider::Stub(p) => p.embed_batch(texts),
            Provider::Http(p) => p.embed_batch(texts),
        }
    }
}

fn embedder(args: &EmbedArgs) -> Result<CachedEmbedder<Provider>> {
    let provider = match args.embedder.as_str() {
        "stub" => Provider::Stub(StubEmbeddingProvider::default()),
        url if url.starts_with("http://") || url.starts_with("https://") => {
            Provider::Http(HttpEmbeddingProvider::new(url))
        }
        other => bail!("--embedder must be `stub` or an http(s) URL, got {other:?}"),
    };
    if let Some(dir) = &args.cache_dir {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating cache dir {}", dir.display()))?;
    }
    Ok(CachedEmbedder::new(provider, args.cache_dir.clone()))
}

fn elo_config(args: &EloArgs) -> Result<EloConfig> {
    let cfg = EloConfig {
        initial_rating: args.initial_rating,
        k_factor: args.k_factor,
        permutations: args.permutations,
        ci_level: args.ci_level,
        rng_seed: args.seed,
        ..EloConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load_dataset(path: &Path) -> Result<EvalDataset> {
    evalarena::load_dataset(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn ratings(args: &EloArgs) -> Result<RatingReport> {
    let votes = read_votes(&args.votes)
        .with_context(|| format!("reading votes {}", args.votes.display()))?;
    let models = if args.models.is_empty() {
        models_in(&votes)
    } else {
        args.models.clone()
    };
    Ok(rating_report(&votes, &models, &elo_config(args)?)?)
}

fn score_set(
    dataset: &Path,
    responses: &Path,
    emb: &CachedEmbedder<Provider>,
) -> Result<MetricReport> {
    let ds = load_dataset(dataset)?;
    let sets = load_response_dir(responses, &ds)
        .with_context(|| format!("loading responses from {}", responses.display()))?;
    Ok(score_models(&ds, &sets, emb)?)
}

pub fn csv_bytes(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner()?)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn emit<T: Serialize>(out: &OutputArgs, table: &Table, value: &T) -> Result<()> {
    match (&out.output, out.format) {
        (Some(path), Format::Table) => write_file(path, &csv_bytes(table)?),
        (Some(path), Format::Json) => write_file(path, &json_bytes(value)?),
        (None, Format::Table) => {
            print!("{}", table.to_aligned());
            Ok(())
        }
        (None, Format::Json) => {
            print!("{}", String::from_utf8(json_bytes(value)?)?);
            Ok(())
        }
    }
}

pub fn filter(
    input: &Path,
    threshold: f64,
    scorer_url: Option<String>,
    output: &Path,
) -> Result<()> {
    let pairs = load_finetune(input).with_context(|| format!("loading {}", input.display()))?;
    let scorer: Box<dyn QualityScorer> = match scorer_url {
        Some(url) => Box::new(HttpScorer::new(url)),
        None => Box::new(PrecomputedScorer),
    };
    let kept = evalarena::filter_by_score(&pairs, scorer.as_ref(), threshold)?;
    save_finetune(output, &kept)?;
    tracing::info!(kept = kept.len(), total = pairs.len(), "filtered");
    Ok(())
}

pub fn combine(inputs: &[PathBuf], output: &Path) -> Result<()> {
    let parts = inputs
        .iter()
        .map(|p| load_finetune(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let all = evalarena::combine(&parts)?;
    save_finetune(output, &all)?;
    Ok(())
}

pub fn score(dataset: &Path, responses: &Path, embed: &EmbedArgs, out: &OutputArgs) -> Result<()> {
    let report = score_set(dataset, responses, &embedder(embed)?)?;
    emit(out, &metric_table(&report), &report)
}

pub fn elo(args: &EloArgs, svg: Option<&Path>, out: &OutputArgs) -> Result<()> {
    let report = ratings(args)?;
    if let Some(path) = svg {
        write_file(path, elo_interval_svg(&report).as_bytes())?;
    }
    emit(out, &rating_table(&report), &report)
}

#[derive(Serialize)]
struct WinRow {
    model: String,
    winpct: f64,
    #[serde(flatten)]
    tally: WinTally,
}

pub fn winpct(votes: &Path, out: &OutputArgs) -> Result<()> {
    let votes = read_votes(votes).with_context(|| format!("reading votes {}", votes.display()))?;
    let rows: Vec<WinRow> = models_in(&votes)
        .into_iter()
        .map(|model| {
            let tally = WinTally::of(&votes, &model);
            WinRow {
                winpct: tally.ratio(),
                model,
                tally,
            }
        })
        .collect();
    let table = Table {
        headers: ["model", "winpct", "win", "both", "total"]
            .map(String::from)
            .to_vec(),
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.model.clone(),
                    format!("{:.6}", r.winpct),
                    r.tally.win.to_string(),
                    r.tally.both.to_string(),
                    r.tally.total.to_string(),
                ]
            })
            .collect(),
    };
    emit(out, &table, &rows)
}

pub fn categories(
    votes: &Path,
    dataset: &Path,
    svg: Option<&Path>,
    out: &OutputArgs,
) -> Result<()> {
    let votes = read_votes(votes).with_context(|| format!("reading votes {}", votes.display()))?;
    let breakdown = category_winpct(&votes, &load_dataset(dataset)?)?;
    if let Some(path) = svg {
        write_file(path, category_bars_svg(&breakdown).as_bytes())?;
    }
    emit(out, &category_table(&breakdown), &breakdown)
}

fn method(m: Method) -> CorrelationMethod {
    match m {
        Method::Pearson => CorrelationMethod::Pearson,
        Method::Spearman => CorrelationMethod::Spearman,
    }
}

pub fn correlate(
    inputs: &Inputs,
    m: Method,
    elo: &EloArgs,
    embed: &EmbedArgs,
    out: &OutputArgs,
) -> Result<()> {
    let emb = embedder(embed)?;
    let v = score_set(&inputs.v_dataset, &inputs.v_responses, &emb)?;
    let g = match &inputs.g {
        Some((ds, resp)) => Some(score_set(ds, resp, &emb)?),
        None => None,
    };
    let r = ratings(elo)?;
    let (_, cols) = score_columns(&v, &r, g.as_ref())?;
    let matrix = metric_correlations(&cols, method(m))?;
    emit(out, &correlation_table(&matrix), &matrix)
}

#[derive(Serialize)]
struct FullReport<'a> {
    voting: &'a MetricReport,
    general: Option<&'a MetricReport>,
    ratings: &'a RatingReport,
    categories: &'a evalarena::CategoryBreakdown,
    correlations: &'a evalarena::CorrelationMatrix,
}

pub fn report(
    inputs: &Inputs,
    m: Method,
    elo: &EloArgs,
    embed: &EmbedArgs,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let emb = embedder(embed)?;
    let v_ds = load_dataset(&inputs.v_dataset)?;
    let v = score_set(&inputs.v_dataset, &inputs.v_responses, &emb)?;
    let g = match &inputs.g {
        Some((ds, resp)) => Some(score_set(ds, resp, &emb)?),
        None => None,
    };
    let votes =
        read_votes(&elo.votes).with_context(|| format!("reading votes {}", elo.votes.display()))?;
    let models = if elo.models.is_empty() {
        v.rows.iter().map(|r| r.model.clone()).collect()
    } else {
        elo.models.clone()
    };
    let r = rating_report(&votes, &models, &elo_config(elo)?)?;
    let cats = category_winpct(&votes, &v_ds)?;
    let (_, cols) = score_columns(&v, &r, g.as_ref())?;
    let matrix = metric_correlations(&cols, method(m))?;

    let files: Vec<(&str, Vec<u8>)> = vec![
        ("v_scores.csv", csv_bytes(&voting_score_table(&v, &r))?),
        ("v_metrics.csv", csv_bytes(&metric_table(&v))?),
        ("ratings.csv", csv_bytes(&rating_table(&r))?),
        ("categories.csv", csv_bytes(&category_table(&cats))?),
        ("correlations.csv", csv_bytes(&correlation_table(&matrix))?),
        ("elo_ci.svg", elo_interval_svg(&r).into_bytes()),
        ("categories.svg", category_bars_svg(&cats).into_bytes()),
        (
            "report.json",
            json_bytes(&FullReport {
                voting: &v,
                general: g.as_ref(),
                ratings: &r,
                categories: &cats,
                correlations: &matrix,
            })?,
        ),
    ];
    for (name, bytes) in &files {
        write_file(&out_dir.join(name), bytes)?;
    }
    if let Some(g) = &g {
        write_file(
            &out_dir.join("g_scores.csv"),
            &csv_bytes(&general_score_table(g))?,
        )?;
        write_file(
            &out_dir.join("g_metrics.csv"),
            &csv_bytes(&metric_table(g))?,
        )?;
    }
    print!("{}", voting_score_table(&v, &r).to_aligned());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn serve(
    dataset: &Path,
    responses: &Path,
    log: &Path,
    addr: SocketAddr,
    token: Option<String>,
    policy: Policy,
    seed: u64,
    permutations: usize,
) -> Result<()> {
    let ds = load_dataset(dataset)?;
    let sets = load_response_dir(responses, &ds)
        .with_context(|| format!("loading responses from {}", responses.display()))?;
    let cfg = ArenaConfig {
        policy: match policy {
            Policy::Balanced => SchedulerPolicy::Balanced,
            Policy::Uniform => SchedulerPolicy::Uniform,
        },
        scheduler_seed: seed,
        elo: EloConfig {
            permutations,
            ..ArenaConfig::default().elo
        },
    };
    let arena = Arena::open(ds, sets, log, cfg)
        .with_context(|| format!("opening vote log {}", log.display()))?;
    tracing::info!(
        votes = arena.version(),
        models = arena.models().len(),
        "vote log replayed"
    );
    let state = evalarena_server::AppState::new(arena, token);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(evalarena_server::serve(addr, state))?;
    Ok(())
}
