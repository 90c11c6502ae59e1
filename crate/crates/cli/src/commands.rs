use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use eventstory_core::corpus::{
    preprocess_corpus, read_jsonl, validate_splits, write_json, write_jsonl,
    write_preprocessed, CorpusError, Dataset, NameLexicon, Split, StoryRecord,
};
use eventstory_core::events::{
    build_event_graph, ConlluParser, DependencyParser, EventExtractor, EventRecord, ExtractionStats,
    FallbackParser, HeuristicParser,
};
use eventstory_core::metrics::{evaluate as score, EmbeddingSource, EvalStory, WordEmbeddingTable};
use eventstory_core::text::RuleSplitter;
use eventstory_model::batch::{build_vocab, prepare_examples};
use eventstory_model::checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
use eventstory_model::generate::{default_max_new_tokens, generate as sample, GeneratedStory};
use eventstory_model::similarity::{
    cache_file_name, read_cache, similarity_targets, write_cache, HashedBagOfWords, MeanWordVectors,
    SentenceEmbedder,
};
use eventstory_model::train::{evaluate_loss, train as fit, warm_start, StepRecord};
use eventstory_model::{EventStoryModel, Example, InputLayout};
use serde::Serialize;

use crate::error::{require, CliError};
use crate::manifest::Recorder;
use crate::Context;

/// Output failures surface as exit code 5 rather than as corpus errors.
fn writing<T>(path: &Path, r: Result<T, CorpusError>) -> Result<T, CliError> {
    r.map_err(|e| CliError::output(path, e))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

/// Where the manifest of a file-valued `--out` goes.
fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn finish(rec: Recorder, dir: &Path, ctx: &Context) -> Result<(), CliError> {
    let path = rec.finish(dir, ctx.config.train.seed, ctx.config.snapshot())?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn preprocess(ctx: &Context, dataset: Dataset, input: &Path, lexicon: Option<&Path>) -> Result<(), CliError> {
    require(input)?;
    let out = ctx.out("DIR")?;
    let mut rec = Recorder::start("preprocess");
    rec.input(input);
    let lexicon = match lexicon {
        Some(p) => {
            require(p)?;
            rec.input(p);
            NameLexicon::load(p)?
        }
        None => NameLexicon::bundled(),
    };
    let output = preprocess_corpus(input, dataset, &lexicon, &RuleSplitter)?;
    let check = validate_splits(&output.manifest);
    for m in check.mismatches() {
        log::warn!(
            "{dataset} {} split has {} stories, the published size is {}",
            m.split,
            m.actual,
            m.expected
        );
    }
    let written = writing(&out, write_preprocessed(&out, &output))?;
    for p in &written {
        rec.output(p);
    }
    log::info!("{} stories written to {}", output.records.len(), out.display());
    finish(rec, &out, ctx)
}

/// Story files under a directory, skipping event files.
fn story_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::InvalidInput {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut files: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".jsonl") && !name.ends_with(".events.jsonl")
        })
        .collect();
    files.sort();
    Ok(files)
}

fn file_stem(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("stories");
    name.strip_suffix(".jsonl").unwrap_or(name).to_string()
}

#[derive(Serialize)]
struct ExtractionSummary {
    parser: String,
    files: Vec<String>,
    stories: usize,
    #[serde(flatten)]
    stats: ExtractionStats,
}

pub fn extract_events(ctx: &Context, input: &Path, parses: Option<&Path>) -> Result<(), CliError> {
    require(input)?;
    let out = ctx.out("DIR")?;
    create_dir(&out)?;
    let mut rec = Recorder::start("extract-events");
    let parser: Box<dyn DependencyParser> = match parses {
        Some(p) => {
            require(p)?;
            rec.input(p);
            Box::new(FallbackParser {
                providers: vec![Box::new(ConlluParser::load(p)?), Box::new(HeuristicParser)],
            })
        }
        None => Box::new(HeuristicParser),
    };
    let extractor = EventExtractor::new(parser);
    let files = if input.is_dir() { story_files(input)? } else { vec![input.to_path_buf()] };
    let mut summary = ExtractionSummary {
        parser: extractor.parser_version(),
        files: Vec::new(),
        stories: 0,
        stats: ExtractionStats::default(),
    };
    for file in &files {
        rec.input(file);
        let stories: Vec<StoryRecord> = read_jsonl(file)?;
        let mut records = Vec::with_capacity(stories.len());
        for story in &stories {
            let (record, stats) = extractor.extract_record(story)?;
            summary.stats.merge(&stats);
            records.push(record);
        }
        let path = out.join(format!("{}.events.jsonl", file_stem(file)));
        writing(&path, write_jsonl(&path, &records))?;
        rec.output(&path);
        summary.stories += records.len();
        summary.files.push(path.display().to_string());
    }
    if summary.stats.placeholders > 0 {
        log::info!(
            "{} of {} sentences had no verbal root and got a placeholder event",
            summary.stats.placeholders,
            summary.stats.sentences
        );
    }
    let path = out.join("extraction_stats.json");
    writing(&path, write_json(&path, &summary))?;
    rec.output(&path);
    finish(rec, &out, ctx)
}

pub fn build_graph(ctx: &Context, input: &Path) -> Result<(), CliError> {
    require(input)?;
    let out = ctx.out("PATH")?;
    let mut rec = Recorder::start("build-graph");
    rec.input(input);
    let records: Vec<EventRecord> = read_jsonl(input)?;
    let sequences: Vec<_> = records.iter().map(EventRecord::sequence).collect();
    let graph = build_event_graph(&sequences);
    log::info!("{} distinct triples, {} in total", graph.len(), graph.total());
    let dir = parent_dir(&out);
    create_dir(&dir)?;
    writing(&out, write_json(&out, &graph))?;
    rec.output(&out);
    finish(rec, &dir, ctx)
}

/// `source:path`, e.g. `wiki:glove.6B.300d.txt`.
fn parse_embedding_arg(raw: &str) -> Result<(EmbeddingSource, PathBuf), CliError> {
    let (src, path) = raw
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("expected SOURCE:PATH, got '{raw}'")))?;
    let source = src
        .parse::<EmbeddingSource>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok((source, PathBuf::from(path)))
}

fn load_table(raw: &str, words: Option<&HashSet<String>>, rec: &mut Recorder) -> Result<WordEmbeddingTable, CliError> {
    let (source, path) = parse_embedding_arg(raw)?;
    require(&path)?;
    rec.input(&path);
    Ok(WordEmbeddingTable::load(&path, source, words)?)
}

/// Events are looked up next to the stories unless a directory is given.
fn events_path(stories: &Path, events_dir: Option<&Path>) -> PathBuf {
    let name = format!("{}.events.jsonl", file_stem(stories));
    match events_dir {
        Some(d) => d.join(name),
        None => parent_dir(stories).join(name),
    }
}

fn load_split(
    data: &Path,
    events_dir: Option<&Path>,
    dataset: &str,
    split: Split,
    rec: &mut Recorder,
) -> Result<Option<(Vec<StoryRecord>, Vec<EventRecord>)>, CliError> {
    let stories_path = data.join(format!("{dataset}.{split}.jsonl"));
    if !stories_path.exists() {
        return Ok(None);
    }
    let ev_path = events_path(&stories_path, events_dir);
    require(&ev_path)?;
    rec.input(&stories_path);
    rec.input(&ev_path);
    Ok(Some((read_jsonl(&stories_path)?, read_jsonl(&ev_path)?)))
}

/// Reference similarity matrices, read from the cache when it was built by
/// the same provider for the same stories.
fn attach_similarity_targets(
    examples: &mut [Example],
    stories: &[StoryRecord],
    embedder: &dyn SentenceEmbedder,
    cache: &Path,
) -> Result<(), CliError> {
    let cached = match read_cache(cache) {
        Ok((provider, matrices)) if provider == embedder.name() && matrices.len() == stories.len() => {
            let shapes_match = matrices.iter().zip(stories).all(|(m, s)| m.len() == s.sentences.len());
            shapes_match.then_some(matrices)
        }
        _ => None,
    };
    let matrices = match cached {
        Some(m) => {
            log::info!("similarity targets read from {}", cache.display());
            m
        }
        None => {
            let mut zeros = 0;
            let m: Vec<Vec<Vec<f32>>> = stories
                .iter()
                .map(|s| {
                    let (t, z) = similarity_targets(&s.sentences, embedder);
                    zeros += z;
                    t
                })
                .collect();
            if zeros > 0 {
                log::warn!("{zeros} reference sentences had no embedding");
            }
            write_cache(cache, &embedder.name(), &m)?;
            m
        }
    };
    for (ex, m) in examples.iter_mut().zip(matrices) {
        ex.sim_target = Some(m);
    }
    Ok(())
}

fn write_metrics_csv(path: &Path, records: &[StepRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::output(path, e))?;
    w.write_record(["step", "lm_loss", "sent_loss", "overall", "dev_loss"])
        .map_err(|e| CliError::output(path, e))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.step.to_string(),
            r.lm_loss.to_string(),
            opt(r.sent_loss),
            r.overall.to_string(),
            opt(r.dev_loss),
        ])
        .map_err(|e| CliError::output(path, e))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

#[derive(Serialize)]
struct TrainSummary {
    train_examples: usize,
    dev_examples: usize,
    vocab_size: usize,
    parameters: usize,
    steps: usize,
    best_epoch: Option<usize>,
    dev_losses: Vec<f64>,
    final_lm_loss: Option<f64>,
    warm_start_steps: usize,
    similarity_provider: Option<String>,
}

pub fn train(
    ctx: &Context,
    data: &Path,
    events_dir: Option<&Path>,
    dataset: &str,
    sim_embeddings: Option<&str>,
) -> Result<(), CliError> {
    require(data)?;
    let out = ctx.out("DIR")?;
    create_dir(&out)?;
    let cfg = &ctx.config;
    let mut rec = Recorder::start("train");
    let (train_stories, train_events) = load_split(data, events_dir, dataset, Split::Train, &mut rec)?
        .ok_or_else(|| CliError::MissingInput(data.join(format!("{dataset}.train.jsonl"))))?;
    let dev = load_split(data, events_dir, dataset, Split::Dev, &mut rec)?;
    let vocab = build_vocab(&train_stories, &train_events, cfg.data.min_count);
    log::info!("vocabulary of {} tokens", vocab.len());

    let (max_src, max_tgt) = (cfg.model.max_source_length, cfg.model.max_target_length);
    let mut train_set = prepare_examples(&train_stories, &train_events, &vocab, None, max_src, max_tgt)?;
    let mut dev_set = match &dev {
        Some((s, e)) => prepare_examples(s, e, &vocab, None, max_src, max_tgt)?,
        None => Vec::new(),
    };
    let embedder: Option<Box<dyn SentenceEmbedder>> = if !cfg.model.uses_similarity() {
        None
    } else if let Some(raw) = sim_embeddings {
        let words: HashSet<String> = train_stories
            .iter()
            .chain(dev.iter().flat_map(|(s, _)| s))
            .flat_map(|s| s.sentences.iter().flatten().cloned())
            .collect();
        Some(Box::new(MeanWordVectors {
            table: load_table(raw, Some(&words), &mut rec)?,
        }))
    } else {
        Some(Box::new(HashedBagOfWords { dim: cfg.data.hashed_dim }))
    };
    if let Some(e) = &embedder {
        let cache = out.join(cache_file_name(dataset, "train"));
        attach_similarity_targets(&mut train_set, &train_stories, e.as_ref(), &cache)?;
        rec.output(&cache);
        if let Some((s, _)) = &dev {
            let cache = out.join(cache_file_name(dataset, "dev"));
            attach_similarity_targets(&mut dev_set, s, e.as_ref(), &cache)?;
            rec.output(&cache);
        }
    }

    let mut warm_steps = 0;
    let model = if cfg.train.warm_start_epochs > 0 && cfg.model.uses_context() && cfg.model.uses_events() {
        log::info!("warm-starting the event encoder for {} epoch(s)", cfg.train.warm_start_epochs);
        let (model, report) = warm_start(&cfg.model, vocab.clone(), &train_set, &dev_set, &cfg.train)?;
        let path = out.join("metrics.stage1.csv");
        write_metrics_csv(&path, &report.records)?;
        rec.output(&path);
        warm_steps = report.steps;
        model
    } else {
        EventStoryModel::new(cfg.model.clone(), vocab.clone())?
    };
    log::info!("{} parameters", model.params.count());
    let report = fit(&model, &train_set, &dev_set, &cfg.train, InputLayout::Separate, |_| {})?;

    let path = out.join("metrics.csv");
    write_metrics_csv(&path, &report.records)?;
    rec.output(&path);
    let meta = CheckpointMeta {
        config: model.config.clone(),
        crate_version: eventstory_model::VERSION.to_string(),
        max_train_target: train_set.iter().map(|e| e.target.len()).max(),
        epoch: report.best_epoch.map(|e| e + 1),
        dev_loss: report.best_epoch.map(|e| report.dev_losses[e]),
    };
    let ckpt = out.join("checkpoint");
    save_checkpoint(&ckpt, &model, &meta)?;
    rec.output(&ckpt);
    let summary = TrainSummary {
        train_examples: train_set.len(),
        dev_examples: dev_set.len(),
        vocab_size: vocab.len(),
        parameters: model.params.count(),
        steps: report.steps,
        best_epoch: report.best_epoch,
        dev_losses: report.dev_losses.clone(),
        final_lm_loss: report.records.last().map(|r| r.lm_loss),
        warm_start_steps: warm_steps,
        similarity_provider: embedder.as_ref().map(|e| e.name()),
    };
    let path = out.join("train_report.json");
    writing(&path, write_json(&path, &summary))?;
    rec.output(&path);
    finish(rec, &out, ctx)
}

/// Stories paired with their events, in story order.
fn examples_for(
    model: &EventStoryModel,
    stories_path: &Path,
    events: Option<&Path>,
    rec: &mut Recorder,
) -> Result<(Vec<StoryRecord>, Vec<Example>), CliError> {
    require(stories_path)?;
    let ev_path = events.map(Path::to_path_buf).unwrap_or_else(|| events_path(stories_path, None));
    require(&ev_path)?;
    rec.input(stories_path);
    rec.input(&ev_path);
    let stories: Vec<StoryRecord> = read_jsonl(stories_path)?;
    let records: Vec<EventRecord> = read_jsonl(&ev_path)?;
    let cfg = &model.config;
    let examples = prepare_examples(
        &stories,
        &records,
        &model.vocab,
        None,
        cfg.max_source_length,
        cfg.max_target_length,
    )?;
    Ok((stories, examples))
}

pub fn generate(ctx: &Context, checkpoint: &Path, input: &Path, events: Option<&Path>) -> Result<(), CliError> {
    require(checkpoint)?;
    let out = ctx.out("JSONL")?;
    let mut rec = Recorder::start("generate");
    rec.input(checkpoint);
    let (model, meta) = load_checkpoint(checkpoint)?;
    let (_, examples) = examples_for(&model, input, events, &mut rec)?;
    let gen = &ctx.config.generation;
    let budget = gen
        .max_new_tokens
        .unwrap_or_else(|| default_max_new_tokens(meta.max_train_target.unwrap_or(model.config.max_target_length)));
    let stories = sample(&model, &examples, gen, budget, &RuleSplitter)?;
    let truncated = stories.iter().filter(|s| s.hit_limit).count();
    if truncated > 0 {
        log::warn!("{truncated} of {} stories hit the {budget}-token limit", stories.len());
    }
    let dir = parent_dir(&out);
    create_dir(&dir)?;
    writing(&out, write_jsonl(&out, &stories))?;
    rec.output(&out);
    finish(rec, &dir, ctx)
}

pub fn evaluate(
    ctx: &Context,
    generated: &Path,
    references: &Path,
    embeddings: &[String],
    checkpoint: Option<&Path>,
    events: Option<&Path>,
) -> Result<(), CliError> {
    require(generated)?;
    require(references)?;
    let out = ctx.out("JSON")?;
    let mut rec = Recorder::start("evaluate");
    rec.input(generated);
    rec.input(references);
    let candidates: Vec<GeneratedStory> = read_jsonl(generated)?;
    let refs: Vec<StoryRecord> = read_jsonl(references)?;
    let by_id: HashMap<&str, &StoryRecord> = refs.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut stories = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let r = by_id.get(c.story_id.as_str()).ok_or_else(|| CliError::InvalidInput {
            path: references.to_path_buf(),
            message: format!("no reference for generated story {}", c.story_id),
        })?;
        stories.push(EvalStory {
            id: c.story_id.clone(),
            context: r.leading_context.clone(),
            candidate: c
                .sentences
                .iter()
                .map(|s| s.split_whitespace().map(String::from).collect())
                .collect(),
            reference: r.sentences.clone(),
        });
    }
    let words: HashSet<String> = stories
        .iter()
        .flat_map(|s| s.context.iter().chain(s.candidate.iter().flatten()))
        .cloned()
        .collect();
    let mut tables = Vec::with_capacity(embeddings.len());
    for raw in embeddings {
        tables.push(load_table(raw, Some(&words), &mut rec)?);
    }
    let mut report = score(&stories, &tables)?;
    if let Some(ckpt) = checkpoint {
        require(ckpt)?;
        rec.input(ckpt);
        let (model, _) = load_checkpoint(ckpt)?;
        let (_, examples) = examples_for(&model, references, events, &mut rec)?;
        let loss = evaluate_loss(&model, &examples, &ctx.config.train, InputLayout::Separate)?;
        report.ppl = Some(eventstory_core::metrics::perplexity_from_sum(loss.nll_sum, loss.tokens)?);
    }
    let dir = parent_dir(&out);
    create_dir(&dir)?;
    writing(&out, write_json(&out, &report))?;
    rec.output(&out);
    finish(rec, &dir, ctx)
}
