use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use numsarc::corpus::{build_dataset, ingest, read_jsonl, stratified_kfold, write_jsonl, DatasetSpec, FoldAssignment, LabeledTweet, RawTweet};
use numsarc::embeddings::{load_embeddings, save_embeddings, train_sgns, SgnsConfig};
use numsarc::eval::{
    crossvalidate, evaluate, labels_of, Artifact, CrossValReport, MetricsReport, Pipeline, PipelineConfig,
    PipelineKind, StandardPipeline,
};
use numsarc::features::{write_feature_csv, FeatureConfig, FeatureExtractor};
use numsarc::neural::TrainReport;
use numsarc::rulebase::{RuleConfig, RuleModel};
use numsarc::synth::{self, SynthConfig};
use numsarc::text::{AnalyzedTweet, Analyzer, Tagger, UnitNormalizer};
use numsarc::{EmbeddingTable64, RuleModel64};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::data::{file_digest, load_table, load_tweets};
use crate::{Cli, Command, CrossvalArgs, EmbedArgs, TrainArgs, UsageError};

const MODEL_FILE_VERSION: u32 = 1;

/// A saved pipeline.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    pipeline: PipelineKind,
    seed: u64,
    artifact: Artifact,
}

#[derive(Debug, Serialize)]
struct Scored {
    digest: String,
    size: usize,
    metrics: MetricsReport,
}

#[derive(Debug, Serialize)]
struct TrainOutput<'a> {
    pipeline: PipelineKind,
    seed: u64,
    config: &'a PipelineConfig,
    train: DataRef,
    artifact_fingerprint: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    training: Option<&'a TrainReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    test: Option<Scored>,
}

#[derive(Debug, Serialize)]
struct DataRef {
    digest: String,
    size: usize,
}

#[derive(Debug, Serialize)]
struct CrossvalOutput<'a> {
    seed: u64,
    config: &'a PipelineConfig,
    data: DataRef,
    #[serde(flatten)]
    report: CrossValReport,
}

#[derive(Debug, Serialize)]
struct EvaluateOutput {
    pipeline: PipelineKind,
    seed: u64,
    test: Scored,
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    analyzer: Analyzer,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn table(&self, flag: Option<&Path>) -> Result<Option<Arc<EmbeddingTable64>>> {
        load_table(flag.or(self.cfg.embeddings.as_deref()))
    }

    fn tweets(&self, path: &Path) -> Result<Vec<AnalyzedTweet>> {
        load_tweets(path, &self.analyzer)
    }

    fn pipeline_kind(&self, flag: Option<PipelineKind>) -> Result<PipelineKind> {
        flag.or(self.cfg.pipeline)
            .ok_or_else(|| UsageError("no pipeline: pass --model or set `pipeline` in the config".into()).into())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_text(path, &s)
}

fn write_text(path: &Path, s: &str) -> Result<()> {
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn print_metrics(rows: &[(String, &MetricsReport)]) {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(5);
    println!("{:<width$}  {}", "", MetricsReport::TABLE_HEADER);
    for (name, m) in rows {
        println!("{name:<width$}  {}", m.table_row());
    }
}

fn analyzer(pos_lexicon: Option<&Path>, unit_aliases: Option<&Path>) -> Result<Analyzer> {
    let tagger = pos_lexicon.map(Tagger::from_file).transpose()?.unwrap_or_default();
    let units = unit_aliases.map(UnitNormalizer::from_file).transpose()?.unwrap_or_default();
    Ok(Analyzer::new(tagger, units))
}

fn data_ref(path: &Path, size: usize) -> Result<DataRef> {
    Ok(DataRef {
        digest: file_digest(path)?,
        size,
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.global.config {
        Some(p) => RunConfig::load(p).map_err(|e| UsageError(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.global.seed {
        cfg.seed = s;
    }
    cfg.check().map_err(|e| UsageError(format!("{e:#}")))?;
    fs::create_dir_all(&cli.global.output_dir)
        .with_context(|| format!("creating {}", cli.global.output_dir.display()))?;
    let ctx = Ctx {
        cfg,
        out: cli.global.output_dir,
        analyzer: analyzer(cli.global.pos_lexicon.as_deref(), cli.global.unit_aliases.as_deref())?,
    };
    match cli.command {
        Command::Ingest { input, preset } => cmd_ingest(&ctx, &input, preset),
        Command::Analyze { input } => cmd_analyze(&ctx, &input),
        Command::BuildRepo {
            train,
            strategy,
            embeddings,
        } => cmd_build_repo(&ctx, &train, strategy, embeddings.as_deref()),
        Command::PredictRule {
            repo,
            input,
            embeddings,
        } => cmd_predict_rule(&ctx, &repo, &input, embeddings.as_deref()),
        Command::Featurize {
            input,
            train,
            features,
            embeddings,
        } => cmd_featurize(&ctx, &input, train.as_deref(), features, embeddings.as_deref()),
        Command::Train(args) => cmd_train(&ctx, args),
        Command::Evaluate {
            model,
            test,
            embeddings,
        } => cmd_evaluate(&ctx, &model, &test, embeddings.as_deref()),
        Command::Crossval(args) => cmd_crossval(&ctx, args),
        Command::Embed(args) => cmd_embed(&ctx, args),
        Command::Synth { size } => cmd_synth(&ctx, size),
    }
}

fn cmd_ingest(ctx: &Ctx, input: &Path, preset: Option<numsarc::corpus::DatasetName>) -> Result<()> {
    let raw: Vec<RawTweet> = read_jsonl(input)?;
    let (mut corpus, stats) = ingest(&raw)?;
    let name = match preset {
        Some(p) => {
            corpus = build_dataset(&corpus, &DatasetSpec::preset(p), ctx.cfg.seed)?;
            format!("{p}.jsonl")
        }
        None => "corpus.jsonl".into(),
    };
    write_jsonl(&ctx.path(&name), &corpus)?;
    eprintln!("wrote {}", ctx.path(&name).display());
    write_json(&ctx.path("ingest_stats.json"), &stats)?;
    println!("read {}  kept {}  unlabeled {}  empty {}  duplicates {}", stats.read, stats.kept, stats.unlabeled, stats.empty, stats.duplicates);
    if preset.is_some() {
        let pos = corpus.iter().filter(|t| t.label.is_positive()).count();
        println!("sampled {} ({} sarcastic, {} non-sarcastic)", corpus.len(), pos, corpus.len() - pos);
    }
    Ok(())
}

fn cmd_analyze(ctx: &Ctx, input: &Path) -> Result<()> {
    let tweets = ctx.tweets(input)?;
    let path = ctx.path("analyzed.jsonl");
    write_jsonl(&path, &tweets)?;
    eprintln!("wrote {}", path.display());
    let numeric = tweets.iter().filter(|t| !t.mentions.is_empty()).count();
    println!("analyzed {}  with numeric mentions {}", tweets.len(), numeric);
    Ok(())
}

fn cmd_build_repo(ctx: &Ctx, train: &Path, strategy: Option<numsarc::rulebase::MatchStrategy>, emb: Option<&Path>) -> Result<()> {
    let tweets = ctx.tweets(train)?;
    let table = ctx.table(emb)?;
    let config = RuleConfig {
        strategy: strategy.unwrap_or(ctx.cfg.rule.strategy),
        ..ctx.cfg.rule
    };
    let model = RuleModel::build(&tweets, config, table.as_deref())?;
    write_json(&ctx.path("repo.json"), &model)?;
    for repo in [&model.sarcastic, &model.non_sarcastic] {
        println!("class {}: {} entries, {} skipped", repo.label, repo.entries.len(), repo.skipped.len());
        for s in repo.unit_stats.values() {
            println!("  {:<12} n={:<5} mean={:.4} sd={:.4}", s.unit, s.count, s.mean, s.std_dev);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RuleOutput<'a> {
    id: &'a str,
    #[serde(flatten)]
    prediction: &'a numsarc::rulebase::RulePrediction,
}

fn cmd_predict_rule(ctx: &Ctx, repo: &Path, input: &Path, emb: Option<&Path>) -> Result<()> {
    let src = fs::read_to_string(repo).with_context(|| format!("reading {}", repo.display()))?;
    let model: RuleModel64 = serde_json::from_str(&src).with_context(|| format!("parsing {}", repo.display()))?;
    let tweets = ctx.tweets(input)?;
    let table = ctx.table(emb)?;
    let preds = model.predict_all(&tweets, table.as_deref())?;
    let rows: Vec<RuleOutput> = tweets
        .iter()
        .zip(&preds)
        .map(|(t, p)| RuleOutput {
            id: &t.id,
            prediction: p,
        })
        .collect();
    let path = ctx.path("predictions.jsonl");
    write_jsonl(&path, &rows)?;
    eprintln!("wrote {}", path.display());
    let mut paths: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &preds {
        *paths.entry(p.path.name()).or_default() += 1;
    }
    for (k, v) in &paths {
        println!("{k:<18} {v}");
    }
    if let Ok(golds) = labels_of(&tweets) {
        let labels: Vec<_> = preds.iter().map(|p| p.label).collect();
        let m = MetricsReport::from_predictions(&labels, &golds)?;
        write_json(&ctx.path("metrics.json"), &m)?;
        print_metrics(&[(format!("rule-{}", model.config.strategy), &m)]);
    }
    Ok(())
}

fn cmd_featurize(ctx: &Ctx, input: &Path, train: Option<&Path>, features: Option<String>, emb: Option<&Path>) -> Result<()> {
    let tweets = ctx.tweets(input)?;
    let units = match train {
        Some(p) => FeatureConfig::units_from(&ctx.tweets(p)?),
        None => FeatureConfig::units_from(&tweets),
    };
    let families = FeatureConfig::parse_families(features.as_deref().unwrap_or(&ctx.cfg.features))?;
    let table = ctx.table(emb)?;
    let dim = table.as_ref().map_or(0, |t| t.dim());
    let extractor = FeatureExtractor::new(FeatureConfig::new(families, dim, units)?);
    let rows = extractor.extract_matrix(&tweets, table.as_deref())?;
    let path = ctx.path("features.csv");
    write_feature_csv(&path, &extractor.config, &tweets, &rows)?;
    eprintln!("wrote {}", path.display());
    println!("{} rows x {} columns", rows.len(), extractor.config.width());
    Ok(())
}

fn cmd_train(ctx: &Ctx, args: TrainArgs) -> Result<()> {
    let kind = ctx.pipeline_kind(args.model)?;
    let tweets = ctx.tweets(&args.train)?;
    let table = ctx.table(args.embeddings.as_deref())?;
    let config = ctx.cfg.pipeline_config();
    let pipeline = StandardPipeline::new(kind, config.clone(), table, ctx.cfg.seed);
    let fitted = pipeline.fit(&tweets)?;
    let artifact = fitted.artifact();
    let test = match &args.test {
        Some(p) => {
            let test = ctx.tweets(p)?;
            Some(Scored {
                digest: file_digest(p)?,
                size: test.len(),
                metrics: evaluate(fitted.as_ref(), &test)?,
            })
        }
        None => None,
    };
    let training = match &artifact {
        Artifact::Neural { report, .. } => Some(report),
        _ => None,
    };
    let out = TrainOutput {
        pipeline: kind,
        seed: ctx.cfg.seed,
        config: &config,
        train: data_ref(&args.train, tweets.len())?,
        artifact_fingerprint: artifact.fingerprint(),
        training,
        test,
    };
    write_json(&ctx.path("train_report.json"), &out)?;
    if let Some(r) = training {
        write_text(&ctx.path("loss.csv"), &r.loss_csv())?;
    }
    let train_metrics = evaluate(fitted.as_ref(), &tweets)?;
    let mut rows = vec![("train".to_string(), &train_metrics)];
    if let Some(t) = &out.test {
        rows.push(("test".to_string(), &t.metrics));
    }
    print_metrics(&rows);
    write_json(
        &ctx.path("model.json"),
        &ModelFile {
            format_version: MODEL_FILE_VERSION,
            pipeline: kind,
            seed: ctx.cfg.seed,
            artifact,
        },
    )
}

fn cmd_evaluate(ctx: &Ctx, model: &Path, test: &Path, emb: Option<&Path>) -> Result<()> {
    let src = fs::read_to_string(model).with_context(|| format!("reading {}", model.display()))?;
    let file: ModelFile = serde_json::from_str(&src).with_context(|| format!("parsing {}", model.display()))?;
    if file.format_version != MODEL_FILE_VERSION {
        anyhow::bail!("model file version {} is not supported", file.format_version);
    }
    let fitted = file.artifact.into_fitted(ctx.table(emb)?)?;
    let tweets = ctx.tweets(test)?;
    let metrics = evaluate(fitted.as_ref(), &tweets)?;
    print_metrics(&[(file.pipeline.to_string(), &metrics)]);
    write_json(
        &ctx.path("metrics.json"),
        &EvaluateOutput {
            pipeline: file.pipeline,
            seed: file.seed,
            test: Scored {
                digest: file_digest(test)?,
                size: tweets.len(),
                metrics,
            },
        },
    )
}

fn labelled(tweets: &[AnalyzedTweet]) -> Result<Vec<LabeledTweet>> {
    let labels = labels_of(tweets)?;
    Ok(tweets
        .iter()
        .zip(labels)
        .map(|(t, l)| LabeledTweet::new(t.id.clone(), t.text.clone(), l))
        .collect())
}

fn cmd_crossval(ctx: &Ctx, args: CrossvalArgs) -> Result<()> {
    let kind = ctx.pipeline_kind(args.model)?;
    let tweets = ctx.tweets(&args.data)?;
    let folds = match &args.folds {
        Some(p) => {
            let src = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let assignments: BTreeMap<String, usize> = serde_json::from_str(&src)?;
            let k = assignments.values().max().map_or(0, |m| m + 1);
            FoldAssignment {
                k,
                seed: ctx.cfg.seed,
                assignments,
            }
        }
        None => stratified_kfold(&labelled(&tweets)?, args.k.unwrap_or(ctx.cfg.folds), ctx.cfg.seed)?,
    };
    if let Some(p) = &args.export_folds {
        write_json(p, &folds.assignments)?;
    }
    let config = ctx.cfg.pipeline_config();
    let table = ctx.table(args.embeddings.as_deref())?;
    let pipeline = StandardPipeline::new(kind, config.clone(), table, ctx.cfg.seed);
    let report = crossvalidate(&pipeline, &tweets, &folds)?;
    let mut rows: Vec<(String, &MetricsReport)> =
        report.folds.iter().map(|f| (format!("fold {}", f.fold), &f.metrics)).collect();
    rows.push(("mean".into(), &report.mean));
    print_metrics(&rows);
    write_json(
        &ctx.path("crossval.json"),
        &CrossvalOutput {
            seed: ctx.cfg.seed,
            config: &config,
            data: data_ref(&args.data, tweets.len())?,
            report,
        },
    )
}

#[derive(Serialize)]
struct EmbeddingInfo {
    words: usize,
    dim: usize,
    fingerprint: String,
}

fn cmd_embed(ctx: &Ctx, args: EmbedArgs) -> Result<()> {
    let table: EmbeddingTable64 = match (&args.train_sgns, &args.load) {
        (Some(corpus), _) => {
            let tweets = ctx.tweets(corpus)?;
            let sentences: Vec<Vec<String>> = tweets.into_iter().map(|t| t.tokens).collect();
            let sgns = SgnsConfig {
                seed: ctx.cfg.seed,
                ..ctx.cfg.sgns.clone()
            };
            let outcome = train_sgns(&sentences, &sgns)?;
            let mut csv = String::from("epoch,loss\n");
            for (i, l) in outcome.epoch_losses.iter().enumerate() {
                csv.push_str(&format!("{},{l}\n", i + 1));
            }
            write_text(&ctx.path("sgns_loss.csv"), &csv)?;
            outcome.table
        }
        (None, Some(path)) => load_embeddings(path, None)?,
        (None, None) => return Err(UsageError("pass --train-sgns or --load".into()).into()),
    };
    let path = ctx.path("embeddings.txt");
    save_embeddings(&path, &table)?;
    eprintln!("wrote {}", path.display());
    let info = EmbeddingInfo {
        words: table.len(),
        dim: table.dim(),
        fingerprint: table.fingerprint(),
    };
    println!("{} words x {} dims  fingerprint {}", info.words, info.dim, info.fingerprint);
    write_json(&ctx.path("embeddings_info.json"), &info)
}

fn cmd_synth(ctx: &Ctx, size: Option<usize>) -> Result<()> {
    let cfg = SynthConfig {
        size: size.unwrap_or(ctx.cfg.synth.size),
        seed: ctx.cfg.seed,
    };
    let tweets = synth::generate(&cfg)?;
    let (train, test) = synth::holdout(&tweets, ctx.cfg.seed)?;
    for (name, set) in [("synth.jsonl", &tweets), ("synth_train.jsonl", &train), ("synth_test.jsonl", &test)] {
        write_jsonl(&ctx.path(name), set)?;
        eprintln!("wrote {}", ctx.path(name).display());
    }
    println!("{} tweets: {} train, {} held out", tweets.len(), train.len(), test.len());
    Ok(())
}
