//! Public-API round trips across modules.

use numsarc::embeddings::{load_embeddings, save_embeddings, EmbeddingTable};
use numsarc::eval::{evaluate, Artifact, Pipeline, PipelineConfig, PipelineKind, StandardPipeline};
use numsarc::neural::{train, Activation, Architecture, Checkpoint, Model, ModelConfig, TrainingConfig, Vocab};
use numsarc::rulebase::RuleModel;
use numsarc::synth::{self, SynthConfig};
use numsarc::text::{AnalyzedTweet, Analyzer};

fn synth_split(size: usize) -> (Vec<AnalyzedTweet>, Vec<AnalyzedTweet>) {
    let raw = synth::generate(&SynthConfig { size, seed: 1 }).unwrap();
    let (train, test) = synth::holdout(&raw, 1).unwrap();
    let a = Analyzer::default();
    (a.analyze_all(&train), a.analyze_all(&test))
}

#[test]
fn f32_lstm_trains_and_survives_checkpoint() {
    let (train_set, test_set) = synth_split(200);
    let docs: Vec<Vec<String>> = train_set.iter().map(|t| t.tokens.clone()).collect();
    let vocab = Vocab::build(&docs, 1).unwrap();
    let cfg = ModelConfig {
        architecture: Architecture::LstmFf { hidden: 6 },
        embedding_dim: 8,
        seq_len: 16,
        activation: Activation::Tanh,
        dropout: 0.0,
    };
    let mut model = Model::<f32>::new(cfg, vocab, None, 3).unwrap();
    let data: Vec<_> = train_set.iter().map(|t| (model.encode(&t.tokens), t.label.unwrap())).collect();
    let report = train(&mut model, &data, &TrainingConfig { epochs: 3, ..TrainingConfig::default() }).unwrap();
    assert!(report.epochs.iter().all(|e| e.train_loss.is_finite()));

    let json = serde_json::to_string(&model.to_checkpoint()).unwrap();
    let restored = Model::from_checkpoint(serde_json::from_str::<Checkpoint<f32>>(&json).unwrap()).unwrap();
    for t in &test_set {
        assert_eq!(model.predict_proba(&t.tokens).unwrap(), restored.predict_proba(&t.tokens).unwrap());
    }
}

#[test]
fn embedding_file_round_trip_keeps_fingerprint() {
    let table = EmbeddingTable::<f64>::from_rows(
        3,
        [("battery", vec![0.25, -1.5, 3.0]), ("hours", vec![1e-3, 0.1, -0.7])],
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vec.txt");
    save_embeddings(&path, &table).unwrap();
    let loaded = load_embeddings::<f64>(&path, Some(3)).unwrap();
    assert_eq!(loaded.fingerprint(), table.fingerprint());
    assert_eq!(loaded.get("hours"), table.get("hours"));
    assert!(load_embeddings::<f64>(&path, Some(4)).is_err());
}

#[test]
fn rule_model_json_round_trip_predicts_identically() {
    let (train_set, test_set) = synth_split(400);
    let model = RuleModel::<f64>::build(&train_set, Default::default(), None).unwrap();
    let back: RuleModel<f64> = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
    assert_eq!(model.predict_all(&test_set, None).unwrap(), back.predict_all(&test_set, None).unwrap());
}

#[test]
fn artifacts_reload_into_equivalent_predictors() {
    let (train_set, test_set) = synth_split(400);
    for kind in [PipelineKind::RuleExact, PipelineKind::Knn, PipelineKind::Forest] {
        let fitted = StandardPipeline::new(kind, PipelineConfig::default(), None, 5).fit(&train_set).unwrap();
        let json = serde_json::to_string(&fitted.artifact()).unwrap();
        let artifact: Artifact = serde_json::from_str(&json).unwrap();
        assert_eq!(artifact.fingerprint(), fitted.artifact().fingerprint());
        let reloaded = artifact.into_fitted(None).unwrap();
        assert_eq!(evaluate(fitted.as_ref(), &test_set).unwrap(), evaluate(reloaded.as_ref(), &test_set).unwrap(), "{kind}");
    }
}
