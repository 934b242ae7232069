//! The full pipeline as one reproducible run with every artifact on disk.
//!
//! Layout of the output directory:
//!
//! ```text
//! synthetic/{train,adversarial}.jsonl
//! entity_analysis.json
//! docs/{dev,adversarial,pipeline}.jsonl
//! models/<regime>.json, models/nli.json
//! selections/<set>.<regime>.jsonl
//! verdicts/pipeline.<regime>.jsonl
//! report.json, report.md, manifest.json
//! ```
//!
//! Metrics are always computed from the files read back from disk.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::claim_gen::{write_synthetic_claims, AliasLinker, ClaimGenerator, SyntheticClaim};
use crate::claims::{load_claims, Claim};
use crate::corpus::{ingest_corpus, Corpus};
use crate::doc_retrieval::{DocRetrievalConfig, DocRetriever};
use crate::entity_analysis::{analyze, EntityAnalysis};
use crate::error::{Error, Result};
use crate::evaluation::{doc_mistakes, doc_recall_at_k, evaluate, Verdict, Verdicts};
use crate::index::{build_index, Granularity, InvertedIndex};
use crate::jsonl;
use crate::kb::KnowledgeBase;
use crate::nli::{train_nli, verdict_for, NliConfig};
use crate::records;
use crate::rng::derive_seed;
use crate::selection::{
    aggregate_sr, select_sentences, train_selector, RankedEvidence, RelevanceModel, TrainingConfig, TrainingRegime,
};

/// Regimes as they appear in reports; `sr` merges the `sup` and `ref` models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportRegime {
    Baseline,
    Sup,
    Ref,
    Sr,
    Da,
}

impl ReportRegime {
    pub const ALL: [ReportRegime; 5] = [
        ReportRegime::Baseline,
        ReportRegime::Sup,
        ReportRegime::Ref,
        ReportRegime::Sr,
        ReportRegime::Da,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReportRegime::Baseline => "baseline",
            ReportRegime::Sup => "sup",
            ReportRegime::Ref => "ref",
            ReportRegime::Sr => "sr",
            ReportRegime::Da => "da",
        }
    }

    /// Trained models this regime reads.
    pub fn models(self) -> &'static [TrainingRegime] {
        match self {
            ReportRegime::Baseline => &[TrainingRegime::Baseline],
            ReportRegime::Sup => &[TrainingRegime::SupOnly],
            ReportRegime::Ref => &[TrainingRegime::RefOnly],
            ReportRegime::Sr => &[TrainingRegime::SupOnly, TrainingRegime::RefOnly],
            ReportRegime::Da => &[TrainingRegime::DataAugmented],
        }
    }
}

impl fmt::Display for ReportRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportRegime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ReportRegime::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown regime {s:?} (expected baseline|sup|ref|sr|da)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    pub train_claims: PathBuf,
    pub dev_claims: PathBuf,
    pub kb: PathBuf,
    pub seed: u64,
    pub k_docs: usize,
    pub k_sentences: usize,
    pub regimes: Vec<ReportRegime>,
    pub oracle_docs: bool,
    pub output_dir: PathBuf,
    pub epochs: u32,
    pub learning_rate: f64,
    pub negatives_per_positive: usize,
    pub nli_epochs: u32,
    pub nli_learning_rate: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let training = TrainingConfig::default();
        let nli = NliConfig::default();
        ExperimentConfig {
            corpus: PathBuf::from("wiki"),
            train_claims: PathBuf::from("train.jsonl"),
            dev_claims: PathBuf::from("dev.jsonl"),
            kb: PathBuf::from("kb.jsonl"),
            seed: 0,
            k_docs: 20,
            k_sentences: 5,
            regimes: ReportRegime::ALL.to_vec(),
            oracle_docs: false,
            output_dir: PathBuf::from("out"),
            epochs: training.epochs,
            learning_rate: training.learning_rate,
            negatives_per_positive: training.negatives_per_positive,
            nli_epochs: nli.epochs,
            nli_learning_rate: nli.learning_rate,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        jsonl::read_json(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_docs == 0 || self.k_sentences == 0 {
            return Err(Error::Config("k_docs and k_sentences must be at least 1".into()));
        }
        if self.regimes.is_empty() {
            return Err(Error::Config("no regimes requested".into()));
        }
        for p in [&self.corpus, &self.train_claims, &self.dev_claims, &self.kb] {
            if !p.exists() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        self.training().validate()
    }

    pub fn training(&self) -> TrainingConfig {
        TrainingConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed: derive_seed(self.seed, 3),
            negatives_per_positive: self.negatives_per_positive,
        }
    }

    pub fn nli(&self) -> NliConfig {
        NliConfig {
            epochs: self.nli_epochs,
            learning_rate: self.nli_learning_rate,
            seed: derive_seed(self.seed, 4),
            ..NliConfig::default()
        }
    }

    /// Requested regimes without duplicates, in canonical order.
    pub fn report_regimes(&self) -> Vec<ReportRegime> {
        let mut r = self.regimes.clone();
        r.sort();
        r.dedup();
        r
    }

    fn trained_regimes(&self) -> Vec<TrainingRegime> {
        let mut t: Vec<TrainingRegime> = self.report_regimes().iter().flat_map(|r| r.models()).copied().collect();
        t.sort();
        t.dedup();
        t
    }
}

/// An experiment stage failure, tagged with the stage name.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub source: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage `{}` failed: {}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

trait Stage<T> {
    fn stage(self, name: &'static str) -> Result<T, StageError>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, name: &'static str) -> Result<T, StageError> {
        self.map_err(|source| StageError { stage: name, source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCounts {
    pub train: usize,
    pub dev: usize,
    pub synthetic_train: usize,
    pub adversarial_dev: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRow {
    pub set: String,
    pub k: usize,
    pub recall: f64,
    pub refuted_mistakes: usize,
    pub supported_mistakes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub set: String,
    pub regime: ReportRegime,
    pub k: usize,
    pub recall: f64,
    pub refuted_mistakes: usize,
    pub supported_mistakes: usize,
    pub verifiable_claims: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRow {
    pub regime: ReportRegime,
    pub fever_score: f64,
    pub label_accuracy: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub oracle_docs: bool,
    pub k_docs: usize,
    pub k_sentences: usize,
    pub recall_criterion: String,
    pub mistake_criterion: String,
    pub claims: ClaimCounts,
    pub entity_analysis: EntityAnalysis,
    pub documents: Vec<DocRow>,
    pub selection: Vec<SelectionRow>,
    pub pipeline: Vec<PipelineRow>,
}

impl ExperimentReport {
    pub fn row(&self, set: &str, regime: ReportRegime) -> Option<&SelectionRow> {
        self.selection.iter().find(|r| r.set == set && r.regime == regime)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Experiment report\n");
        let _ = writeln!(
            s,
            "seed {} | k_docs {} | k_sentences {} | oracle documents: {}\n",
            self.seed, self.k_docs, self.k_sentences, self.oracle_docs
        );
        let c = &self.claims;
        let _ = writeln!(
            s,
            "claims: train {}, dev {}, synthetic train {}, adversarial dev {}\n",
            c.train, c.dev, c.synthetic_train, c.adversarial_dev
        );
        let _ = writeln!(s, "## Entities in refuted and supported training claims\n");
        for t in [&self.entity_analysis.entity_count, &self.entity_analysis.relatedness] {
            let _ = writeln!(s, "| | {} | {} |\n|---|---|---|", t.columns[0], t.columns[1]);
            for (row, cells) in t.rows.iter().zip(t.table.cells) {
                let _ = writeln!(s, "| {} | {} | {} |", row, cells[0], cells[1]);
            }
            let _ = writeln!(
                s,
                "\nchi2 (Yates) {} | chi2 (uncorrected) {}\n",
                fmt_opt(t.chi2_yates),
                fmt_opt(t.chi2_uncorrected)
            );
        }
        let _ = writeln!(s, "## Document retrieval\n");
        let _ = writeln!(
            s,
            "| set | recall@k | refuted mistakes | supported mistakes |\n|---|---|---|---|"
        );
        for r in &self.documents {
            let _ = writeln!(
                s,
                "| {} | {:.4} | {} | {} |",
                r.set, r.recall, r.refuted_mistakes, r.supported_mistakes
            );
        }
        let _ = writeln!(s, "\n## Sentence selection\n");
        let _ = writeln!(
            s,
            "recall: {}. mistakes: {}.\n",
            self.recall_criterion, self.mistake_criterion
        );
        let _ = writeln!(
            s,
            "| set | regime | recall@{} | refuted mistakes | supported mistakes |\n|---|---|---|---|---|",
            self.k_sentences
        );
        for r in &self.selection {
            let _ = writeln!(
                s,
                "| {} | {} | {:.4} | {} | {} |",
                r.set, r.regime, r.recall, r.refuted_mistakes, r.supported_mistakes
            );
        }
        let _ = writeln!(s, "\n## Full pipeline on dev claims\n");
        let _ = writeln!(
            s,
            "| regime | FEVER score | label accuracy | recall@5 |\n|---|---|---|---|"
        );
        for r in &self.pipeline {
            let _ = writeln!(
                s,
                "| {} | {:.4} | {:.4} | {:.4} |",
                r.regime, r.fever_score, r.label_accuracy, r.recall
            );
        }
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.3}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    /// The configuration without its output directory.
    pub config: serde_json::Value,
    pub config_sha256: String,
    pub inputs: BTreeMap<String, String>,
    pub artifacts: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of a file, or of a directory's files in sorted order.
pub fn hash_path(path: &Path) -> Result<String> {
    let mut files = Vec::new();
    collect_files(path, &mut files)?;
    files.sort();
    let mut h = Sha256::new();
    for f in &files {
        if path.is_dir() {
            h.update(f.strip_prefix(path).unwrap_or(f).to_string_lossy().as_bytes());
            h.update([0]);
        }
        h.update(fs::read(f).map_err(|e| Error::io(f, e))?);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_dir() {
        for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
            let entry = entry.map_err(|e| Error::io(path, e))?;
            collect_files(&entry.path(), out)?;
        }
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

struct Inputs {
    corpus: Corpus,
    doc_index: InvertedIndex,
    sentence_index: InvertedIndex,
    kb: KnowledgeBase,
    train: Vec<Claim>,
    dev: Vec<Claim>,
}

fn retrieve_all(
    retriever: &DocRetriever<'_>,
    claims: &[Claim],
    config: &DocRetrievalConfig,
    oracle: bool,
) -> BTreeMap<u64, Vec<String>> {
    claims
        .iter()
        .map(|c| {
            let pages = if oracle {
                retriever.retrieve_oracle(c, config)
            } else {
                retriever.retrieve(&c.text, config)
            };
            (c.id, pages)
        })
        .collect()
}

fn select_all(
    model: &RelevanceModel<f64>,
    claims: &[Claim],
    docs: &BTreeMap<u64, Vec<String>>,
    inputs: &Inputs,
    k: usize,
) -> BTreeMap<u64, RankedEvidence> {
    claims
        .iter()
        .map(|c| {
            let pages = docs.get(&c.id).map(Vec::as_slice).unwrap_or_default();
            let ranked = select_sentences(model, &c.text, pages, &inputs.corpus, &inputs.sentence_index, k);
            (c.id, ranked)
        })
        .collect()
}

fn regime_selections(
    regime: ReportRegime,
    models: &BTreeMap<TrainingRegime, RelevanceModel<f64>>,
    claims: &[Claim],
    docs: &BTreeMap<u64, Vec<String>>,
    inputs: &Inputs,
    k: usize,
) -> BTreeMap<u64, RankedEvidence> {
    match regime {
        ReportRegime::Sr => {
            let sup = select_all(&models[&TrainingRegime::SupOnly], claims, docs, inputs, k);
            let rf = select_all(&models[&TrainingRegime::RefOnly], claims, docs, inputs, k);
            sup.iter().map(|(id, s)| (*id, aggregate_sr(s, &rf[id], k))).collect()
        }
        r => select_all(&models[&r.models()[0]], claims, docs, inputs, k),
    }
}

/// Runs every stage and writes the report bundle under `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, StageError> {
    config.validate().stage("config")?;
    let out = &config.output_dir;
    for sub in ["synthetic", "docs", "models", "selections", "verdicts"] {
        mkdir(&out.join(sub)).stage("setup")?;
    }

    let corpus = ingest_corpus(&config.corpus).stage("ingest")?;
    let doc_index = build_index(&corpus, Granularity::Document).stage("index")?;
    let sentence_index = build_index(&corpus, Granularity::Sentence).stage("index")?;
    let kb = KnowledgeBase::load(&config.kb).stage("ingest")?;
    let train = load_claims(&config.train_claims).stage("ingest")?;
    let dev = load_claims(&config.dev_claims).stage("ingest")?;
    log::info!(
        "{} pages, {} sentences, {} train and {} dev claims",
        corpus.len(),
        corpus.sentence_count(),
        train.len(),
        dev.len()
    );
    let inputs = Inputs {
        corpus,
        doc_index,
        sentence_index,
        kb,
        train,
        dev,
    };

    let generator = ClaimGenerator::new(&inputs.kb);
    let synthetic_train = generator.augmentation_set(&inputs.train, derive_seed(config.seed, 1));
    let adversarial_synth = generator.augmentation_set(&inputs.dev, derive_seed(config.seed, 2));
    write_synthetic_claims(&out.join("synthetic/train.jsonl"), &synthetic_train).stage("generate-claims")?;
    write_synthetic_claims(&out.join("synthetic/adversarial.jsonl"), &adversarial_synth).stage("generate-claims")?;
    let adversarial: Vec<Claim> = adversarial_synth.iter().map(SyntheticClaim::to_claim).collect();

    let linker = AliasLinker::new(&inputs.kb);
    let entity_analysis = analyze(&inputs.train, &inputs.kb, &linker).stage("analyze-entities")?;
    jsonl::write_json(&out.join("entity_analysis.json"), &entity_analysis).stage("analyze-entities")?;

    let retriever = DocRetriever::new(&inputs.corpus, &inputs.doc_index);
    let doc_config = DocRetrievalConfig {
        k: config.k_docs,
        ..DocRetrievalConfig::default()
    };
    let sets: [(&str, &[Claim], bool); 3] = [
        ("dev", &inputs.dev, config.oracle_docs),
        ("adversarial", &adversarial, config.oracle_docs),
        ("pipeline", &inputs.dev, false),
    ];
    let mut documents = Vec::new();
    let mut docs = BTreeMap::new();
    for (name, claims, oracle) in sets {
        let path = out.join(format!("docs/{name}.jsonl"));
        records::write_docs(&path, &retrieve_all(&retriever, claims, &doc_config, oracle)).stage("retrieve-docs")?;
        let loaded = records::read_docs(&path).stage("retrieve-docs")?;
        if claims.iter().any(|c| c.is_verifiable()) {
            let recall = doc_recall_at_k(&loaded, claims, config.k_docs).stage("evaluate")?;
            let (refuted_mistakes, supported_mistakes) =
                doc_mistakes(&loaded, claims, config.k_docs).stage("evaluate")?;
            documents.push(DocRow {
                set: name.to_string(),
                k: config.k_docs,
                recall,
                refuted_mistakes,
                supported_mistakes,
            });
        }
        docs.insert(name, loaded);
    }

    let training = config.training();
    let mut models = BTreeMap::new();
    for regime in config.trained_regimes() {
        let path = out.join(format!("models/{regime}.json"));
        let model = train_selector::<f64>(
            &inputs.train,
            &synthetic_train,
            &inputs.corpus,
            &inputs.sentence_index,
            regime,
            &training,
        )
        .stage("train-selector")?;
        model.save(&path).stage("train-selector")?;
        log::info!("trained {regime}: loss {:?}", model.metadata.loss_history);
        models.insert(regime, RelevanceModel::load(&path).stage("train-selector")?);
    }

    let regimes = config.report_regimes();
    let mut selection = Vec::new();
    let mut pipeline_selections = BTreeMap::new();
    for (name, claims, _) in sets {
        for &regime in &regimes {
            let path = out.join(format!("selections/{name}.{regime}.jsonl"));
            let ranked = regime_selections(regime, &models, claims, &docs[name], &inputs, config.k_sentences);
            records::write_selections(&path, &ranked).stage("select")?;
            let loaded = records::read_selections(&path).stage("select")?;
            if name == "pipeline" {
                pipeline_selections.insert(regime, loaded);
                continue;
            }
            if !claims.iter().any(|c| c.is_verifiable()) {
                continue;
            }
            let predictions = records::selections_to_predictions(&loaded);
            let report = evaluate(&predictions, None, claims, config.k_sentences).stage("evaluate")?;
            selection.push(SelectionRow {
                set: name.to_string(),
                regime,
                k: config.k_sentences,
                recall: report.recall_at_k,
                refuted_mistakes: report.refuted_mistakes,
                supported_mistakes: report.supported_mistakes,
                verifiable_claims: report.verifiable_claims,
            });
        }
    }

    // NEI training pairs come from the first trained selector's picks.
    let nei_model = models
        .values()
        .next()
        .ok_or_else(|| Error::Config("no trained model".into()))
        .stage("train-nli")?;
    let train_docs = retrieve_all(&retriever, &inputs.train, &doc_config, false);
    let nei_claims: Vec<Claim> = inputs.train.iter().filter(|c| !c.is_verifiable()).cloned().collect();
    let nei_selections = select_all(nei_model, &nei_claims, &train_docs, &inputs, config.k_sentences);
    let nli_path = out.join("models/nli.json");
    let nli = train_nli::<f64>(
        &inputs.train,
        &nei_selections,
        &inputs.corpus,
        &inputs.sentence_index,
        &config.nli(),
    )
    .stage("train-nli")?;
    nli.save(&nli_path).stage("train-nli")?;
    let nli = crate::nli::NliModel::<f64>::load(&nli_path).stage("train-nli")?;

    let mut pipeline = Vec::new();
    for (&regime, ranked) in &pipeline_selections {
        let verdicts: Verdicts = inputs
            .dev
            .iter()
            .map(|c| {
                let ev = ranked.get(&c.id).cloned().unwrap_or_default();
                let label = verdict_for(
                    &nli,
                    &c.text,
                    &ev,
                    &inputs.corpus,
                    &inputs.sentence_index,
                    config.k_sentences,
                );
                let evidence = ev.ids().take(5).cloned().collect();
                (c.id, Verdict { label, evidence })
            })
            .collect();
        let path = out.join(format!("verdicts/pipeline.{regime}.jsonl"));
        records::write_verdicts(&path, &verdicts).stage("verdict")?;
        let loaded = records::read_verdicts(&path).stage("verdict")?;
        let predictions = loaded.iter().map(|(id, v)| (*id, v.evidence.clone())).collect();
        let report = evaluate(&predictions, Some(&loaded), &inputs.dev, 5).stage("evaluate")?;
        pipeline.push(PipelineRow {
            regime,
            fever_score: report.fever_score.unwrap_or_default(),
            label_accuracy: report.label_accuracy.unwrap_or_default(),
            recall: report.recall_at_k,
        });
    }

    let report = ExperimentReport {
        seed: config.seed,
        oracle_docs: config.oracle_docs,
        k_docs: config.k_docs,
        k_sentences: config.k_sentences,
        recall_criterion: crate::evaluation::RECALL_CRITERION.into(),
        mistake_criterion: crate::evaluation::MISTAKE_CRITERION.into(),
        claims: ClaimCounts {
            train: inputs.train.len(),
            dev: inputs.dev.len(),
            synthetic_train: synthetic_train.len(),
            adversarial_dev: adversarial.len(),
        },
        entity_analysis,
        documents,
        selection,
        pipeline,
    };
    jsonl::write_json(&out.join("report.json"), &report).stage("report")?;
    let md = out.join("report.md");
    fs::write(&md, report.to_markdown())
        .map_err(|e| Error::io(&md, e))
        .stage("report")?;
    write_manifest(config).stage("manifest")?;
    Ok(report)
}

fn write_manifest(config: &ExperimentConfig) -> Result<()> {
    let out = &config.output_dir;
    let mut value = serde_json::to_value(config)?;
    if let Some(map) = value.as_object_mut() {
        map.remove("output_dir");
    }
    let config_sha256 = sha256_hex(serde_json::to_string(&value)?.as_bytes());
    let mut inputs = BTreeMap::new();
    for (name, p) in [
        ("corpus", &config.corpus),
        ("train_claims", &config.train_claims),
        ("dev_claims", &config.dev_claims),
        ("kb", &config.kb),
    ] {
        inputs.insert(name.to_string(), hash_path(p)?);
    }
    let mut files = Vec::new();
    collect_files(out, &mut files)?;
    let mut artifacts = BTreeMap::new();
    for f in files {
        let rel = f.strip_prefix(out).unwrap_or(&f).to_string_lossy().replace('\\', "/");
        if rel == "manifest.json" {
            continue;
        }
        artifacts.insert(rel, hash_path(&f)?);
    }
    jsonl::write_json(
        &out.join("manifest.json"),
        &Manifest {
            seed: config.seed,
            config: value,
            config_sha256,
            inputs,
            artifacts,
        },
    )
}
