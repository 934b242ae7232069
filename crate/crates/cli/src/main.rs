use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use factcheck::claim_gen::{generate_augmentation_set, load_synthetic_claims, write_synthetic_claims, AliasLinker};
use factcheck::claims::load_claims;
use factcheck::doc_retrieval::{DocRetrievalConfig, DocRetriever};
use factcheck::entity_analysis::analyze;
use factcheck::evaluation::{evaluate, Predictions, Verdict, Verdicts};
use factcheck::experiment::{run_experiment, ExperimentConfig, ReportRegime, StageError};
use factcheck::fixture::{generate_world, WorldConfig};
use factcheck::nli::{train_nli, verdict_for, NliConfig};
use factcheck::records;
use factcheck::selection::{aggregate_sr, select_sentences, train_selector, TrainingConfig, TrainingRegime};
use factcheck::{
    build_index, ingest_corpus, jsonl, Corpus, Granularity, InvertedIndex, KnowledgeBase, NliModel, RelevanceModel,
};

#[derive(Parser)]
#[command(
    name = "factcheck",
    version,
    about = "Claim verification against a local page corpus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a page dump (file or directory) and write it back normalized.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a TF-IDF index and write it as canonical JSON.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = Level::Document)]
        granularity: Level,
        #[arg(long)]
        out: PathBuf,
    },
    /// Candidate pages per claim.
    RetrieveDocs {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        claims: PathBuf,
        #[arg(long, default_value_t = 20)]
        k: usize,
        /// Append the gold pages to every retrieved list.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthetic refuted claims from supported ones.
    GenerateClaims {
        #[arg(long)]
        claims: PathBuf,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Entity-count and relatedness tables with chi-squared statistics.
    AnalyzeEntities {
        #[arg(long)]
        claims: PathBuf,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    TrainSelector(TrainSelectorArgs),
    /// Rank sentences of the candidate pages; two models give SR aggregation.
    Select {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        model2: Option<PathBuf>,
        #[arg(long)]
        claims: PathBuf,
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the three-way claim classifier.
    TrainNli {
        #[arg(long)]
        claims: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Selector output used to pair NEI claims with sentences.
        #[arg(long)]
        selections: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        epochs: Option<u32>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label claims from their selected evidence.
    Verdict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        selections: PathBuf,
        #[arg(long)]
        claims: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score selections or verdicts against gold claims.
    Evaluate {
        #[arg(long)]
        claims: PathBuf,
        #[arg(long, required_unless_present = "verdicts")]
        selections: Option<PathBuf>,
        #[arg(long)]
        verdicts: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Run(RunArgs),
    /// Write a synthetic corpus, knowledge base and claim files.
    GenFixture {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Document,
    Sentence,
}

/// Train a sentence relevance model under one regime.
#[derive(Args)]
struct TrainSelectorArgs {
    #[arg(long, value_parser = parse_regime)]
    regime: TrainingRegime,
    #[arg(long)]
    claims: PathBuf,
    #[arg(long)]
    synthetic: Option<PathBuf>,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    epochs: Option<u32>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

/// Full pipeline from a JSON config; flags override config fields.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    train_claims: Option<PathBuf>,
    #[arg(long)]
    dev_claims: Option<PathBuf>,
    #[arg(long)]
    kb: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k_docs: Option<usize>,
    #[arg(long)]
    k_sentences: Option<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_report_regime)]
    regimes: Option<Vec<ReportRegime>>,
    #[arg(long)]
    oracle_docs: Option<bool>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn parse_regime(s: &str) -> Result<TrainingRegime, String> {
    s.parse()
}

fn parse_report_regime(s: &str) -> Result<ReportRegime, String> {
    s.parse()
}

fn load_corpus(path: &Path) -> Result<(Corpus, InvertedIndex)> {
    let corpus = ingest_corpus(path)?;
    let stats = build_index(&corpus, Granularity::Sentence)?;
    Ok((corpus, stats))
}

fn write_or_print<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => jsonl::write_json(p, value)?,
        None => print_stdout(&format!("{}\n", serde_json::to_string_pretty(value)?))?,
    }
    Ok(())
}

fn print_stdout(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

/// Error chain on one line, skipping causes already spelled out by their parent.
fn render_error<'a>(chain: impl Iterator<Item = &'a (dyn std::error::Error + 'static)>) -> String {
    let mut msg = String::new();
    for cause in chain {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Ingest { corpus, out } => {
            let corpus = ingest_corpus(&corpus)?;
            corpus.write_dump(&out)?;
            eprintln!("{} pages, {} sentences", corpus.len(), corpus.sentence_count());
        }
        Command::Index {
            corpus,
            granularity,
            out,
        } => {
            let corpus = ingest_corpus(&corpus)?;
            let g = match granularity {
                Level::Document => Granularity::Document,
                Level::Sentence => Granularity::Sentence,
            };
            let index = build_index(&corpus, g)?;
            fs::write(&out, index.to_canonical_json()).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::RetrieveDocs {
            corpus,
            claims,
            k,
            oracle,
            out,
        } => {
            let corpus = ingest_corpus(&corpus)?;
            let index = build_index(&corpus, Granularity::Document)?;
            let retriever = DocRetriever::new(&corpus, &index);
            let config = DocRetrievalConfig {
                k,
                ..DocRetrievalConfig::default()
            };
            let docs: BTreeMap<u64, Vec<String>> = load_claims(&claims)?
                .iter()
                .map(|c| {
                    let pages = if oracle {
                        retriever.retrieve_oracle(c, &config)
                    } else {
                        retriever.retrieve(&c.text, &config)
                    };
                    (c.id, pages)
                })
                .collect();
            records::write_docs(&out, &docs)?;
        }
        Command::GenerateClaims { claims, kb, seed, out } => {
            let claims = load_claims(&claims)?;
            let kb = KnowledgeBase::load(&kb)?;
            let synthetic = generate_augmentation_set(&claims, &kb, seed);
            write_synthetic_claims(&out, &synthetic)?;
            eprintln!("{} synthetic claims from {} inputs", synthetic.len(), claims.len());
        }
        Command::AnalyzeEntities { claims, kb, out } => {
            let claims = load_claims(&claims)?;
            let kb = KnowledgeBase::load(&kb)?;
            let report = analyze(&claims, &kb, &AliasLinker::new(&kb))?;
            write_or_print(out.as_deref(), &report)?;
        }
        Command::TrainSelector(a) => {
            let claims = load_claims(&a.claims)?;
            let synthetic = match &a.synthetic {
                Some(p) => load_synthetic_claims(p)?,
                None => Vec::new(),
            };
            if a.regime == TrainingRegime::DataAugmented && synthetic.is_empty() {
                log::warn!("data-augmented regime without synthetic claims");
            }
            let (corpus, stats) = load_corpus(&a.corpus)?;
            let defaults = TrainingConfig::default();
            let config = TrainingConfig {
                epochs: a.epochs.unwrap_or(defaults.epochs),
                learning_rate: a.learning_rate.unwrap_or(defaults.learning_rate),
                seed: a.seed,
                negatives_per_positive: a.negatives.unwrap_or(defaults.negatives_per_positive),
            };
            let model = train_selector::<f64>(&claims, &synthetic, &corpus, &stats, a.regime, &config)?;
            model.save(&a.out)?;
        }
        Command::Select {
            model,
            model2,
            claims,
            docs,
            corpus,
            k,
            out,
        } => {
            let first = RelevanceModel::load(&model)?;
            let second = model2.as_deref().map(RelevanceModel::load).transpose()?;
            let claims = load_claims(&claims)?;
            let docs = records::read_docs(&docs)?;
            let (corpus, stats) = load_corpus(&corpus)?;
            let mut selections = BTreeMap::new();
            for c in &claims {
                let pages = docs.get(&c.id).map(Vec::as_slice).unwrap_or_default();
                let mut ranked = select_sentences(&first, &c.text, pages, &corpus, &stats, k);
                if let Some(m) = &second {
                    let other = select_sentences(m, &c.text, pages, &corpus, &stats, k);
                    ranked = aggregate_sr(&ranked, &other, k);
                }
                selections.insert(c.id, ranked);
            }
            records::write_selections(&out, &selections)?;
        }
        Command::TrainNli {
            claims,
            corpus,
            selections,
            seed,
            epochs,
            learning_rate,
            out,
        } => {
            let claims = load_claims(&claims)?;
            let (corpus, stats) = load_corpus(&corpus)?;
            let selections = match selections {
                Some(p) => records::read_selections(&p)?,
                None => BTreeMap::new(),
            };
            let defaults = NliConfig::default();
            let config = NliConfig {
                epochs: epochs.unwrap_or(defaults.epochs),
                learning_rate: learning_rate.unwrap_or(defaults.learning_rate),
                seed,
                ..defaults
            };
            train_nli::<f64>(&claims, &selections, &corpus, &stats, &config)?.save(&out)?;
        }
        Command::Verdict {
            model,
            selections,
            claims,
            corpus,
            k,
            out,
        } => {
            let model = NliModel::load(&model)?;
            let selections = records::read_selections(&selections)?;
            let claims = load_claims(&claims)?;
            let (corpus, stats) = load_corpus(&corpus)?;
            let verdicts: Verdicts = claims
                .iter()
                .map(|c| {
                    let ev = selections.get(&c.id).cloned().unwrap_or_default();
                    let label = verdict_for(&model, &c.text, &ev, &corpus, &stats, k);
                    (
                        c.id,
                        Verdict {
                            label,
                            evidence: ev.ids().take(k).cloned().collect(),
                        },
                    )
                })
                .collect();
            records::write_verdicts(&out, &verdicts)?;
        }
        Command::Evaluate {
            claims,
            selections,
            verdicts,
            k,
            out,
        } => {
            let claims = load_claims(&claims)?;
            let verdicts = verdicts.as_deref().map(records::read_verdicts).transpose()?;
            let predictions: Predictions = match (&selections, &verdicts) {
                (Some(p), _) => records::selections_to_predictions(&records::read_selections(p)?),
                (None, Some(v)) => v.iter().map(|(id, v)| (*id, v.evidence.clone())).collect(),
                (None, None) => bail!("either --selections or --verdicts is required"),
            };
            let report = evaluate(&predictions, verdicts.as_ref(), &claims, k)?;
            write_or_print(out.as_deref(), &report)?;
        }
        Command::Run(a) => {
            let mut config = match &a.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(v) = a.corpus {
                config.corpus = v;
            }
            if let Some(v) = a.train_claims {
                config.train_claims = v;
            }
            if let Some(v) = a.dev_claims {
                config.dev_claims = v;
            }
            if let Some(v) = a.kb {
                config.kb = v;
            }
            if let Some(v) = a.seed {
                config.seed = v;
            }
            if let Some(v) = a.k_docs {
                config.k_docs = v;
            }
            if let Some(v) = a.k_sentences {
                config.k_sentences = v;
            }
            if let Some(v) = a.regimes {
                config.regimes = v;
            }
            if let Some(v) = a.oracle_docs {
                config.oracle_docs = v;
            }
            if let Some(v) = a.output_dir {
                config.output_dir = v;
            }
            let report = run_experiment(&config)?;
            print_stdout(&report.to_markdown())?;
        }
        Command::GenFixture { seed, out } => {
            let world = generate_world(&WorldConfig {
                seed,
                ..WorldConfig::default()
            })?;
            world.write_to(&out)?;
            eprintln!(
                "{} pages, {} train and {} dev claims in {}",
                world.corpus.len(),
                world.train.len(),
                world.dev.len(),
                out.display()
            );
        }
    }
    Ok(())
}

fn stage_name(command: &Command) -> &'static str {
    match command {
        Command::Ingest { .. } => "ingest",
        Command::Index { .. } => "index",
        Command::RetrieveDocs { .. } => "retrieve-docs",
        Command::GenerateClaims { .. } => "generate-claims",
        Command::AnalyzeEntities { .. } => "analyze-entities",
        Command::TrainSelector(_) => "train-selector",
        Command::Select { .. } => "select",
        Command::TrainNli { .. } => "train-nli",
        Command::Verdict { .. } => "verdict",
        Command::Evaluate { .. } => "evaluate",
        Command::Run(_) => "run",
        Command::GenFixture { .. } => "gen-fixture",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stage = stage_name(&cli.command);
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // experiment failures carry the stage that broke
            let msg = match e.downcast_ref::<StageError>() {
                Some(se) => {
                    let chain = std::iter::successors(Some(&se.source as &dyn std::error::Error), |c| c.source());
                    format!("[{}] failed: {}", se.stage, render_error(chain))
                }
                None => render_error(e.context(format!("[{stage}] failed")).chain()),
            };
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
