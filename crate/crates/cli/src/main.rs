use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use essayplan::coherence::{train_recnn, CoherenceVariant, RecnnConfig, RecnnParams};
use essayplan::corpus::ingest_corpus;
use essayplan::embedding::{load_embeddings, save_embeddings, train_skipgram, SkipgramConfig};
use essayplan::ordering::{evaluate_holdout, Decoder, EvalOptions, Pooling, DEFAULT_MAX_N};
use essayplan::pipeline::{generate_essay, PipelineConfig, Resources};
use essayplan::selection::select_sentences;
use essayplan::topic_model::{LdaConfig, LdaModel};
use essayplan::topic_understanding::{cluster_arguments_detailed, expand_topic};
use essayplan::CoherenceModel;

#[derive(Parser)]
#[command(name = "essayplan", version, about = "Plan and assemble extractive essays from a tokenized corpus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a JSONL corpus and print its statistics
    Ingest {
        corpus: PathBuf,
        /// Re-serialize the validated corpus here
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train skipgram word vectors
    TrainEmbeddings {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 5)]
        negatives: usize,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 0.025)]
        learning_rate: f64,
        #[arg(long, default_value_t = 5)]
        min_count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Train an LDA topic model with collapsed Gibbs sampling
    TrainLda {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        topics: usize,
        /// Defaults to 50 / topics
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        beta: f64,
        #[arg(long, default_value_t = 500)]
        iterations: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Train the recursive-network coherence scorer
    TrainCoherence {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        #[arg(long, default_value_t = 0.05)]
        learning_rate: f64,
        #[arg(long, default_value_t = 16)]
        hidden: usize,
        /// Corrupted pairs per true pair
        #[arg(long, default_value_t = 1)]
        negatives: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print words related to a topic
    Expand {
        #[arg(long)]
        config: PathBuf,
        topic: String,
        /// Overrides expansion.k
        #[arg(long)]
        k: Option<usize>,
    },
    /// Expand a topic and print the resulting arguments as JSON
    Cluster {
        #[arg(long)]
        config: PathBuf,
        topic: String,
    },
    /// Rank corpus sentences against a set of words
    Select {
        #[arg(long)]
        config: PathBuf,
        /// Argument words
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Generate an essay for a topic
    Generate {
        #[arg(long)]
        config: PathBuf,
        topic: String,
        /// Write the essay here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the JSON trace of every intermediate step here
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Evaluate sentence ordering on a holdout split by bigram accuracy
    EvalOrdering {
        #[arg(long)]
        corpus: PathBuf,
        /// Fraction of documents held out
        #[arg(long, default_value_t = 0.2)]
        holdout_fraction: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "bow_frequency")]
        variant: String,
        /// greedy, dp or beam
        #[arg(long, default_value = "dp")]
        decoder: String,
        #[arg(long, default_value_t = DEFAULT_MAX_N)]
        max_n: usize,
        #[arg(long, default_value_t = 8)]
        beam_width: usize,
        /// Pool matched bigrams over all documents instead of averaging per document
        #[arg(long)]
        per_bigram: bool,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        recnn: Option<PathBuf>,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_pipeline(config: &Path) -> Result<(PipelineConfig, Resources)> {
    let cfg = PipelineConfig::load(config).with_context(|| format!("loading config {}", config.display()))?;
    let resources = Resources::load(&cfg).context("loading resources")?;
    Ok((cfg, resources))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { corpus, output } => {
            let c = ingest_corpus(&corpus)?;
            println!(
                "documents\t{}\nsentences\t{}\ntokens\t{}\nvocabulary\t{}",
                c.documents().len(),
                c.num_sentences(),
                c.num_tokens(),
                c.vocabulary().len()
            );
            if let Some(out) = output {
                c.save(&out)?;
            }
        }
        Command::TrainEmbeddings {
            corpus,
            output,
            dim,
            window,
            negatives,
            epochs,
            learning_rate,
            min_count,
            seed,
        } => {
            let c = ingest_corpus(&corpus)?;
            let cfg = SkipgramConfig {
                dim,
                window,
                negatives,
                epochs,
                learning_rate,
                min_count,
                seed,
            };
            let table = train_skipgram(&c, &cfg)?;
            save_embeddings(&table, &output)?;
            log::info!("wrote {} vectors of dimension {}", table.len(), table.dim());
        }
        Command::TrainLda {
            corpus,
            output,
            topics,
            alpha,
            beta,
            iterations,
            seed,
        } => {
            let c = ingest_corpus(&corpus)?;
            let mut cfg = LdaConfig::with_topics(topics);
            if let Some(a) = alpha {
                cfg.alpha = a;
            }
            cfg.beta = beta;
            cfg.iterations = iterations;
            cfg.seed = seed;
            let model = LdaModel::train(&c, &cfg)?;
            model.save(&output)?;
            for k in 0..model.num_topics() {
                println!("topic {k}\t{}", model.top_words(k, 10).join(" "));
            }
        }
        Command::TrainCoherence {
            corpus,
            embeddings,
            output,
            epochs,
            learning_rate,
            hidden,
            negatives,
            seed,
        } => {
            let c = ingest_corpus(&corpus)?;
            let table = load_embeddings(&embeddings)?;
            let cfg = RecnnConfig {
                learning_rate,
                epochs,
                hidden_size: hidden,
                negatives_per_positive: negatives,
                seed,
                ..RecnnConfig::default()
            };
            let (params, report) = train_recnn(&c, &table, &cfg)?;
            params.save(&output)?;
            for (i, loss) in report.epoch_losses.iter().enumerate() {
                println!("epoch {}\t{loss:.6}", i + 1);
            }
            if report.skipped > 0 {
                log::warn!("{} training pairs had a sentence without word vectors", report.skipped);
            }
        }
        Command::Expand { config, topic, k } => {
            let (cfg, res) = load_pipeline(&config)?;
            let words = expand_topic(&topic, cfg.expansion_backend, &res.word_resources(&cfg), k.unwrap_or(cfg.expansion_k))?;
            let mut out = String::new();
            for (w, s) in words {
                out.push_str(&format!("{w}\t{s}\n"));
            }
            write_output(None, &out)?;
        }
        Command::Cluster { config, topic } => {
            let (cfg, res) = load_pipeline(&config)?;
            let wr = res.word_resources(&cfg);
            let words: Vec<String> = expand_topic(&topic, cfg.expansion_backend, &wr, cfg.expansion_k)?
                .into_iter()
                .map(|(w, _)| w)
                .collect();
            let outcome = cluster_arguments_detailed(&words, cfg.representation, &cfg.cluster, &wr)?;
            println!("{}", serde_json::to_string_pretty(&outcome)?);
        }
        Command::Select { config, words } => {
            let (cfg, res) = load_pipeline(&config)?;
            let mut sel = cfg.selection.clone();
            sel.stopwords = res.stopwords.clone();
            let selected = select_sentences(&words, &res.corpus, &sel, res.embeddings.as_ref())?;
            let mut out = String::new();
            for s in selected {
                out.push_str(&format!("{}\t{}\t{}\t{}\n", s.score, s.sentence.doc_id, s.sentence.index, s.sentence.raw));
            }
            write_output(None, &out)?;
        }
        Command::Generate {
            config,
            topic,
            output,
            trace,
        } => {
            let (cfg, res) = load_pipeline(&config)?;
            let (essay, tr) = generate_essay(&topic, &cfg, &res)?;
            write_output(output.as_deref(), &essay.to_text())?;
            if let Some(p) = trace {
                let mut json = tr.to_json()?;
                json.push('\n');
                fs::write(&p, json).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::EvalOrdering {
            corpus,
            holdout_fraction,
            seed,
            variant,
            decoder,
            max_n,
            beam_width,
            per_bigram,
            embeddings,
            recnn,
            output,
        } => {
            let c = ingest_corpus(&corpus)?;
            let (_, holdout) = c.split_holdout(holdout_fraction, seed)?;
            let variant: CoherenceVariant = variant.parse()?;
            let decoder = match decoder.as_str() {
                "greedy" => Decoder::Greedy,
                "dp" => Decoder::ExactDp { max_n },
                "beam" => Decoder::Beam { width: beam_width },
                other => bail!("unknown decoder {other:?} (greedy, dp, beam)"),
            };
            let table = embeddings.as_ref().map(load_embeddings).transpose()?;
            let params = recnn.as_ref().map(RecnnParams::load).transpose()?;
            let model = CoherenceModel::from_variant(variant, table.as_ref(), params.as_ref())?;
            let options = EvalOptions {
                pooling: if per_bigram { Pooling::PerBigram } else { Pooling::PerDocument },
            };
            let report = evaluate_holdout(&holdout, &model, decoder, options)?;
            let mut json = serde_json::to_string_pretty(&report)?;
            json.push('\n');
            write_output(output.as_deref(), &json)?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
