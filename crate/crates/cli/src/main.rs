use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mrn_core::frontend::{emit_ast_json, ingest_ast_json, list_functions, parse_source, NormalizedAst, SourceFile};
use mrn_core::graph::{build_mrng, mrng_to_dot, serialize_graph};
use mrn_core::harness::{
    evaluate, load_dataset, locate, split_dataset, train_model, DatasetManifest, TrainingConfig,
};
use mrn_core::model::{load_checkpoint, save_checkpoint, ModelConfig};

/// Exit status when `locate` flags at least one function.
const EXIT_POSITIVE: u8 = 2;

#[derive(Parser)]
#[command(name = "mrn", version, about = "Locate vulnerable functions in Solidity contracts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a source file (or AST interchange JSON) and list its functions.
    Parse {
        file: PathBuf,
        #[arg(long, value_name = "FILE")]
        emit_ast: Option<PathBuf>,
    },
    /// Build the contract graph; prints graph JSON unless --out is given.
    Graph {
        file: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
    },
    /// Train a checkpoint on a labelled manifest.
    Train(TrainArgs),
    /// Evaluate a checkpoint on every contract of a manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_name = "FILE")]
        roc_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Score every function of one file. Exit 2 when any verdict is positive.
    Locate {
        file: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Write the JSON report here instead of stdout.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 0.002)]
    lr: f64,
    #[arg(long, default_value_t = 0.0005)]
    momentum: f64,
    /// Overridden by MRN_SEED when set.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    dropout: f64,
    /// Train, validation and test fractions.
    #[arg(long, num_args = 3, value_names = ["TRAIN", "VAL", "TEST"], default_values_t = [0.8, 0.1, 0.1])]
    split: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    min_frequency: usize,
    #[arg(long, default_value_t = 1.0)]
    positive_weight: f64,
    #[arg(long)]
    no_self_attention: bool,
    #[arg(long)]
    no_nested: bool,
    /// Per-epoch log as JSON Lines.
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
}

fn read_ast(path: &Path) -> Result<NormalizedAst> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let display = path.display().to_string();
    let ast = if path.extension().is_some_and(|e| e == "json") {
        ingest_ast_json(&bytes)?
    } else {
        parse_source(&SourceFile::from_bytes(display.clone(), bytes)?)?
    };
    Ok(ast)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn seed_override(seed: u64) -> Result<u64> {
    match std::env::var("MRN_SEED") {
        Ok(s) => s.trim().parse().with_context(|| format!("MRN_SEED={s:?} is not an unsigned integer")),
        Err(_) => Ok(seed),
    }
}

fn train(args: TrainArgs) -> Result<()> {
    let seed = seed_override(args.seed)?;
    let manifest = DatasetManifest::load(&args.manifest)?;
    let data = load_dataset(&manifest)?;
    let split: [f64; 3] = args.split.as_slice().try_into().expect("clap enforces three values");
    let config = TrainingConfig {
        epochs: args.epochs,
        batch_size: args.batch,
        learning_rate: args.lr,
        momentum: args.momentum,
        seed,
        split,
        min_frequency: args.min_frequency,
        positive_weight: args.positive_weight,
        ..TrainingConfig::default()
    };
    let model_config = ModelConfig {
        dropout: args.dropout,
        seed,
        no_self_attention: args.no_self_attention,
        no_nested: args.no_nested,
        ..ModelConfig::default()
    };
    let parts = split_dataset(data.len(), split, seed)?;
    let pick = |ids: &[usize]| ids.iter().map(|&i| &data[i]).collect::<Vec<_>>();
    let (train_set, validation, test) = (pick(&parts.train), pick(&parts.validation), pick(&parts.test));
    log::info!(
        "{} contracts: {} train, {} validation, {} test",
        data.len(),
        train_set.len(),
        validation.len(),
        test.len()
    );
    let mut lines = String::new();
    let mut outcome = train_model(&train_set, &validation, model_config, &config, |e| {
        lines.push_str(&serde_json::to_string(e).expect("epoch log serializes"));
        lines.push('\n');
    })?;
    let classes: Vec<_> = manifest.entries.iter().map(|e| e.class).collect();
    if let Some(first) = classes.first() {
        if classes.iter().all(|c| c == first) {
            outcome.checkpoint.metadata.class = Some(first.as_str().to_string());
        }
    }
    if let Some(path) = &args.log {
        write(path, &lines)?;
    }
    save_checkpoint(&outcome.checkpoint, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    log::info!(
        "saved epoch {} to {}",
        outcome.checkpoint.metadata.epoch,
        args.out.display()
    );
    if !test.is_empty() {
        let r = evaluate(&outcome.checkpoint.model, &test, config.threshold)?;
        println!(
            "test: accuracy {:.4} precision {:.4} recall {:.4} f1 {:.4}",
            r.accuracy, r.precision, r.recall, r.f1
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Parse { file, emit_ast } => {
            let ast = read_ast(&file)?;
            for f in list_functions(&ast) {
                let name = if f.is_fallback { "<fallback>" } else if f.is_constructor { "<constructor>" } else { &f.name };
                println!("{}.{}/{} lines {}-{}", f.contract, name, f.arity, f.span.start_line, f.span.end_line);
            }
            if let Some(path) = emit_ast {
                write(&path, &emit_ast_json(&ast))?;
            }
        }
        Command::Graph { file, out, dot } => {
            let ast = read_ast(&file)?;
            let graph = build_mrng(file.display().to_string(), &ast);
            let json = serialize_graph(&graph);
            match out {
                Some(path) => write(&path, &json)?,
                None => print!("{json}"),
            }
            if let Some(path) = dot {
                write(&path, &mrng_to_dot(&graph))?;
            }
        }
        Command::Train(args) => train(args)?,
        Command::Eval {
            manifest,
            model,
            roc_csv,
            threshold,
        } => {
            let ckpt = load_checkpoint(&model).with_context(|| format!("loading {}", model.display()))?;
            let data = load_dataset(&DatasetManifest::load(&manifest)?)?;
            let refs: Vec<_> = data.iter().collect();
            let report = evaluate(&ckpt.model, &refs, threshold)?;
            if let Some(path) = roc_csv {
                if report.roc.is_none() {
                    bail!("ROC undefined: the manifest labels contain only one class");
                }
                write(&path, &report.roc_csv())?;
            }
            let summary = serde_json::json!({
                "counts": report.counts,
                "accuracy": report.accuracy,
                "precision": report.precision,
                "recall": report.recall,
                "f1": report.f1,
                "auc": report.auc,
                "threshold": report.threshold,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Locate {
            file,
            model,
            threshold,
            json,
        } => {
            let ckpt = load_checkpoint(&model).with_context(|| format!("loading {}", model.display()))?;
            let bytes = std::fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let source = SourceFile::from_bytes(file.display().to_string(), bytes)?;
            let report = locate(&source, &ckpt.model, threshold)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            match json {
                Some(path) => {
                    write(&path, &text)?;
                    for f in &report.functions {
                        println!(
                            "{}.{}/{} {:.6} {}",
                            f.contract,
                            f.name,
                            f.arity,
                            f.probability,
                            if f.verdict { "VULNERABLE" } else { "ok" }
                        );
                    }
                }
                None => print!("{text}"),
            }
            if report.any_positive() {
                return Ok(EXIT_POSITIVE);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
