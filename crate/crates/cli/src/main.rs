//! Command-line front end: validate annotations, augment a corpus, compute
//! statistics, and measure test-set coverage.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (bad or missing input
//! files, failed validation in strict mode), 3 internal error. Every run
//! prints a fingerprint of its configuration (domain config plus options)
//! so outputs can be tied to the exact setup that produced them. With
//! `--json`, stdout carries exactly one JSON object.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use spansub_core::{
    augment, complexity_stats, load_augmented, load_examples, load_trees, parse_domain,
    render_table, test_recovery, write_augmented, write_report, AugmentOptions, DedupMode,
    Domain,
};

#[derive(Parser)]
#[command(name = "spansub", version, about = "Corpus augmentation by subtree substitution")]
struct Cli {
    /// Emit one machine-readable JSON object on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Size of the worker pool (default: all cores). Output does not
    /// depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Treat any validation failure as a hard error.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CorpusArgs {
    /// Examples file (JSONL: id, utterance, program).
    #[arg(long)]
    train: PathBuf,
    /// Span-tree annotations (JSONL: id, tokens, root).
    #[arg(long)]
    trees: PathBuf,
    /// Domain config (JSON).
    #[arg(long)]
    domain: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check every span-tree annotation against its example's program.
    Validate(CorpusArgs),
    /// Generate augmented examples by exchanging category-matched subtrees.
    Augment {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Where to write the augmented examples (JSONL).
        #[arg(long)]
        out: PathBuf,
        /// Where to write the run summary (JSON). Defaults to stdout only.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Feed augmented examples back in as hosts/donors this many times.
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Keep at most this many outputs (uniform sample drawn with --seed).
        #[arg(long)]
        max_output: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = DedupModeArg::TrainAndSelf)]
        dedup_mode: DedupModeArg,
        /// Also exchange subtrees within a single example.
        #[arg(long)]
        allow_same_example: bool,
    },
    /// Compute complexity statistics over an augmented file.
    Stats {
        /// Augmented examples file (JSONL).
        #[arg(long)]
        augmented: PathBuf,
        /// Training examples file; only its size is reported.
        #[arg(long)]
        train: Option<PathBuf>,
        /// Where to write the report (JSON). Defaults to stdout only.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count test examples recovered verbatim by the augmented set.
    Coverage {
        /// Augmented examples file (JSONL).
        #[arg(long)]
        augmented: PathBuf,
        /// Test examples file (JSONL: id, utterance, program).
        #[arg(long)]
        test: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DedupModeArg {
    TrainAndSelf,
    SelfOnly,
    None,
}

impl From<DedupModeArg> for DedupMode {
    fn from(arg: DedupModeArg) -> DedupMode {
        match arg {
            DedupModeArg::TrainAndSelf => DedupMode::TrainAndSelf,
            DedupModeArg::SelfOnly => DedupMode::SelfOnly,
            DedupModeArg::None => DedupMode::None,
        }
    }
}

/// Failures carry the exit-code class they map to.
enum Failure {
    Data(anyhow::Error),
    Internal(anyhow::Error),
}

fn data(err: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(err.into())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(err)) => {
            eprintln!("internal error: {err:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Failure::Internal(e.into()))?;
    }
    match cli.command {
        Command::Validate(corpus) => run_validate(corpus, cli.json, cli.strict),
        Command::Augment {
            corpus,
            out,
            summary,
            rounds,
            max_output,
            seed,
            dedup_mode,
            allow_same_example,
        } => {
            let options = AugmentOptions {
                rounds,
                max_output,
                seed,
                dedup_mode: dedup_mode.into(),
                allow_same_example,
            };
            run_augment(corpus, out, summary, options, cli.json, cli.strict)
        }
        Command::Stats { augmented, train, out } => run_stats(augmented, train, out, cli.json),
        Command::Coverage { augmented, test } => run_coverage(augmented, test, cli.json),
    }
}

/// First 16 hex digits of a hash over the canonicalized domain config and
/// the run options.
fn fingerprint(domain_config: Option<&str>, options: Option<&AugmentOptions>) -> String {
    let domain: serde_json::Value = domain_config
        .map(|text| serde_json::from_str(text).unwrap_or(serde_json::Value::Null))
        .unwrap_or(serde_json::Value::Null);
    let options = options
        .map(|o| serde_json::to_value(o).expect("options serialize"))
        .unwrap_or(serde_json::Value::Null);
    let canonical = serde_json::json!({ "domain": domain, "options": options }).to_string();
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::new();
    for byte in &digest[..8] {
        write!(hex, "{byte:02x}").expect("writing to a string cannot fail");
    }
    hex
}

fn read_domain(path: &Path) -> Result<(Domain, String), Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Data)?;
    let domain = parse_domain(&text).map_err(data)?;
    Ok((domain, text))
}

fn run_validate(args: CorpusArgs, json: bool, strict: bool) -> Result<(), Failure> {
    let (domain, domain_text) = read_domain(&args.domain)?;
    let print = fingerprint(Some(&domain_text), None);
    let examples = load_examples(&args.train).map_err(data)?;
    // always load leniently: the point is the per-example report
    let (corpus, report) = load_trees(&args.trees, &examples, &domain, false).map_err(data)?;

    if json {
        let payload = serde_json::json!({
            "fingerprint": print,
            "total": examples.len(),
            "passed": corpus.len(),
            "failures": report.failures,
            "missing_trees": report.missing_trees,
        });
        println!("{payload}");
    } else {
        println!("fingerprint: {print}");
        let failed: std::collections::BTreeMap<&str, &str> = report
            .failures
            .iter()
            .map(|f| (f.id.as_str(), f.reason.as_str()))
            .collect();
        let missing: std::collections::BTreeSet<&str> =
            report.missing_trees.iter().map(String::as_str).collect();
        for example in &examples {
            if let Some(reason) = failed.get(example.id.as_str()) {
                println!("FAIL {}: {reason}", example.id);
            } else if missing.contains(example.id.as_str()) {
                println!("MISS {}: no tree record", example.id);
            } else {
                println!("PASS {}", example.id);
            }
        }
        println!("{}/{} valid", corpus.len(), examples.len());
    }

    if strict && corpus.len() != examples.len() {
        return Err(data(anyhow::anyhow!(
            "{} of {} examples failed validation",
            examples.len() - corpus.len(),
            examples.len()
        )));
    }
    Ok(())
}

fn run_augment(
    args: CorpusArgs,
    out: PathBuf,
    summary_path: Option<PathBuf>,
    options: AugmentOptions,
    json: bool,
    strict: bool,
) -> Result<(), Failure> {
    let (domain, domain_text) = read_domain(&args.domain)?;
    let print = fingerprint(Some(&domain_text), Some(&options));
    let examples = load_examples(&args.train).map_err(data)?;
    let (corpus, report) = load_trees(&args.trees, &examples, &domain, strict).map_err(data)?;
    if !report.is_clean() {
        log::warn!(
            "{} of {} examples excluded during loading",
            report.failures.len() + report.missing_trees.len(),
            examples.len()
        );
    }

    let outcome = augment(&corpus, &domain, &options);
    write_augmented(&outcome.examples, &out).map_err(data)?;
    if let Some(path) = &summary_path {
        write_report(&outcome.summary, path).map_err(data)?;
    }

    if json {
        let payload = serde_json::json!({
            "fingerprint": print,
            "out": out.display().to_string(),
            "summary": outcome.summary,
        });
        println!("{payload}");
    } else {
        println!("fingerprint: {print}");
        let s = &outcome.summary;
        println!(
            "augmented {} -> {} examples ({} pairs, {} train dups, {} self dups, {} failures)",
            s.n_train, outcome.examples.len(), s.pairs_total, s.train_duplicates,
            s.self_duplicates, s.splice_failures,
        );
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn run_stats(
    augmented: PathBuf,
    train: Option<PathBuf>,
    out: Option<PathBuf>,
    json: bool,
) -> Result<(), Failure> {
    let examples = load_augmented(&augmented).map_err(data)?;
    let n_train = match &train {
        Some(path) => load_examples(path).map_err(data)?.len(),
        None => 0,
    };
    let report = complexity_stats(&examples).with_train_count(n_train);
    if let Some(path) = &out {
        write_report(&report, path).map_err(data)?;
    }

    let print = fingerprint(None, None);
    if json {
        let payload = serde_json::json!({ "fingerprint": print, "stats": report });
        println!("{payload}");
    } else {
        println!("fingerprint: {print}");
        print!("{}", render_table(&report));
    }
    Ok(())
}

fn run_coverage(augmented: PathBuf, test: PathBuf, json: bool) -> Result<(), Failure> {
    let examples = load_augmented(&augmented).map_err(data)?;
    let test_records = load_examples(&test).map_err(data)?;
    let recovery = test_recovery(&examples, &test_records);

    let print = fingerprint(None, None);
    if json {
        let payload = serde_json::json!({ "fingerprint": print, "recovery": recovery });
        println!("{payload}");
    } else {
        println!("fingerprint: {print}");
        println!("{recovery}");
    }
    Ok(())
}
