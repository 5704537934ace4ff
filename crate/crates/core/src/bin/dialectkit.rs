use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dialectkit::app::{run, Command, RunConfig, Settings};

#[derive(Parser)]
#[command(name = "dialectkit", version, about = "Dialect robustness and awareness tests for text-generation metrics")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dialect vs perturbation (and MT) contrasts and success rates.
    Robustness(Flags),
    /// Does a metric prefer the matching dialect tag?
    Awareness(Flags),
    /// Quality-estimation conditions scored from the source sentence.
    Qe(Flags),
    /// Build dialect-tagged acceptability training data.
    NanoBuild(Flags),
    /// Write the bundled desk-scale fixtures.
    Fixtures(Flags),
}

#[derive(Args)]
struct Flags {
    /// Dataset (JSONL); for nano-build, the document file.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// micro or sentence.
    #[arg(long)]
    dataset_kind: Option<String>,
    /// native:<bleu|chrf>, file:<path> or cmd:"<program>"; repeatable.
    #[arg(long)]
    metric: Vec<String>,
    /// Restrict to these languages; for micro datasets, the label to report.
    #[arg(long)]
    language: Vec<String>,
    /// Reference dialect per language, e.g. pt-PT; repeatable.
    #[arg(long)]
    reference_dialect: Vec<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    confidence: Option<f64>,
    /// Bonferroni family size override.
    #[arg(long)]
    family_size: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    pos_neg_ratio: Option<f64>,
    /// One tag per line; defaults to the bundled 95-tag inventory.
    #[arg(long)]
    tag_universe: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// qe: also pass the reference dialect.
    #[arg(long)]
    with_reference: bool,
    /// nano-build: label documents lacking langid_tag with this program.
    #[arg(long)]
    langid_cmd: Option<String>,
    /// Subprocess timeout in seconds.
    #[arg(long)]
    timeout_secs: Option<u64>,
    /// nano-build: documents per shard.
    #[arg(long)]
    shard_size: Option<usize>,
    /// TOML file with the same keys; command-line values take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn into_settings(self) -> (Settings, Option<PathBuf>) {
        let settings = Settings {
            dataset: self.dataset,
            dataset_kind: self.dataset_kind,
            metric: self.metric,
            language: self.language,
            reference_dialect: self.reference_dialect,
            alpha: self.alpha,
            confidence: self.confidence,
            family_size: self.family_size,
            lambda: self.lambda,
            pos_neg_ratio: self.pos_neg_ratio,
            tag_universe: self.tag_universe,
            seed: self.seed,
            jobs: self.jobs,
            out: self.out,
            with_reference: self.with_reference.then_some(true),
            langid_cmd: self.langid_cmd,
            timeout_secs: self.timeout_secs,
            shard_size: self.shard_size,
        };
        (settings, self.config)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Robustness(f) => (Command::Robustness, f),
        Cmd::Awareness(f) => (Command::Awareness, f),
        Cmd::Qe(f) => (Command::Qe, f),
        Cmd::NanoBuild(f) => (Command::NanoBuild, f),
        Cmd::Fixtures(f) => (Command::Fixtures, f),
    };
    let result = (|| {
        let (mut settings, config) = flags.into_settings();
        if let Some(path) = config {
            settings = settings.or(Settings::from_toml_file(&path)?);
        }
        run(&RunConfig::resolve(command, settings)?)
    })();
    match result {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
