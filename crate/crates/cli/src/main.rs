mod args;
mod commands;
mod config;
mod manifest;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;
use dataprobe::ErrorCategory;

use args::{Cli, Command, Common};
use manifest::Recorder;

/// Bad flags, config fields or file combinations.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut common = cli.common;
    let name = cli.command.name();
    let mut rec = Recorder::default();
    let config = match cli.command {
        Command::GenChain(a) => exec(name, a, &mut common, |a, seed| commands::gen_chain(a, seed, &mut rec)),
        Command::InspectChain(a) => exec(name, a, &mut common, |a, _| commands::inspect_chain(a, &mut rec)),
        Command::Sample(a) => exec(name, a, &mut common, |a, seed| commands::sample(a, seed, &mut rec)),
        Command::ExportCorpus(a) => exec(name, a, &mut common, |a, _| commands::export_corpus(a, &mut rec)),
        Command::FitModel(a) => exec(name, a, &mut common, |a, _| commands::fit_model(a, &mut rec)),
        Command::Decode(a) => exec(name, a, &mut common, |a, seed| commands::decode(a, seed, &mut rec)),
        Command::Score(a) => exec(name, a, &mut common, |a, _| commands::score(a, &mut rec)),
        Command::Classify(a) => exec(name, a, &mut common, |a, _| commands::classify(a, &mut rec)),
        Command::Cdf(a) => exec(name, a, &mut common, |a, _| commands::cdf(a, &mut rec)),
        Command::RunClaim(a) => exec(name, a, &mut common, |a, seed| commands::run_claim(a, seed, &mut rec)),
        Command::IngestReal(a) => exec(name, a, &mut common, |a, _| commands::ingest(a, &mut rec)),
        Command::Verdict(a) => exec(name, a, &mut common, |a, _| commands::verdict(a, &mut rec)),
        Command::Card(a) => exec(name, a, &mut common, |a, _| commands::card(a, &mut rec)),
        Command::SweepEntropy(a) => exec(name, a, &mut common, |a, seed| commands::sweep(a, seed, &mut rec)),
    }?;
    let path = common.manifest.clone().or_else(|| rec.manifest_path());
    if let Some(path) = path {
        let m = rec.finish(name, config)?;
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| anyhow::Error::new(e).context(format!("writing {}", path.display())))?;
    }
    Ok(())
}

/// Resolves config over flags, sizes the thread pool, runs the command.
fn exec<T: serde::Serialize + serde::de::DeserializeOwned>(
    name: &str,
    args: T,
    common: &mut Common,
    f: impl FnOnce(&T, u64) -> anyhow::Result<()>,
) -> anyhow::Result<serde_json::Value> {
    let (args, config) = config::resolve(name, args, common)?;
    init_threads(common.threads)?;
    f(&args, common.seed)?;
    Ok(config)
}

fn init_threads(threads: usize) -> anyhow::Result<()> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| UsageError(format!("--threads: {e}")))?;
    }
    Ok(())
}

/// 2 usage, 3 parameter, 4 convergence, 5 I/O, 6 contrast, 1 anything else.
fn exit_code(err: &anyhow::Error) -> (u8, &'static str) {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return (2, "usage");
        }
        if let Some(e) = cause.downcast_ref::<dataprobe::Error>() {
            return match e.category() {
                ErrorCategory::Parameter => (3, "parameter"),
                ErrorCategory::Convergence => (4, "convergence"),
                ErrorCategory::Io => (5, "io"),
                ErrorCategory::Contrast => (6, "contrast"),
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return (5, "io");
        }
        if cause.downcast_ref::<csv::Error>().is_some() || cause.downcast_ref::<serde_json::Error>().is_some() {
            return (3, "parameter");
        }
    }
    (1, "internal")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, category) = exit_code(&e);
            eprintln!("error [{category}]: {e:#}");
            ExitCode::from(code)
        }
    }
}
