use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use dataprobe::corpus::CorpusFormat;
use dataprobe::markov::NllMode;
use dataprobe::model::Decoding;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Parser)]
#[command(name = "dataprobe", version, about = "Markov-chain data probes and claim validation")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Common {
    /// Base random seed.
    #[arg(long, global = true, env = "DATAPROBE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores. Results do not depend on it.
    #[arg(long, global = true, env = "DATAPROBE_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// JSON object whose keys override flags, or a manifest to replay.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Manifest path; defaults to `<first output>.manifest.json`.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select a chain whose entropy rate is closest to a target.
    GenChain(GenChainArgs),
    /// Print entropy, stationary residual and sparsity of a chain.
    InspectChain(InspectChainArgs),
    /// Sample a corpus from a chain.
    Sample(SampleArgs),
    /// Convert a corpus between DPRB and JSONL.
    ExportCorpus(ExportCorpusArgs),
    /// Fit the add-λ k-gram reference model.
    FitModel(FitModelArgs),
    /// Decode sequences from a model or the chain itself.
    Decode(DecodeArgs),
    /// Average NLL of each sequence under the chain.
    Score(ScoreArgs),
    /// Regime counts per condition and the shift across conditions.
    Classify(ClassifyArgs),
    /// Empirical CDF of average NLL per condition.
    Cdf(CdfArgs),
    /// Check C1-C4 and run the probe-side contrast of a claim.
    RunClaim(RunClaimArgs),
    /// Summarise a real-side CSV (arm, seed, diagnostic_value) as a contrast.
    IngestReal(IngestRealArgs),
    /// Internal and external validity plus transfer status.
    Verdict(VerdictArgs),
    /// Claim card (JSON and text) and optionally the reduction record.
    Card(CardArgs),
    /// Entropy-rate distribution of random chains over a concentration grid.
    SweepEntropy(SweepEntropyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenChain(_) => "gen-chain",
            Command::InspectChain(_) => "inspect-chain",
            Command::Sample(_) => "sample",
            Command::ExportCorpus(_) => "export-corpus",
            Command::FitModel(_) => "fit-model",
            Command::Decode(_) => "decode",
            Command::Score(_) => "score",
            Command::Classify(_) => "classify",
            Command::Cdf(_) => "cdf",
            Command::RunClaim(_) => "run-claim",
            Command::IngestReal(_) => "ingest-real",
            Command::Verdict(_) => "verdict",
            Command::Card(_) => "card",
            Command::SweepEntropy(_) => "sweep-entropy",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenChainArgs {
    #[arg(long, default_value_t = 128)]
    pub m: usize,
    #[arg(long, default_value_t = 0.005)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub target_entropy: f64,
    #[arg(long, default_value_t = 200)]
    pub candidates: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct InspectChainArgs {
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Sequence length.
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to the output extension (`.dprb` binary, otherwise JSONL).
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExportCorpusArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<FormatArg>,
    /// Vocabulary size for DPRB output when the input does not declare one.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitModelArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Vocabulary size; defaults to the corpus header.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DecodeArgs {
    /// Fitted model; the chain itself is decoded when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Chain used for one-token prompts drawn from its stationary law.
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Corpus whose leading tokens are used as prompts.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub prompt_len: usize,
    /// Number of prompts drawn from the chain.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// `greedy` or a positive temperature.
    #[arg(long, default_value = "1.0")]
    pub temperature: TemperatureArg,
    #[arg(long, default_value_t = 127)]
    pub max_new_tokens: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScoreArgs {
    #[arg(long)]
    pub chain: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value = "conditional")]
    pub mode: NllMode,
    /// CSV with columns `index,avg_nll,mode`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClassifyArgs {
    /// Score files as `label=path` or `path`; order defines the condition order.
    #[arg(long, num_args = 1..)]
    pub scores: Vec<String>,
    /// Chain providing the entropy rate.
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Entropy rate, if no chain is given.
    #[arg(long)]
    pub entropy: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CdfArgs {
    #[arg(long, num_args = 1..)]
    pub scores: Vec<String>,
    /// CSV with columns `condition,nll,cdf`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RunClaimArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Claim id; defaults to the first claim in the spec.
    #[arg(long)]
    pub claim: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the C1-C4 report.
    #[arg(long)]
    pub criteria_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IngestRealArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub claim: Option<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerdictArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub claim: Option<String>,
    #[arg(long)]
    pub probe: Option<PathBuf>,
    #[arg(long)]
    pub real: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CardArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub claim: Option<String>,
    #[arg(long)]
    pub probe: Option<PathBuf>,
    #[arg(long)]
    pub real: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plain-text rendering; printed to stdout when absent.
    #[arg(long)]
    pub text_out: Option<PathBuf>,
    /// Also write the Markov temperature reduction record.
    #[arg(long)]
    pub reduction_record: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepEntropyArgs {
    #[arg(long, default_value_t = 128)]
    pub m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.002, 0.005, 0.02, 0.1, 1.0])]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub candidates: usize,
    #[arg(long, default_value_t = 1.0)]
    pub target_entropy: f64,
    #[arg(long, default_value_t = 70)]
    pub bins: usize,
    /// Receives `histogram.csv`, `cdf.csv` and `summary.json`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also write the best chain.
    #[arg(long)]
    pub best_chain: Option<PathBuf>,
}

/// Corpus format flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Dprb,
    Jsonl,
}

impl FromStr for FormatArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dprb" => Ok(FormatArg::Dprb),
            "jsonl" => Ok(FormatArg::Jsonl),
            other => Err(format!("unknown corpus format `{other}` (expected dprb or jsonl)")),
        }
    }
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Dprb => CorpusFormat::Dprb,
            FormatArg::Jsonl => CorpusFormat::Jsonl,
        }
    }
}

/// `greedy` or a temperature. Serialized as the string `greedy` or a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemperatureArg {
    Greedy,
    Temperature(f64),
}

impl TemperatureArg {
    pub fn decoding(self) -> Decoding {
        match self {
            TemperatureArg::Greedy => Decoding::Greedy,
            TemperatureArg::Temperature(t) => Decoding::Sampling { temperature: t },
        }
    }
}

impl fmt::Display for TemperatureArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemperatureArg::Greedy => f.write_str("greedy"),
            TemperatureArg::Temperature(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for TemperatureArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "greedy" {
            return Ok(TemperatureArg::Greedy);
        }
        match s.parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(TemperatureArg::Temperature(t)),
            _ => Err(format!("expected `greedy` or a positive temperature, got `{s}`")),
        }
    }
}

impl Serialize for TemperatureArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TemperatureArg::Greedy => s.serialize_str("greedy"),
            TemperatureArg::Temperature(t) => s.serialize_f64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for TemperatureArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(t) => TemperatureArg::from_str(&t.to_string()),
            Raw::Text(s) => TemperatureArg::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}
