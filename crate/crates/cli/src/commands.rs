use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use dataprobe::corpus::{load_corpus, save_corpus, CorpusFormat};
use dataprobe::markov::{
    entropy_rate, sample_corpus, select_probe, sequence_nll, sweep_entropy, ChainFile, ProbeGenSpec, SweepConfig,
    TokenSequence,
};
use dataprobe::model::{decode_batch, fit, wrap_chain_as_model, DecodingConfig, NGramModel, SequenceModel};
use dataprobe::protocol::experiment::{ingest_real, read_real_rows, ExperimentSpec};
use dataprobe::protocol::{
    check_criteria, emit_claim_card, emit_reduction_record, run_probe_contrast, ClaimVerdict, ContrastResult,
    ReductionRecord, DEFAULT_SMOKE_SAMPLES,
};
use dataprobe::rng::{sample_categorical, substream};
use dataprobe::typical::{summarize, NllSummary, Regime, TypicalSetBand};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::manifest::Recorder;
use crate::UsageError;

/// Prompt `i` drawn by `decode` uses sub-stream `PROMPT_STREAM + i`; decoding
/// itself uses sub-stream `i`.
const PROMPT_STREAM: u64 = 1 << 48;

/// Prints to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

/// Required paths are optional on the command line so that `--config` can
/// supply them; this checks them after the merge.
fn need<'a>(path: &'a Option<PathBuf>, field: &str) -> anyhow::Result<&'a PathBuf> {
    path.as_ref()
        .ok_or_else(|| UsageError(format!("missing `{field}` (pass --{} or set it in --config)", field.replace('_', "-"))).into())
}

fn need_scores(scores: &[String]) -> anyhow::Result<()> {
    if scores.is_empty() {
        bail!(UsageError("missing `scores` (pass --scores or set it in --config)".into()));
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn corpus_format(explicit: Option<FormatArg>, path: &Path) -> CorpusFormat {
    explicit.map_or_else(|| CorpusFormat::from_path(path), Into::into)
}

fn load_chain(rec: &mut Recorder, path: &Path) -> anyhow::Result<ChainFile> {
    rec.input(path);
    Ok(ChainFile::load(path)?)
}

pub fn gen_chain(a: &GenChainArgs, seed: u64, rec: &mut Recorder) -> anyhow::Result<()> {
    let out = rec.output(need(&a.out, "out")?)?;
    let spec = ProbeGenSpec {
        m: a.m,
        alpha: a.alpha,
        target_entropy: a.target_entropy,
        num_candidates: a.candidates,
        seed,
    };
    let probe = select_probe(&spec)?;
    if !probe.skipped.is_empty() {
        log::warn!("{} candidates skipped (no convergence)", probe.skipped.len());
    }
    ChainFile::from_probe(&spec, &probe).save(&out)?;
    rec.seeds.push(seed);
    println!(
        "chain M={} H={:.6} bits/token (target {}, |gap| {:.2e}, candidate {})",
        a.m,
        probe.achieved_entropy,
        a.target_entropy,
        (probe.achieved_entropy - a.target_entropy).abs(),
        probe.candidate_index
    );
    Ok(())
}

pub fn inspect_chain(a: &InspectChainArgs, rec: &mut Recorder) -> anyhow::Result<()> {
    let file = load_chain(rec, need(&a.chain, "chain")?)?;
    let out = a.out.as_ref().map(|p| rec.output(p)).transpose()?;
    let (p, pi) = file.chain()?;
    let h = entropy_rate(&p, &pi)?;
    let max_row_error = p
        .rows()
        .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let zeros = p.rows().flatten().filter(|&&x| x == 0.0).count();
    let probs = pi.probabilities();
    let report = json!({
        "m": file.m,
        "alpha": file.alpha,
        "seed": file.seed,
        "target_entropy": file.target_entropy,
        "stored_entropy": file.achieved_entropy,
        "entropy_rate": h,
        "stationary_residual": pi.residual(&p),
        "max_row_sum_error": max_row_error,
        "zero_entries": zeros,
        "zero_fraction": zeros as f64 / (file.m * file.m) as f64,
        "stationary_min": probs.iter().copied().fold(f64::INFINITY, f64::min),
        "stationary_max": probs.iter().copied().fold(0.0, f64::max),
    });
    emit(&(serde_json::to_string_pretty(&report)? + "\n"))?;
    if let Some(out) = out {
        write_json(&out, &report)?;
    }
    Ok(())
}

pub fn sample(a: &SampleArgs, seed: u64, rec: &mut Recorder) -> anyhow::Result<()> {
    let file = load_chain(rec, need(&a.chain, "chain")?)?;
    let out = rec.output(need(&a.out, "out")?)?;
    let (p, pi) = file.chain()?;
    let corpus = sample_corpus(&p, &pi, a.n, a.count, seed)?;
    save_corpus(&out, corpus_format(a.format, &out), file.m, &corpus)?;
    rec.seeds.push(seed);
    println!("{} sequences of length {} -> {}", a.count, a.n, out.display());
    Ok(())
}

pub fn export_corpus(a: &ExportCorpusArgs, rec: &mut Recorder) -> anyhow::Result<()> {
    rec.input(need(&a.input, "input")?);
    let out = rec.output(need(&a.out, "out")?)?;
    let corpus = load_corpus(need(&a.input, "input")?)?;
    let m = match (a.m, corpus.m) {
        (Some(m), Some(declared)) if m != declared => {
            bail!(UsageError(format!("--m {m} disagrees with the corpus header ({declared})")))
        }
        (Some(m), _) => m,
        (None, _) => corpus.vocab_size(),
    };
    for s in &corpus.sequences {
        s.check_vocab(m)?;
    }
    save_corpus(&out, corpus_format(a.format, &out), m, &corpus.sequences)?;
    println!("{} sequences -> {}", corpus.sequences.len(), out.display());
    Ok(())
}

pub fn fit_model(a: &FitModelArgs, rec: &mut Recorder) -> anyhow::Result<()> {
    rec.input(need(&a.corpus, "corpus")?);
    let out = rec.output(need(&a.out, "out")?)?;
    let corpus = load_corpus(need(&a.corpus, "corpus")?)?;
    let m = a.m.unwrap_or_else(|| corpus.vocab_size());
    let model = fit(&corpus.sequences, m, a.k, a.lambda)?;
    model.save(&out)?;
    println!(
        "k={} λ={} M={m}: {} contexts from {} sequences",
        a.k,
        a.lambda,
        model.num_contexts(),
        corpus.sequences.len()
    );
    Ok(())
}

pub fn decode(a: &DecodeArgs, seed: u64, rec: &mut Recorder) -> anyhow::Result<()> {
    let chain = a.chain.as_ref().map(|p| load_chain(rec, p)).transpose()?;
    let model: Box<dyn SequenceModel> = match (&a.model, &chain) {
        (Some(path), _) => {
            rec.input(path);
            Box::new(NGramModel::load(path)?)
        }
        (None, Some(c)) => Box::new(wrap_chain_as_model(c.chain()?.0)),
        (None, None) => bail!(UsageError("decode needs --model or --chain".into())),
    };
    let prompts: Vec<TokenSequence> = match (&a.prompts, &chain) {
        (Some(path), _) => {
            rec.input(path);
            if a.prompt_len == 0 {
                bail!(UsageError("--prompt-len must be at least 1".into()));
            }
            load_corpus(path)?
                .sequences
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let t = s.tokens();
                    if t.len() < a.prompt_len {
                        bail!(UsageError(format!(
                            "prompt {i} has {} tokens, fewer than --prompt-len {}",
                            t.len(),
                            a.prompt_len
                        )));
                    }
                    Ok(TokenSequence::new(t[..a.prompt_len].to_vec())?)
                })
                .collect::<anyhow::Result<_>>()?
        }
        (None, Some(c)) => {
            let (_, pi) = c.chain()?;
            (0..a.count as u64)
                .map(|i| {
                    let t = sample_categorical(pi.probabilities(), &mut substream(seed, PROMPT_STREAM + i));
                    TokenSequence::new(vec![t as u32])
                })
                .collect::<Result<_, _>>()?
        }
        (None, None) => bail!(UsageError("decode needs --prompts or --chain".into())),
    };
    let out = rec.output(need(&a.out, "out")?)?;
    let cfg = DecodingConfig {
        decoding: a.temperature.decoding(),
        max_new_tokens: a.max_new_tokens,
        seed,
    };
    let outs = decode_batch(model.as_ref(), &prompts, &cfg)?;
    save_corpus(&out, corpus_format(a.format, &out), model.vocab_size(), &outs)?;
    rec.seeds.push(seed);
    println!("{} sequences decoded ({}) -> {}", outs.len(), cfg.decoding.label(), out.display());
    Ok(())
}

pub fn score(a: &ScoreArgs, rec: &mut Recorder) -> anyhow::Result<()> {
    let file = load_chain(rec, need(&a.chain, "chain")?)?;
    rec.input(need(&a.corpus, "corpus")?);
    let out = rec.output(need(&a.out, "out")?)?;
    let (p, pi) = file.chain()?;
    let corpus = load_corpus(need(&a.corpus, "corpus")?)?;
    let mut w = csv::Writer::from_writer(create(&out)?);
    w.write_record(["index", "avg_nll", "mode"])?;
    let mut infinite = 0;
    for (i, x) in corpus.sequences.iter().enumerate() {
        let v = sequence_nll(&p, &pi, x, a.mode)?;
        infinite += usize::from(v.is_infinite());
        w.write_record([i.to_string(), v.to_string(), a.mode.to_string()])?;
    }
    w.flush()?;
    println!(
        "{} sequences scored ({} mode), {infinite} off-support -> {}",
        corpus.sequences.len(),
        a.mode,
        out.display()
    );
    Ok(())
}

/// `label=path` or `path` (label = file stem).
fn parse_scores(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() => (label.to_string(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(spec);
            let label = path
                .file_stem()
                .map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
            (label, path)
        }
    }
}

/// Scores plus the NLL mode recorded in the optional `mode` column.
fn read_scores(path: &Path) -> anyhow::Result<(Vec<f64>, Option<String>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = r.headers()?.clone();
    let col = headers
        .iter()
        .position(|h| h == "avg_nll")
        .ok_or_else(|| UsageError(format!("{}: no `avg_nll` column", path.display())))?;
    let mode_col = headers.iter().position(|h| h == "mode");
    let mut mode = None;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let v: f64 = rec
            .get(col)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| UsageError(format!("{}: row {} has no numeric avg_nll", path.display(), i + 1)))?;
        out.push(v);
        if let Some(m) = mode_col.and_then(|c| rec.get(c)) {
            if mode.get_or_insert_with(|| m.to_string()) != m {
                bail!(UsageError(format!("{}: mixed NLL modes", path.display())));
            }
        }
    }
    if out.is_empty() {
        bail!(UsageError(format!("{}: no scores", path.display())));
    }
    Ok((out, mode))
}

fn condition_report(label: &str, mode: Option<&str>, s: &NllSummary) -> serde_json::Value {
    let c = &s.regime_counts;
    json!({
        "label": label,
        "nll_mode": mode,
        "count": s.nlls.len(),
        "finite_mean_nll": s.finite_mean(),
        "off_support_fraction": s.infinite_fraction(),
        "regime_counts": c,
        "fractions": {
            "over_conservative": c.fraction(Regime::OverConservative),
            "typical": c.fraction(Regime::Typical),
            "uncertain": c.fraction(Regime::Uncertain),
        },
        "mean_regime_score": c.mean_score(),
    })
}

pub fn classify(a: &ClassifyArgs, rec: &mut Recorder) -> anyhow::Result<()> {
    let h = match (&a.chain, a.entropy) {
        (Some(path), None) => load_chain(rec, path)?.achieved_entropy,
        (None, Some(h)) => h,
        _ => bail!(UsageError("classify needs exactly one of --chain or --entropy".into())),
    };
    need_scores(&a.scores)?;
    let conditions: Vec<(String, PathBuf)> = a.scores.iter().map(|s| parse_scores(s)).collect();
    for (_, p) in &conditions {
        rec.input(p);
    }
    let out = rec.output(need(&a.out, "out")?)?;
    let mut summaries = Vec::new();
    for (label, path) in &conditions {
        let (nlls, mode) = read_scores(path)?;
        let band = TypicalSetBand::new(h, a.epsilon, 0)?;
        summaries.push((label.clone(), mode, summarize(&nlls, &band)?));
    }
    let band = TypicalSetBand::new(h, a.epsilon, 0)?;
    let mut report = json!({
        "entropy_rate": h,
        "epsilon": a.epsilon,
        "band": [band.lower(), band.upper()],
        "conditions": summaries.iter().map(|(l, m, s)| condition_report(l, m.as_deref(), s)).collect::<Vec<_>>(),
    });
    if summaries.len() >= 2 {
        let pairs = || summaries.windows(2);
        let frac = |s: &NllSummary, r| s.regime_counts.fraction(r);
        let means_increase = pairs().all(|w| match (w[0].2.finite_mean(), w[1].2.finite_mean()) {
            (Some(x), Some(y)) => y > x,
            _ => false,
        });
        let oc_down = pairs().all(|w| frac(&w[1].2, Regime::OverConservative) <= frac(&w[0].2, Regime::OverConservative));
        let unc_up = pairs().all(|w| frac(&w[1].2, Regime::Uncertain) >= frac(&w[0].2, Regime::Uncertain));
        let first = summaries[0].2.regime_counts.mean_score();
        let last = summaries[summaries.len() - 1].2.regime_counts.mean_score();
        let holds = means_increase && oc_down && unc_up && last > first;
        report["shift"] = json!({
            "finite_mean_nll_increasing": means_increase,
            "over_conservative_nonincreasing": oc_down,
            "uncertain_nondecreasing": unc_up,
            "regime_score_rises": last > first,
            "holds": holds,
        });
        println!("regime shift across {} conditions: {}", summaries.len(), if holds { "observed" } else { "not observed" });
    }
    for (label, _, s) in &summaries {
        let c = &s.regime_counts;
        println!(
            "{label:>10}: mean NLL {} | over_conservative {:.3} typical {:.3} uncertain {:.3} | off-support {:.3}",
            s.finite_mean().map_or("n/a".to_string(), |m| format!("{m:.4}")),
            c.fraction(Regime::OverConservative),
            c.fraction(Regime::Typical),
            c.fraction(Regime::Uncertain),
            s.infinite_fraction()
        );
    }
    write_json(&out, &report)
}

pub fn cdf(a: &CdfArgs, rec: &mut Recorder) -> anyhow::Result<()> {
    need_scores(&a.scores)?;
    let conditions: Vec<(String, PathBuf)> = a.scores.iter().map(|s| parse_scores(s)).collect();
    for (_, p) in &conditions {
        rec.input(p);
    }
    let out = rec.output(need(&a.out, "out")?)?;
    let mut w = csv::Writer::from_writer(create(&out)?);
    w.write_record(["condition", "mode", "nll", "cdf"])?;
    for (label, path) in &conditions {
        let (nlls, mode) = read_scores(path)?;
        let mode = mode.unwrap_or_default();
        // band is irrelevant for the CDF
        let s = summarize(&nlls, &TypicalSetBand::new(0.0, 0.0, 0)?)?;
        for (v, c) in &s.cdf {
            w.write_record([label.clone(), mode.clone(), v.to_string(), c.to_string()])?;
        }
        if s.infinite > 0 {
            log::warn!("{label}: {} infinite values left out of the CDF", s.infinite);
        }
    }
    w.flush()?;
    Ok(())
}

fn load_spec(rec: &mut Recorder, path: &Path) -> anyhow::Result<(ExperimentSpec, PathBuf)> {
    rec.input(path);
    Ok(ExperimentSpec::load(path)?)
}

pub fn run_claim(a: &RunClaimArgs, seed: u64, rec: &mut Recorder) -> anyhow::Result<()> {
    let (spec, base) = load_spec(rec, need(&a.spec, "spec")?)?;
    rec.input(ExperimentSpec::resolve(&base, &spec.chain));
    if let Some(m) = &spec.model {
        rec.input(ExperimentSpec::resolve(&base, m));
    }
    let out = rec.output(need(&a.out, "out")?)?;
    let criteria_out = a.criteria_out.as_ref().map(|p| rec.output(p)).transpose()?;
    let claim_id = spec.claim(a.claim.as_deref())?.claim.id.clone();
    let probe = spec.build(&base)?;
    let criteria = check_criteria(&probe, DEFAULT_SMOKE_SAMPLES, seed);
    if let Some(p) = &criteria_out {
        write_json(p, &criteria)?;
    }
    println!(
        "criteria: C1={} C2={} C3={} C4={}",
        criteria.c1, criteria.c2, criteria.c3, criteria.c4
    );
    if !criteria.valid() {
        return Err(dataprobe::Error::Validation(format!("probe fails its criteria: {}", criteria.notes.join("; "))).into());
    }
    let result = run_probe_contrast(&probe, &claim_id, &spec.contrast)?;
    rec.seeds.push(seed);
    rec.seeds.extend(&spec.contrast.seeds);
    write_json(&out, &result)?;
    println!(
        "claim {claim_id}: mu_a={:.6} mu_b={:.6} delta={:+.6} p={:.4}",
        result.mu_a,
        result.mu_b,
        result.delta,
        result.summaries.p_value.unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn ingest(a: &IngestRealArgs, rec: &mut Recorder) -> anyhow::Result<()> {
    let (spec, _) = load_spec(rec, need(&a.spec, "spec")?)?;
    rec.input(need(&a.csv, "csv")?);
    let out = rec.output(need(&a.out, "out")?)?;
    let bound = spec.claim(a.claim.as_deref())?;
    let csv_path = need(&a.csv, "csv")?;
    let file = File::open(csv_path).with_context(|| format!("opening {}", csv_path.display()))?;
    let rows = read_real_rows(file)?;
    let result = ingest_real(&rows, bound, spec.contrast.permutations, spec.contrast.bootstrap_resamples)?;
    rec.seeds.extend(&result.seeds);
    write_json(&out, &result)?;
    println!(
        "real side of {}: {} rows over {} seeds, delta={:+.6}",
        bound.claim.id,
        rows.len(),
        result.seeds.len(),
        result.delta
    );
    Ok(())
}

fn read_result(rec: &mut Recorder, path: &Path, claim_id: &str) -> anyhow::Result<ContrastResult> {
    rec.input(path);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let r: ContrastResult =
        serde_json::from_str(&text).map_err(dataprobe::Error::from).with_context(|| format!("parsing {}", path.display()))?;
    if r.claim_id != claim_id {
        bail!(UsageError(format!(
            "{} belongs to claim `{}`, not `{claim_id}`",
            path.display(),
            r.claim_id
        )));
    }
    Ok(r)
}

fn evaluate(
    rec: &mut Recorder,
    spec: &Path,
    claim: Option<&str>,
    probe: &Path,
    real: Option<&PathBuf>,
) -> anyhow::Result<(dataprobe::protocol::BoundClaim, Vec<ContrastResult>, ClaimVerdict)> {
    let (spec, _) = load_spec(rec, spec)?;
    let bound = spec.claim(claim)?.clone();
    let probe = read_result(rec, probe, &bound.claim.id)?;
    let real = real.map(|p| read_result(rec, p, &bound.claim.id)).transpose()?;
    let verdict = ClaimVerdict::evaluate(&bound.claim.id, &bound.binding, &probe, real.as_ref())?;
    let results = std::iter::once(probe).chain(real).collect();
    Ok((bound, results, verdict))
}

pub fn verdict(a: &VerdictArgs, rec: &mut Recorder) -> anyhow::Result<()> {
    let (bound, _, verdict) = evaluate(rec, need(&a.spec, "spec")?, a.claim.as_deref(), need(&a.probe, "probe")?, a.real.as_ref())?;
    let out = rec.output(need(&a.out, "out")?)?;
    write_json(&out, &verdict)?;
    let ev = verdict.ev.map_or("not evaluated".to_string(), |e| u8::from(e).to_string());
    print!("claim {}: IV={} EV={ev} -> {}", bound.claim.id, u8::from(verdict.iv), verdict.status);
    if verdict.status.is_extension() {
        print!(" [extension]");
    }
    println!();
    Ok(())
}

pub fn card(a: &CardArgs, rec: &mut Recorder) -> anyhow::Result<()> {
    let (bound, results, verdict) = evaluate(rec, need(&a.spec, "spec")?, a.claim.as_deref(), need(&a.probe, "probe")?, a.real.as_ref())?;
    let out = rec.output(need(&a.out, "out")?)?;
    let text_out = a.text_out.as_ref().map(|p| rec.output(p)).transpose()?;
    let record_out = a.reduction_record.as_ref().map(|p| rec.output(p)).transpose()?;
    let card = emit_claim_card(&bound, &results, &verdict);
    std::fs::write(&out, card.to_json()? + "\n").with_context(|| format!("writing {}", out.display()))?;
    match text_out {
        Some(p) => std::fs::write(&p, card.to_text()).with_context(|| format!("writing {}", p.display()))?,
        None => emit(&card.to_text())?,
    }
    if let Some(p) = record_out {
        let json = emit_reduction_record(&ReductionRecord::markov_temperature())?;
        std::fs::write(&p, json + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

pub fn sweep(a: &SweepEntropyArgs, seed: u64, rec: &mut Recorder) -> anyhow::Result<()> {
    let out_dir = need(&a.out_dir, "out_dir")?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    rec.default_manifest = Some(out_dir.join("manifest.json"));
    let hist_path = rec.output(out_dir.join("histogram.csv"))?;
    let cdf_path = rec.output(out_dir.join("cdf.csv"))?;
    let summary_path = rec.output(out_dir.join("summary.json"))?;
    let best_path = a.best_chain.as_ref().map(|p| rec.output(p)).transpose()?;
    let config = SweepConfig {
        m: a.m,
        alphas: a.alphas.clone(),
        num_candidates: a.candidates,
        target_entropy: a.target_entropy,
        seed,
    };
    let sweep = sweep_entropy(&config)?;
    rec.seeds.push(seed);

    let mut w = csv::Writer::from_writer(create(&hist_path)?);
    w.write_record(["alpha", "bin_low", "bin_high", "count"])?;
    for r in sweep.histogram(a.bins) {
        w.write_record([r.alpha.to_string(), r.bin_low.to_string(), r.bin_high.to_string(), r.count.to_string()])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(create(&cdf_path)?);
    w.write_record(["alpha", "entropy", "cdf"])?;
    for (alpha, h, c) in sweep.cdf() {
        w.write_record([alpha.to_string(), h.to_string(), c.to_string()])?;
    }
    w.flush()?;

    let per_alpha: Vec<_> = sweep
        .per_alpha
        .iter()
        .map(|s| {
            let v = s.values();
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            json!({
                "alpha": s.alpha,
                "converged": v.len(),
                "skipped": s.skipped.len(),
                "mean": mean,
                "sd": var.sqrt(),
                "min": v.iter().copied().fold(f64::INFINITY, f64::min),
                "max": v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect();
    let best = sweep.best();
    write_json(
        &summary_path,
        &json!({
            "config": config,
            "best": best,
            "per_alpha": per_alpha,
            "shifts": sweep.shifts(),
        }),
    )?;
    if let Some(b) = &best {
        println!(
            "best: α={} candidate {} H={:.6} (|gap| {:.2e})",
            b.alpha,
            b.candidate_index,
            b.entropy,
            (b.entropy - a.target_entropy).abs()
        );
    }
    if let Some(p) = best_path {
        let b = best.ok_or_else(|| dataprobe::Error::Generation("no candidate converged".into()))?;
        let probe = sweep.best_probe()?;
        let spec = ProbeGenSpec {
            m: a.m,
            alpha: b.alpha,
            target_entropy: a.target_entropy,
            num_candidates: a.candidates,
            seed,
        };
        ChainFile::from_probe(&spec, &probe).save(&p)?;
    }
    Ok(())
}

