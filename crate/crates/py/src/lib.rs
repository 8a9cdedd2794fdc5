//! Python bindings: chain generation, sampling, NLL scoring, reference
//! models, decoding, regime classification and the claim protocol.
//!
//! Structured results (contrasts, verdicts, criteria) cross the boundary as
//! plain dicts decoded from their JSON form.

use std::path::PathBuf;
use std::sync::Arc;

use dataprobe::markov::{
    entropy_rate, sample_corpus, select_probe, sequence_nll, shannon_entropy_bits, ChainFile, NllMode, ProbeGenSpec,
    StationaryDistribution, TokenSequence, TransitionMatrix,
};
use dataprobe::model::{self, decode_batch, wrap_chain_as_model, Decoding, DecodingConfig, SequenceModel};
use dataprobe::protocol::experiment::{ingest_real, read_real_rows, ExperimentSpec};
use dataprobe::protocol::{check_criteria, run_probe_contrast, ClaimVerdict, ContrastResult, DEFAULT_SMOKE_SAMPLES};
use dataprobe::typical;
use dataprobe::{Error, ErrorCategory};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(dataprobe_py, ConvergenceError, PyRuntimeError);
create_exception!(dataprobe_py, ContrastError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e.category() {
        ErrorCategory::Convergence => ConvergenceError::new_err(e.to_string()),
        ErrorCategory::Contrast => ContrastError::new_err(e.to_string()),
        ErrorCategory::Io => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for dataprobe::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Serializable value -> Python object via `json.loads`.
fn to_object<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn sequences(tokens: Vec<Vec<u32>>) -> PyResult<Vec<TokenSequence>> {
    tokens.into_iter().map(|t| TokenSequence::new(t).py()).collect()
}

fn token_lists(seqs: Vec<TokenSequence>) -> Vec<Vec<u32>> {
    seqs.into_iter().map(TokenSequence::into_tokens).collect()
}

fn nll_mode(mode: &str) -> PyResult<NllMode> {
    mode.parse().py()
}

/// `None` means greedy.
fn decoding_config(temperature: Option<f64>, max_new_tokens: usize, seed: u64) -> DecodingConfig {
    DecodingConfig {
        decoding: temperature.map_or(Decoding::Greedy, |temperature| Decoding::Sampling { temperature }),
        max_new_tokens,
        seed,
    }
}

fn run_decode(
    py: Python<'_>,
    model: &dyn SequenceModel,
    prompts: Vec<Vec<u32>>,
    temperature: Option<f64>,
    max_new_tokens: usize,
    seed: u64,
) -> PyResult<Vec<Vec<u32>>> {
    let prompts = sequences(prompts)?;
    let cfg = decoding_config(temperature, max_new_tokens, seed);
    let out = py.detach(|| decode_batch(model, &prompts, &cfg)).py()?;
    Ok(token_lists(out))
}

/// A finite ergodic Markov chain with its stationary distribution.
#[pyclass(module = "dataprobe_py", frozen)]
pub struct MarkovChain {
    file: ChainFile,
    matrix: TransitionMatrix,
    stationary: StationaryDistribution,
    candidate_index: Option<usize>,
    skipped: Vec<usize>,
}

impl MarkovChain {
    fn from_file(file: ChainFile) -> PyResult<Self> {
        let (matrix, stationary) = file.chain().py()?;
        Ok(Self {
            file,
            matrix,
            stationary,
            candidate_index: None,
            skipped: Vec::new(),
        })
    }
}

#[pymethods]
impl MarkovChain {
    /// Best of `num_candidates` Dirichlet(alpha) chains by distance of the
    /// entropy rate to `target_entropy` (bits/token).
    #[staticmethod]
    #[pyo3(signature = (m, alpha, target_entropy, num_candidates = 200, seed = 0))]
    fn generate(
        py: Python<'_>,
        m: usize,
        alpha: f64,
        target_entropy: f64,
        num_candidates: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let spec = ProbeGenSpec {
            m,
            alpha,
            target_entropy,
            num_candidates,
            seed,
        };
        let probe = py.detach(|| select_probe(&spec)).py()?;
        let file = ChainFile::from_probe(&spec, &probe);
        Ok(Self {
            file,
            matrix: probe.matrix,
            stationary: probe.stationary,
            candidate_index: Some(probe.candidate_index),
            skipped: probe.skipped,
        })
    }

    /// Chain from explicit rows; the stationary distribution is solved.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let matrix = TransitionMatrix::from_rows(rows).py()?;
        let stationary = StationaryDistribution::solve(&matrix).py()?;
        let h = entropy_rate(&matrix, &stationary).py()?;
        let file = ChainFile {
            m: matrix.size(),
            // not drawn from a Dirichlet
            alpha: 0.0,
            seed: 0,
            target_entropy: h,
            achieved_entropy: h,
            transition_matrix: matrix.to_rows(),
            stationary: stationary.probabilities().to_vec(),
        };
        Ok(Self {
            file,
            matrix,
            stationary,
            candidate_index: None,
            skipped: Vec::new(),
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Self::from_file(ChainFile::load(path).py()?)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.file.save(path).py()
    }

    #[getter]
    fn m(&self) -> usize {
        self.matrix.size()
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<f64>> {
        self.matrix.to_rows()
    }

    #[getter]
    fn stationary(&self) -> Vec<f64> {
        self.stationary.probabilities().to_vec()
    }

    #[getter]
    fn entropy_rate(&self) -> PyResult<f64> {
        entropy_rate(&self.matrix, &self.stationary).py()
    }

    #[getter]
    fn candidate_index(&self) -> Option<usize> {
        self.candidate_index
    }

    #[getter]
    fn skipped(&self) -> Vec<usize> {
        self.skipped.clone()
    }

    fn stationary_residual(&self) -> f64 {
        self.stationary.residual(&self.matrix)
    }

    /// `count` sequences of length `n`; sequence `i` uses sub-stream `i`.
    #[pyo3(signature = (n, count, seed = 0))]
    fn sample(&self, py: Python<'_>, n: usize, count: usize, seed: u64) -> PyResult<Vec<Vec<u32>>> {
        let out = py
            .detach(|| sample_corpus(&self.matrix, &self.stationary, n, count, seed))
            .py()?;
        Ok(token_lists(out))
    }

    /// Average NLL in bits/token; `inf` for off-support sequences.
    #[pyo3(signature = (tokens, mode = "conditional"))]
    fn nll(&self, tokens: Vec<u32>, mode: &str) -> PyResult<f64> {
        let x = TokenSequence::new(tokens).py()?;
        sequence_nll(&self.matrix, &self.stationary, &x, nll_mode(mode)?).py()
    }

    #[pyo3(signature = (corpus, mode = "conditional"))]
    fn nll_batch(&self, corpus: Vec<Vec<u32>>, mode: &str) -> PyResult<Vec<f64>> {
        let mode = nll_mode(mode)?;
        sequences(corpus)?
            .iter()
            .map(|x| sequence_nll(&self.matrix, &self.stationary, x, mode).py())
            .collect()
    }

    /// Decodes with the chain itself as the model. `temperature=None` is greedy.
    #[pyo3(signature = (prompts, temperature = None, max_new_tokens = 127, seed = 0))]
    fn decode(
        &self,
        py: Python<'_>,
        prompts: Vec<Vec<u32>>,
        temperature: Option<f64>,
        max_new_tokens: usize,
        seed: u64,
    ) -> PyResult<Vec<Vec<u32>>> {
        let model = wrap_chain_as_model(self.matrix.clone());
        run_decode(py, &model, prompts, temperature, max_new_tokens, seed)
    }

    fn to_json(&self) -> PyResult<String> {
        self.file.to_json().py()
    }

    fn __repr__(&self) -> String {
        format!(
            "MarkovChain(m={}, entropy_rate={:.6})",
            self.matrix.size(),
            entropy_rate(&self.matrix, &self.stationary).unwrap_or(f64::NAN)
        )
    }
}

/// Add-λ smoothed k-gram reference model.
#[pyclass(module = "dataprobe_py", frozen)]
pub struct NGramModel {
    inner: Arc<model::NGramModel>,
}

#[pymethods]
impl NGramModel {
    #[staticmethod]
    #[pyo3(signature = (corpus, m, k = 1, lam = 0.5))]
    fn fit(corpus: Vec<Vec<u32>>, m: usize, k: usize, lam: f64) -> PyResult<Self> {
        let corpus = sequences(corpus)?;
        Ok(Self {
            inner: Arc::new(model::fit(&corpus, m, k, lam).py()?),
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(model::NGramModel::load(path).py()?),
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).py()
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.inner.vocab_size()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    fn num_contexts(&self) -> usize {
        self.inner.num_contexts()
    }

    fn next_token_distribution(&self, context: Vec<u32>) -> Vec<f64> {
        self.inner.next_token_distribution(&context)
    }

    /// `temperature=None` is greedy; prompt `i` uses sub-stream `i` of `seed`.
    #[pyo3(signature = (prompts, temperature = None, max_new_tokens = 127, seed = 0))]
    fn decode(
        &self,
        py: Python<'_>,
        prompts: Vec<Vec<u32>>,
        temperature: Option<f64>,
        max_new_tokens: usize,
        seed: u64,
    ) -> PyResult<Vec<Vec<u32>>> {
        run_decode(py, self.inner.as_ref(), prompts, temperature, max_new_tokens, seed)
    }

    fn __repr__(&self) -> String {
        format!(
            "NGramModel(k={}, lam={}, vocab_size={})",
            self.inner.order(),
            self.inner.lambda(),
            self.inner.vocab_size()
        )
    }
}

/// Closed band `[H - eps, H + eps]` on average NLL.
#[pyclass(module = "dataprobe_py", frozen)]
pub struct TypicalSetBand {
    inner: typical::TypicalSetBand,
}

#[pymethods]
impl TypicalSetBand {
    #[new]
    #[pyo3(signature = (entropy_rate, epsilon = typical::DEFAULT_EPSILON, n = 0))]
    fn new(entropy_rate: f64, epsilon: f64, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: typical::TypicalSetBand::new(entropy_rate, epsilon, n).py()?,
        })
    }

    #[getter]
    fn lower(&self) -> f64 {
        self.inner.lower()
    }

    #[getter]
    fn upper(&self) -> f64 {
        self.inner.upper()
    }

    /// `"over_conservative"`, `"typical"` or `"uncertain"`.
    fn classify(&self, avg_nll: f64) -> PyResult<&'static str> {
        Ok(typical::classify(avg_nll, &self.inner).py()?.as_str())
    }

    /// Regime counts, finite mean, off-support fraction and the empirical CDF.
    fn summarize(&self, py: Python<'_>, nlls: Vec<f64>) -> PyResult<Py<PyAny>> {
        let s = typical::summarize(&nlls, &self.inner).py()?;
        let value = serde_json::json!({
            "count": s.nlls.len(),
            "regime_counts": s.regime_counts,
            "regime_score": s.regime_counts.mean_score(),
            "finite_mean": s.finite_mean(),
            "off_support_fraction": s.infinite_fraction(),
            "cdf": s.cdf,
        });
        to_object(py, &value)
    }

    fn __repr__(&self) -> String {
        format!("TypicalSetBand(lower={}, upper={})", self.inner.lower(), self.inner.upper())
    }
}

#[pyfunction]
fn apply_temperature(p: Vec<f64>, temperature: f64) -> PyResult<Vec<f64>> {
    model::apply_temperature(&p, temperature).py()
}

#[pyfunction]
fn entropy_bits(p: Vec<f64>) -> f64 {
    shannon_entropy_bits(&p)
}

/// `"transfer_supported"`, `"probe_local"`, `"rejected"` or `"pending"`.
#[pyfunction]
#[pyo3(signature = (iv, ev = None))]
fn transfer_decision(py: Python<'_>, iv: bool, ev: Option<bool>) -> PyResult<Py<PyAny>> {
    to_object(py, &dataprobe::protocol::transfer_decision(iv, ev))
}

fn load_spec(path: PathBuf) -> PyResult<(ExperimentSpec, PathBuf)> {
    ExperimentSpec::load(path).py()
}

/// Probe-construction checks C1-C4 for an experiment spec file.
#[pyfunction]
#[pyo3(signature = (spec, seed = 0))]
fn check_spec(py: Python<'_>, spec: PathBuf, seed: u64) -> PyResult<Py<PyAny>> {
    let (spec, base) = load_spec(spec)?;
    let probe = spec.build(&base).py()?;
    let report = py.detach(|| check_criteria(&probe, DEFAULT_SMOKE_SAMPLES, seed));
    to_object(py, &report)
}

/// Probe-side contrast of one claim of an experiment spec file.
#[pyfunction]
#[pyo3(signature = (spec, claim = None))]
fn run_claim(py: Python<'_>, spec: PathBuf, claim: Option<&str>) -> PyResult<Py<PyAny>> {
    let (spec, base) = load_spec(spec)?;
    let id = spec.claim(claim).py()?.claim.id.clone();
    let probe = spec.build(&base).py()?;
    let result = py.detach(|| run_probe_contrast(&probe, &id, &spec.contrast)).py()?;
    to_object(py, &result)
}

/// Real-side contrast from a CSV with columns `arm,seed,diagnostic_value`.
#[pyfunction]
#[pyo3(signature = (spec, csv, claim = None))]
fn ingest_real_csv(py: Python<'_>, spec: PathBuf, csv: PathBuf, claim: Option<&str>) -> PyResult<Py<PyAny>> {
    let (spec, _) = load_spec(spec)?;
    let bound = spec.claim(claim).py()?;
    let file = std::fs::File::open(&csv).map_err(|e| PyOSError::new_err(format!("{}: {e}", csv.display())))?;
    let rows = read_real_rows(file).py()?;
    let result =
        ingest_real(&rows, bound, spec.contrast.permutations, spec.contrast.bootstrap_resamples).py()?;
    to_object(py, &result)
}

fn contrast_from(py: Python<'_>, value: &Bound<'_, PyAny>) -> PyResult<ContrastResult> {
    let text: String = py.import("json")?.call_method1("dumps", (value,))?.extract()?;
    let r: ContrastResult = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    r.validate().py()?;
    Ok(r)
}

/// IV, EV and transfer status from contrast dicts as returned by
/// [`run_claim`] and [`ingest_real_csv`].
#[pyfunction]
#[pyo3(signature = (spec, probe, real = None, claim = None))]
fn verdict(
    py: Python<'_>,
    spec: PathBuf,
    probe: &Bound<'_, PyAny>,
    real: Option<&Bound<'_, PyAny>>,
    claim: Option<&str>,
) -> PyResult<Py<PyAny>> {
    let (spec, _) = load_spec(spec)?;
    let bound = spec.claim(claim).py()?;
    let probe = contrast_from(py, probe)?;
    let real = real.map(|r| contrast_from(py, r)).transpose()?;
    let v = ClaimVerdict::evaluate(&bound.claim.id, &bound.binding, &probe, real.as_ref()).py()?;
    to_object(py, &v)
}

#[pymodule]
fn dataprobe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MarkovChain>()?;
    m.add_class::<NGramModel>()?;
    m.add_class::<TypicalSetBand>()?;
    m.add_function(wrap_pyfunction!(apply_temperature, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_bits, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_decision, m)?)?;
    m.add_function(wrap_pyfunction!(check_spec, m)?)?;
    m.add_function(wrap_pyfunction!(run_claim, m)?)?;
    m.add_function(wrap_pyfunction!(ingest_real_csv, m)?)?;
    m.add_function(wrap_pyfunction!(verdict, m)?)?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add("ContrastError", m.py().get_type::<ContrastError>())?;
    Ok(())
}
