//! Markov-chain probes: Dirichlet chain generation with a targeted entropy
//! rate, sampling, and scoring under the known law.

mod dirichlet;
mod entropy;
pub mod file;
mod matrix;
mod select;
mod sequence;
mod sweep;

pub use dirichlet::{sample_transition_matrix, SymmetricDirichlet};
pub use entropy::{entropy_rate, shannon_entropy_bits};
pub use file::ChainFile;
pub use matrix::{
    stationary_distribution, StationaryDistribution, TransitionMatrix, DEFAULT_POWER_TOLERANCE,
    ROW_SUM_TOLERANCE, STATIONARY_RESIDUAL_BOUND,
};
pub use select::{select_probe, ProbeGenSpec, SelectedProbe};
pub use sequence::{
    sample_corpus, sample_sequence, sequence_nll, NllMode, Token, TokenSequence,
};
pub use sweep::{
    sweep_entropy, AlphaShift, AlphaSweep, BestCandidate, EntropySweep, HistogramRow, SweepConfig,
};
