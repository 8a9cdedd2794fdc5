//! Synthetic token sequences from Markov chains with a chosen entropy rate,
//! evaluation of sequence models against the known law, and a protocol for
//! checking directional claims about knob interventions.
//!
//! ```
//! use dataprobe::markov::{select_probe, ProbeGenSpec};
//!
//! let spec = ProbeGenSpec { m: 16, alpha: 0.5, target_entropy: 2.0, num_candidates: 8, seed: 7 };
//! let probe = select_probe(&spec).unwrap();
//! assert!(probe.achieved_entropy <= 4.0);
//! ```

pub mod corpus;
pub mod error;
pub mod markov;
pub mod model;
pub mod protocol;
pub mod rng;
pub mod stats;
pub mod typical;

pub use error::{Error, ErrorCategory, Result};
