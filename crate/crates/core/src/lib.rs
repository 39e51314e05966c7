//! Measure-many one-way quantum finite automata.
//!
//! The crate simulates MM-QFAs (unitary step per letter followed by an
//! accept/reject/continue measurement), provides a small DFA engine used as
//! a language oracle, builds the two-thirds automata for the languages
//! `L2`/`L3` together with complement and probabilistic-union constructions,
//! and computes the decomposition of the non-halting space into the part on
//! which the automaton evolves unitarily and the part that leaks amplitude.
//!
//! ```
//! use qfa_lab::constructions::build_k2;
//!
//! let k2 = build_k2();
//! let trace = k2.run_str("ba").unwrap();
//! assert!((trace.accepted - 2.0 / 3.0).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod constructions;
pub mod dfa;
pub mod error;
pub mod io;
pub mod linalg;
pub mod qfa;
pub mod random;
pub mod report;
pub mod word;

pub use error::{Error, Result};

/// Default tolerance for probability comparisons and unitarity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
