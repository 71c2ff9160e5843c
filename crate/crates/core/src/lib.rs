//! Random k-CNF workbench: instance distributions, the sample-and-test
//! solver, Hamming-ball searches, and exhaustive oracles for checking the
//! solver's closed-form predictions at small `n`.
//!
//! Module map:
//!
//! - [`cnf`], [`dimacs`]: data model and file format.
//! - [`rng`], [`distributions`]: seeded samplers and the threshold model.
//! - [`search`]: branching and exhaustive ball searches, small-k fallback.
//! - [`solver`]: the sample-and-test solver and its cost model.
//! - [`oracle`], [`analysis`]: brute-force ground truth and closed forms.
//! - [`validate`], [`bench`]: named validation suites and benchmark sweeps.

pub mod analysis;
pub mod bench;
pub mod cnf;
pub mod combinatorics;
pub mod dimacs;
pub mod distributions;
pub mod error;
pub mod oracle;
pub mod rng;
pub mod search;
pub mod solver;
pub mod stats;
pub mod validate;

pub use cnf::{
    eval_clause, hamming_distance, num_clauses_sat, num_clauses_unsat, Assignment, Clause, Formula,
    Literal,
};
pub use error::{Error, Result};
pub use rng::RandomStream;
pub use solver::{alpha_sample_and_test, Outcome, ParamOverrides, SolveResult, SolverParams};
