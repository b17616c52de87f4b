//! Shoenfield register machines in deterministic, non-deterministic and
//! probabilistic flavours.
//!
//! All three share one [`Program`] representation: a list of lines, each a
//! weighted list of `INC`/`DEC` instructions. The weight scalar is generic
//! (see [`Weight`]); the aliases below fix it to exact big rationals, which
//! is what the text format, the CLI and every exactness guarantee use.
//!
//! - [`machine`]: configurations and single-step semantics.
//! - [`parser`]: the `.shm` text format.
//! - [`nsm`]: computation trees, halting and acceptance search, traces.
//! - [`psm`]: sampling, exact and estimated acceptance, bounded-error decisions.
//! - [`testkit`]: seeded random programs for property tests.

pub mod error;
pub mod machine;
pub mod nsm;
pub mod parser;
pub mod psm;
pub mod scalar;
pub mod testkit;
pub mod trace;

pub use error::{Error, Result};
pub use machine::{
    apply_instruction, evaluate_acceptance, run_deterministic, run_deterministic_with, step, Acceptance,
    AcceptancePolicy, Choice, Configuration, Instruction, Program, ProgramLine, Registers, RunResult,
    StepOutcome,
};
pub use parser::{format_program, parse_program, Mode, ParseError, SourceProgram};
pub use scalar::Weight;
pub use trace::{replay_trace, Trace, TraceStep};

/// Exact weight type.
pub type Rational = num_rational::BigRational;

pub type ExactProgram = Program<Rational>;
pub type ExactLine = ProgramLine<Rational>;
pub type ExactInterval = psm::ProbabilityInterval<Rational>;
pub type ExactPath = psm::PathResult<Rational>;
pub type ExactDecision = psm::Decision<Rational>;
pub type ExactTree = nsm::ComputationTree<Rational>;

pub type FloatProgram = Program<f64>;
pub type FloatInterval = psm::ProbabilityInterval<f64>;
pub type FloatPath = psm::PathResult<f64>;
