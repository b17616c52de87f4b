//! Seeded generators of random programs and inputs for property tests.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::machine::{Instruction, Program, ProgramLine, Registers};
use crate::parser::Mode;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorParams {
    pub line_count: RangeInclusive<usize>,
    /// Ignored (treated as 1) in deterministic mode.
    pub max_choices_per_line: usize,
    /// Registers are drawn from `0..register_span`.
    pub register_span: usize,
    /// Jump targets are drawn from `0..line_count + jump_span`; targets past
    /// the end halt.
    pub jump_span: usize,
    pub mode: Mode,
    /// Upper bound on the denominator of probabilistic weights.
    pub weight_denominator_bound: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            line_count: 1..=8,
            max_choices_per_line: 3,
            register_span: 4,
            jump_span: 2,
            mode: Mode::Probabilistic,
            weight_denominator_bound: 12,
        }
    }
}

impl GeneratorParams {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    fn effective_width(&self) -> usize {
        match self.mode {
            Mode::Deterministic => 1,
            _ => self.max_choices_per_line,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.into()));
        if self.line_count.start() > self.line_count.end() {
            return bad("line_count range is empty");
        }
        if self.max_choices_per_line == 0 {
            return bad("max_choices_per_line must be at least 1");
        }
        if self.register_span == 0 {
            return bad("register_span must be at least 1");
        }
        if self.mode == Mode::Probabilistic && self.weight_denominator_bound < self.effective_width() as u64 {
            return bad("weight_denominator_bound must be at least max_choices_per_line");
        }
        Ok(())
    }
}

/// A random program; equal `(params, seed)` give equal programs.
pub fn generate_program(params: &GeneratorParams, seed: u64) -> Result<Program> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lines = rng.random_range(params.line_count.clone());
    let targets = lines + params.jump_span;
    let width = params.effective_width();
    let program = (0..lines)
        .map(|_| {
            let m = rng.random_range(1..=width);
            let instructions: Vec<Instruction> = (0..m)
                .map(|_| {
                    let register = rng.random_range(0..params.register_span);
                    if rng.random_bool(0.5) {
                        Instruction::Inc(register)
                    } else {
                        Instruction::Dec(register, rng.random_range(0..targets))
                    }
                })
                .collect();
            match params.mode {
                Mode::Probabilistic if m > 1 => {
                    let cap = (params.weight_denominator_bound / m as u64).max(1);
                    let raw: Vec<u64> = (0..m).map(|_| rng.random_range(1..=cap)).collect();
                    let total: u64 = raw.iter().sum();
                    ProgramLine::new(
                        instructions
                            .into_iter()
                            .zip(raw)
                            .map(|(i, w)| (i, Rational::new(w.into(), total.into())))
                            .collect(),
                    )
                }
                _ => ProgramLine::uniform(instructions),
            }
            .expect("at least one instruction")
        })
        .collect();
    Ok(Program::new(program))
}

/// Random inputs over registers `0..register_span` with values up to
/// `value_bound`; zero draws are left out.
pub fn generate_inputs(register_span: usize, value_bound: u64, seed: u64) -> Registers {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..register_span)
        .map(|r| (r, rng.random_range(0..=value_bound)))
        .filter(|&(_, v)| v != 0)
        .collect()
}
