//! Programs, configurations and the single-step semantics shared by every
//! machine variant.
//!
//! A program is a finite list of lines. Each line holds one or more weighted
//! instructions: a deterministic machine has exactly one per line, a
//! non-deterministic machine branches over all of them, and a probabilistic
//! machine draws one according to the weights.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Weight;

pub type RegisterIndex = usize;
pub type RegisterValue = u64;

/// Sparse register contents; absent registers hold 0.
pub type Registers = BTreeMap<RegisterIndex, RegisterValue>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Instruction {
    /// Increment the register and advance the counter.
    Inc(RegisterIndex),
    /// If the register is positive, decrement it and jump to the target line;
    /// otherwise advance the counter.
    Dec(RegisterIndex, usize),
}

impl Instruction {
    pub fn register(&self) -> RegisterIndex {
        match *self {
            Instruction::Inc(r) | Instruction::Dec(r, _) => r,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Inc(r) => write!(f, "INC {r}"),
            Instruction::Dec(r, target) => write!(f, "DEC {r},{target}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Choice<W = BigRational> {
    pub instruction: Instruction,
    pub weight: W,
}

/// One program line: a non-empty list of weighted alternatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramLine<W = BigRational> {
    choices: Vec<Choice<W>>,
}

impl<W: Weight> ProgramLine<W> {
    /// Builds a line; fails with [`Error::EmptyLine`] when `choices` is empty.
    pub fn new(choices: Vec<(Instruction, W)>) -> Result<Self> {
        if choices.is_empty() {
            return Err(Error::EmptyLine);
        }
        Ok(Self {
            choices: choices
                .into_iter()
                .map(|(instruction, weight)| Choice { instruction, weight })
                .collect(),
        })
    }

    /// A single instruction carrying weight one.
    pub fn single(instruction: Instruction) -> Self {
        Self {
            choices: vec![Choice {
                instruction,
                weight: W::one(),
            }],
        }
    }

    /// Alternatives with uniform weights `1/m`.
    pub fn uniform(instructions: Vec<Instruction>) -> Result<Self> {
        let m = instructions.len() as u64;
        Self::new(
            instructions
                .into_iter()
                .map(|i| (i, W::from_ratio(1, m.max(1))))
                .collect(),
        )
    }

    pub fn choices(&self) -> &[Choice<W>] {
        &self.choices
    }

    pub fn width(&self) -> usize {
        self.choices.len()
    }

    pub fn instruction(&self, choice: usize) -> Option<Instruction> {
        self.choices.get(choice).map(|c| c.instruction)
    }

    pub fn weights(&self) -> Vec<&W> {
        self.choices.iter().map(|c| &c.weight).collect()
    }

    pub fn is_distribution(&self) -> bool {
        W::is_distribution(self.choices.iter().map(|c| &c.weight))
    }

    pub fn map_weights<V: Weight>(&self, f: impl Fn(&W) -> V) -> ProgramLine<V> {
        ProgramLine {
            choices: self
                .choices
                .iter()
                .map(|c| Choice {
                    instruction: c.instruction,
                    weight: f(&c.weight),
                })
                .collect(),
        }
    }
}

/// An immutable, finite program indexed from 0.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program<W = BigRational> {
    lines: Vec<ProgramLine<W>>,
}

impl<W: Weight> Program<W> {
    pub fn new(lines: Vec<ProgramLine<W>>) -> Self {
        Self { lines }
    }

    /// A deterministic program, one instruction per line.
    pub fn deterministic(instructions: impl IntoIterator<Item = Instruction>) -> Self {
        Self::new(instructions.into_iter().map(ProgramLine::single).collect())
    }

    pub fn lines(&self) -> &[ProgramLine<W>] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn line(&self, index: usize) -> Option<&ProgramLine<W>> {
        self.lines.get(index)
    }

    pub fn max_width(&self) -> usize {
        self.lines.iter().map(ProgramLine::width).max().unwrap_or(0)
    }

    pub fn is_deterministic(&self) -> bool {
        self.lines.iter().all(|l| l.width() == 1)
    }

    /// Fails with [`Error::NotDeterministic`] naming the first branching line.
    pub fn ensure_deterministic(&self) -> Result<()> {
        match self.lines.iter().position(|l| l.width() != 1) {
            None => Ok(()),
            Some(line) => Err(Error::NotDeterministic {
                line,
                choices: self.lines[line].width(),
            }),
        }
    }

    /// Fails with [`Error::Weight`] naming the first line whose weights are
    /// not a probability distribution.
    pub fn ensure_distribution(&self) -> Result<()> {
        match self.lines.iter().position(|l| !l.is_distribution()) {
            None => Ok(()),
            Some(line) => {
                let sum = self.lines[line]
                    .choices
                    .iter()
                    .fold(W::zero(), |acc, c| acc + c.weight.clone());
                Err(Error::Weight {
                    line,
                    sum: sum.to_string(),
                })
            }
        }
    }

    pub fn map_weights<V: Weight>(&self, f: impl Fn(&W) -> V) -> Program<V> {
        Program {
            lines: self.lines.iter().map(|l| l.map_weights(&f)).collect(),
        }
    }

    /// The same program carrying `f64` weights.
    pub fn to_float(&self) -> Program<f64> {
        self.map_weights(Weight::to_f64)
    }
}

/// Register contents plus the instruction counter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Configuration {
    registers: Registers,
    counter: usize,
}

impl Configuration {
    /// Zero-valued entries are dropped so that equal machine states compare
    /// equal.
    pub fn new(registers: Registers, counter: usize) -> Self {
        let registers = registers.into_iter().filter(|&(_, v)| v != 0).collect();
        Self { registers, counter }
    }

    /// The initial configuration for the given inputs: counter at 0.
    pub fn initial(inputs: &Registers) -> Self {
        Self::new(inputs.clone(), 0)
    }

    pub fn register(&self, index: RegisterIndex) -> RegisterValue {
        self.registers.get(&index).copied().unwrap_or(0)
    }

    /// Non-zero registers only.
    pub fn registers(&self) -> &Registers {
        &self.registers
    }

    pub fn counter(&self) -> usize {
        self.counter
    }

    pub fn is_halted<W>(&self, program: &Program<W>) -> bool {
        self.counter >= program.lines.len()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (r, v)) in self.registers.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "R{r}={v}")?;
        }
        write!(f, "] | {}", self.counter)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Continues(Configuration),
    Halted(Configuration),
}

impl StepOutcome {
    pub fn configuration(&self) -> &Configuration {
        match self {
            StepOutcome::Continues(c) | StepOutcome::Halted(c) => c,
        }
    }

    pub fn into_configuration(self) -> Configuration {
        match self {
            StepOutcome::Continues(c) | StepOutcome::Halted(c) => c,
        }
    }
}

/// Applies one instruction to a configuration.
pub fn apply_instruction(config: &Configuration, instruction: Instruction) -> Configuration {
    let mut next = config.clone();
    match instruction {
        Instruction::Inc(r) => {
            *next.registers.entry(r).or_insert(0) += 1;
            next.counter += 1;
        }
        Instruction::Dec(r, target) => match next.registers.get_mut(&r) {
            Some(value) => {
                *value -= 1;
                if *value == 0 {
                    next.registers.remove(&r);
                }
                next.counter = target;
            }
            None => next.counter += 1,
        },
    }
    next
}

/// Executes the line addressed by the counter, taking alternative `choice`.
pub fn step<W: Weight>(program: &Program<W>, config: &Configuration, choice: usize) -> Result<StepOutcome> {
    let Some(line) = program.line(config.counter) else {
        return Ok(StepOutcome::Halted(config.clone()));
    };
    let instruction = line.instruction(choice).ok_or(Error::ChoiceOutOfRange {
        line: config.counter,
        choice,
        available: line.width(),
    })?;
    Ok(StepOutcome::Continues(apply_instruction(config, instruction)))
}

/// How a halted configuration is judged.
///
/// A halted configuration accepts when the designated register is positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub struct AcceptancePolicy {
    pub accept_register: RegisterIndex,
}

impl AcceptancePolicy {
    pub fn new(accept_register: RegisterIndex) -> Self {
        Self { accept_register }
    }

    pub fn evaluate(&self, config: &Configuration, halted: bool) -> Acceptance {
        evaluate_acceptance(config, self, halted)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Acceptance {
    Accept,
    Reject,
    NotHalted,
}

pub fn evaluate_acceptance(config: &Configuration, policy: &AcceptancePolicy, halted: bool) -> Acceptance {
    if !halted {
        Acceptance::NotHalted
    } else if config.register(policy.accept_register) > 0 {
        Acceptance::Accept
    } else {
        Acceptance::Reject
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunResult {
    Halted { last: Configuration, steps: u64 },
    FuelExhausted { last: Configuration, steps: u64 },
}

impl RunResult {
    pub fn configuration(&self) -> &Configuration {
        match self {
            RunResult::Halted { last, .. } | RunResult::FuelExhausted { last, .. } => last,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            RunResult::Halted { steps, .. } | RunResult::FuelExhausted { steps, .. } => *steps,
        }
    }

    pub fn is_halted(&self) -> bool {
        matches!(self, RunResult::Halted { .. })
    }
}

/// Runs a deterministic program from `inputs` for at most `fuel` steps.
pub fn run_deterministic<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    fuel: u64,
) -> Result<RunResult> {
    run_deterministic_with(program, inputs, fuel, |_| {})
}

/// Like [`run_deterministic`], calling `observe` on every configuration of
/// the chain, the initial one included.
pub fn run_deterministic_with<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    fuel: u64,
    mut observe: impl FnMut(&Configuration),
) -> Result<RunResult> {
    program.ensure_deterministic()?;
    let mut config = Configuration::initial(inputs);
    let mut steps = 0;
    observe(&config);
    loop {
        if config.is_halted(program) {
            return Ok(RunResult::Halted { last: config, steps });
        }
        if steps == fuel {
            return Ok(RunResult::FuelExhausted { last: config, steps });
        }
        config = step(program, &config, 0)?.into_configuration();
        steps += 1;
        observe(&config);
    }
}
