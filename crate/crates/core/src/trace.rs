//! Recorded computation paths and their deterministic replay.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::{apply_instruction, Configuration, Instruction, Program, Registers};
use crate::scalar::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TraceStep {
    /// Counter value when the step ran.
    pub line: usize,
    pub choice: usize,
    pub instruction: Instruction,
}

/// The executed `(line, choice, instruction)` sequence of one path.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn new(steps: Vec<TraceStep>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: TraceStep) {
        self.steps.push(step);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TraceStep> {
        self.steps.iter()
    }
}

impl FromIterator<TraceStep> for Trace {
    fn from_iter<I: IntoIterator<Item = TraceStep>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Re-executes a trace from `inputs`, checking every recorded step against
/// the live counter and the program before applying it.
///
/// Fails with [`Error::TraceMismatch`] at the first disagreeing step.
pub fn replay_trace<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    trace: &Trace,
) -> Result<Configuration> {
    let mut config = Configuration::initial(inputs);
    for (index, step) in trace.iter().enumerate() {
        let recorded = program
            .line(step.line)
            .filter(|_| step.line == config.counter())
            .and_then(|line| line.instruction(step.choice));
        if recorded != Some(step.instruction) {
            return Err(Error::TraceMismatch { step: index });
        }
        config = apply_instruction(&config, step.instruction);
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use Instruction::{Dec, Inc};

    #[test]
    fn empty_trace_is_identity() {
        let inputs: Registers = [(1, 5)].into_iter().collect();
        let p = Program::<Rational>::deterministic([Inc(0)]);
        let end = replay_trace(&p, &inputs, &Trace::default()).unwrap();
        assert_eq!(end, Configuration::new(inputs, 0));
    }

    #[test]
    fn disagreeing_instruction_is_a_mismatch() {
        let p = Program::<Rational>::deterministic([Dec(1, 0)]);
        let trace = Trace::new(vec![TraceStep {
            line: 0,
            choice: 0,
            instruction: Inc(1),
        }]);
        assert_eq!(
            replay_trace(&p, &Registers::new(), &trace).unwrap_err(),
            Error::TraceMismatch { step: 0 }
        );
    }

    #[test]
    fn wrong_line_or_choice_is_a_mismatch() {
        let p = Program::<Rational>::deterministic([Inc(0), Inc(1)]);
        let step = |line, choice, instruction| TraceStep {
            line,
            choice,
            instruction,
        };
        let skip = Trace::new(vec![step(0, 0, Inc(0)), step(0, 0, Inc(0))]);
        assert_eq!(
            replay_trace(&p, &Registers::new(), &skip).unwrap_err(),
            Error::TraceMismatch { step: 1 }
        );
        let bad_choice = Trace::new(vec![step(0, 1, Inc(0))]);
        assert_eq!(
            replay_trace(&p, &Registers::new(), &bad_choice).unwrap_err(),
            Error::TraceMismatch { step: 0 }
        );
    }
}
