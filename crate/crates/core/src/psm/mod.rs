//! Probabilistic machines.
//!
//! A probabilistic run follows a single path: at every line with several
//! instructions one is drawn according to the line's weights. The path's
//! probability is the product of the drawn weights.
//!
//! Besides sampling, this module computes acceptance probabilities exactly by
//! enumerating every choice sequence ([`exact`]), estimates them by Monte Carlo
//! with a Chernoff-sized sample ([`estimate`]), and decides bounded-error
//! acceptance on top of either ([`decide`]).

pub mod decide;
pub mod estimate;
pub mod exact;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::{
    apply_instruction, Acceptance, AcceptancePolicy, Configuration, Program, ProgramLine, Registers,
};
use crate::scalar::Weight;
use crate::trace::{Trace, TraceStep};

pub use decide::{decide_bounded_error, DecideMode, Decision, Evidence, UndeterminedReason, Verdict};
pub use estimate::{estimate_acceptance, sample_size, EstimateReport};
pub use exact::{
    exact_acceptance, exact_acceptance_memoized, exact_acceptance_with, Engine, ProbabilityInterval,
    DEFAULT_NODE_CAP,
};

/// Gives every instruction of a deterministic program weight one.
pub fn lift_deterministic<W: Weight>(program: &Program<W>) -> Result<Program<W>> {
    program.ensure_deterministic()?;
    Ok(program.map_weights(|_| W::one()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PathOutcome {
    Accept,
    Reject,
    /// Fuel ran out before the machine halted.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult<W> {
    pub outcome: PathOutcome,
    pub trace: Trace,
    pub final_config: Configuration,
    pub path_probability: W,
    pub steps: u64,
    /// Steps that drew from a line with at least two instructions.
    pub random_choices: u64,
}

/// One choice index per step at a multi-instruction line, in execution order.
///
/// Entry `j` ranges over the width of the line addressed at the `j`-th
/// random step, so binary programs reproduce plain bitstrings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ChoiceSequence {
    pub choices: Vec<usize>,
}

impl ChoiceSequence {
    pub fn new(choices: Vec<usize>) -> Self {
        Self { choices }
    }
}

/// Seeded stream of instruction choices.
///
/// Equal seeds yield equal streams. Exact weights are sampled by exact
/// inversion, so index `i` is drawn with probability exactly `p_i`.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// An independent stream for run `run` of a batch seeded with `seed`.
    pub fn for_run(seed: u64, run: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draw<W: Weight>(&mut self, line: &ProgramLine<W>) -> usize {
        W::draw(&line.weights(), &mut self.rng)
    }
}

/// Walks one path, asking `choose` for the choice at every multi-instruction
/// line.
fn follow_path<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    fuel: u64,
    policy: &AcceptancePolicy,
    mut choose: impl FnMut(&ProgramLine<W>, u64) -> Result<usize>,
) -> Result<PathResult<W>> {
    let mut config = Configuration::initial(inputs);
    let mut trace = Trace::default();
    let mut probability = W::one();
    let mut steps = 0;
    let mut random_choices = 0;
    let outcome = loop {
        let Some(line) = program.line(config.counter()) else {
            break match policy.evaluate(&config, true) {
                Acceptance::Accept => PathOutcome::Accept,
                _ => PathOutcome::Reject,
            };
        };
        if steps == fuel {
            break PathOutcome::Unresolved;
        }
        let choice = if line.width() > 1 {
            let c = choose(line, random_choices)?;
            random_choices += 1;
            c
        } else {
            0
        };
        let picked = line.choices().get(choice).ok_or(Error::ChoiceOutOfRange {
            line: config.counter(),
            choice,
            available: line.width(),
        })?;
        probability = probability * picked.weight.clone();
        trace.push(TraceStep {
            line: config.counter(),
            choice,
            instruction: picked.instruction,
        });
        config = apply_instruction(&config, picked.instruction);
        steps += 1;
    };
    Ok(PathResult {
        outcome,
        trace,
        final_config: config,
        path_probability: probability,
        steps,
        random_choices,
    })
}

/// Follows one random path for at most `fuel` steps.
pub fn sample_path<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    fuel: u64,
    rng: &mut RandomSource,
    policy: &AcceptancePolicy,
) -> Result<PathResult<W>> {
    program.ensure_distribution()?;
    follow_path(program, inputs, fuel, policy, |line, _| Ok(rng.draw(line)))
}

/// Deterministically simulates the path selected by `sequence`.
///
/// Fails with [`Error::SequenceExhausted`] when the path needs more random
/// choices than the sequence holds, and with [`Error::ChoiceOutOfRange`]
/// when an entry exceeds the addressed line's width.
pub fn replay_choices<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    sequence: &ChoiceSequence,
    fuel: u64,
    policy: &AcceptancePolicy,
) -> Result<PathResult<W>> {
    follow_path(program, inputs, fuel, policy, |_, j| {
        sequence
            .choices
            .get(j as usize)
            .copied()
            .ok_or(Error::SequenceExhausted { step: j })
    })
}

/// Every feasible choice sequence of a fuel-bounded run, in lexicographic
/// order, each with its replayed path.
///
/// This is the literal derandomization: list the sequences, then simulate
/// each one from scratch. It is exponential and meant for small programs
/// and as a cross-check of the enumerators in [`exact`].
pub fn enumerate_choice_sequences<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    fuel: u64,
    policy: &AcceptancePolicy,
    max_paths: usize,
) -> Result<Vec<(ChoiceSequence, PathResult<W>)>> {
    let mut out = Vec::new();
    let mut pending = vec![ChoiceSequence::default()];
    while let Some(prefix) = pending.pop() {
        match replay_choices(program, inputs, &prefix, fuel, policy) {
            Ok(path) => {
                if out.len() == max_paths {
                    return Err(Error::BudgetExceeded {
                        cap: max_paths as u64,
                    });
                }
                out.push((prefix, path));
            }
            Err(Error::SequenceExhausted { .. }) => {
                let width = branching_width(program, inputs, &prefix, fuel);
                for c in (0..width).rev() {
                    let mut next = prefix.choices.clone();
                    next.push(c);
                    pending.push(ChoiceSequence::new(next));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Width of the line where `prefix` runs out of choices.
fn branching_width<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    prefix: &ChoiceSequence,
    fuel: u64,
) -> usize {
    let mut width = 0;
    let _ = follow_path(
        program,
        inputs,
        fuel,
        &AcceptancePolicy::default(),
        |line, j| match prefix.choices.get(j as usize) {
            Some(&c) => Ok(c),
            None => {
                width = line.width();
                Err(Error::SequenceExhausted { step: j })
            }
        },
    );
    width
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{run_deterministic, Instruction};
    use crate::Rational;
    use num_traits::{One, Zero};
    use Instruction::{Dec, Inc};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn coin() -> Program {
        Program::new(vec![ProgramLine::new(vec![
            (Inc(0), q(1, 2)),
            (Dec(9, 2), q(1, 2)),
        ])
        .unwrap()])
    }

    fn add_program() -> Program {
        Program::deterministic([Dec(1, 3), Inc(9), Dec(9, 6), Inc(0), Inc(9), Dec(9, 0)])
    }

    #[test]
    fn lift_examples() {
        let p: Program = Program::new(vec![ProgramLine::new(vec![(Inc(1), q(7, 3))]).unwrap()]);
        let lifted = lift_deterministic(&p).unwrap();
        assert_eq!(lifted.lines()[0].choices()[0].weight, Rational::one());
        assert_eq!(
            lift_deterministic(&Program::<Rational>::default()).unwrap(),
            Program::default()
        );
        assert_eq!(
            lift_deterministic(&coin()).unwrap_err(),
            Error::NotDeterministic { line: 0, choices: 2 }
        );
    }

    #[test]
    fn coin_path_has_probability_half() {
        for seed in 0..20 {
            let path = sample_path(
                &coin(),
                &Registers::new(),
                10,
                &mut RandomSource::new(seed),
                &AcceptancePolicy::default(),
            )
            .unwrap();
            assert_ne!(path.outcome, PathOutcome::Unresolved);
            assert_eq!(path.path_probability, q(1, 2));
            assert_eq!((path.random_choices, path.steps), (1, 1));
        }
    }

    #[test]
    fn lifted_add_program_follows_the_deterministic_run() {
        let inputs: Registers = [(0, 2), (1, 3)].into_iter().collect();
        let lifted = lift_deterministic(&add_program()).unwrap();
        let path = sample_path(
            &lifted,
            &inputs,
            100,
            &mut RandomSource::new(3),
            &AcceptancePolicy::default(),
        )
        .unwrap();
        assert_eq!(path.outcome, PathOutcome::Accept);
        assert_eq!(path.path_probability, Rational::one());
        assert_eq!((path.random_choices, path.steps), (0, 15));
        let run = run_deterministic(&add_program(), &inputs, 100).unwrap();
        assert_eq!(&path.final_config, run.configuration());
    }

    #[test]
    fn lifted_loop_is_unresolved() {
        let lifted = lift_deterministic(&Program::<Rational>::deterministic([Inc(9), Dec(9, 0)])).unwrap();
        let path = sample_path(
            &lifted,
            &Registers::new(),
            50,
            &mut RandomSource::new(0),
            &AcceptancePolicy::default(),
        )
        .unwrap();
        assert_eq!(path.outcome, PathOutcome::Unresolved);
        assert_eq!(path.path_probability, Rational::one());
        assert_eq!(path.steps, 50);
    }

    #[test]
    fn bad_weights_are_rejected() {
        let p: Program = Program::new(vec![
            ProgramLine::new(vec![(Inc(0), q(1, 2)), (Inc(1), q(1, 3))]).unwrap()
        ]);
        let err = sample_path(
            &p,
            &Registers::new(),
            5,
            &mut RandomSource::new(0),
            &AcceptancePolicy::default(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::Weight {
                line: 0,
                sum: "5/6".into()
            }
        );
    }

    #[test]
    fn same_seed_same_path() {
        let p: Program = Program::new(vec![
            ProgramLine::uniform(vec![Inc(0), Inc(1), Dec(0, 0)]).unwrap(),
            ProgramLine::uniform(vec![Dec(0, 0), Dec(1, 1)]).unwrap(),
        ]);
        let run = |seed| {
            sample_path(
                &p,
                &Registers::new(),
                40,
                &mut RandomSource::new(seed),
                &AcceptancePolicy::default(),
            )
            .unwrap()
        };
        assert_eq!(run(9), run(9));
        let r1 = RandomSource::for_run(5, 1);
        let r2 = RandomSource::for_run(5, 1);
        assert_eq!(format!("{:?}", r1), format!("{:?}", r2));
    }

    #[test]
    fn replay_of_sequences() {
        let policy = AcceptancePolicy::default();
        let left = replay_choices(
            &coin(),
            &Registers::new(),
            &ChoiceSequence::new(vec![0]),
            5,
            &policy,
        )
        .unwrap();
        assert_eq!(left.outcome, PathOutcome::Accept);
        let right = replay_choices(
            &coin(),
            &Registers::new(),
            &ChoiceSequence::new(vec![1]),
            5,
            &policy,
        )
        .unwrap();
        assert_eq!(right.outcome, PathOutcome::Reject);
        assert_eq!(
            replay_choices(&coin(), &Registers::new(), &ChoiceSequence::default(), 5, &policy).unwrap_err(),
            Error::SequenceExhausted { step: 0 }
        );
        assert!(matches!(
            replay_choices(
                &coin(),
                &Registers::new(),
                &ChoiceSequence::new(vec![2]),
                5,
                &policy
            ),
            Err(Error::ChoiceOutOfRange { .. })
        ));
    }

    #[test]
    fn enumerated_sequences_cover_unit_mass() {
        let p: Program = Program::new(vec![
            ProgramLine::new(vec![(Inc(0), q(1, 3)), (Inc(1), q(2, 3))]).unwrap(),
            ProgramLine::uniform(vec![Dec(0, 3), Inc(2), Dec(1, 0)]).unwrap(),
        ]);
        let paths =
            enumerate_choice_sequences(&p, &Registers::new(), 12, &AcceptancePolicy::default(), 10_000)
                .unwrap();
        let total = paths
            .iter()
            .fold(Rational::zero(), |acc, (_, r)| acc + r.path_probability.clone());
        assert_eq!(total, Rational::one());
        for (seq, path) in &paths {
            assert_eq!(seq.choices.len() as u64, path.random_choices);
        }
        assert!(paths.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
