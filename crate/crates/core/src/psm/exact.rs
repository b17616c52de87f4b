//! Exact acceptance probabilities by exhaustive enumeration.
//!
//! Both enumerators explore every choice up to `fuel` steps and split the
//! unit mass into accepted, rejected and still-running (unresolved) parts.
//! The naive one walks the full choice tree; the memoized one merges mass
//! flowing through equal configurations at equal depth, which is sound
//! because the step distribution depends only on the configuration.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::machine::{apply_instruction, Acceptance, AcceptancePolicy, Configuration, Program, Registers};
use crate::scalar::Weight;

/// Default cap on explored states.
pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

/// Accepted, rejected and unresolved probability mass.
///
/// The masses sum to one; the true acceptance probability lies in
/// `[accept, accept + unresolved]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbabilityInterval<W> {
    pub accept: W,
    pub reject: W,
    pub unresolved: W,
}

impl<W: Weight> ProbabilityInterval<W> {
    fn empty() -> Self {
        Self {
            accept: W::zero(),
            reject: W::zero(),
            unresolved: W::zero(),
        }
    }

    pub fn total(&self) -> W {
        self.accept.clone() + self.reject.clone() + self.unresolved.clone()
    }

    /// Upper end of the acceptance-probability interval.
    pub fn upper(&self) -> W {
        self.accept.clone() + self.unresolved.clone()
    }

    fn add(&mut self, config: &Configuration, halted: bool, policy: &AcceptancePolicy, mass: W) {
        let slot = match policy.evaluate(config, halted) {
            Acceptance::Accept => &mut self.accept,
            Acceptance::Reject => &mut self.reject,
            Acceptance::NotHalted => &mut self.unresolved,
        };
        *slot = slot.clone() + mass;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    Naive,
    #[default]
    Memoized,
}

pub fn exact_acceptance_with<W: Weight>(
    engine: Engine,
    program: &Program<W>,
    inputs: &Registers,
    fuel: u64,
    policy: &AcceptancePolicy,
    node_cap: u64,
) -> Result<ProbabilityInterval<W>> {
    match engine {
        Engine::Naive => exact_acceptance(program, inputs, fuel, policy, node_cap),
        Engine::Memoized => exact_acceptance_memoized(program, inputs, fuel, policy, node_cap),
    }
}

/// Walks every path of the choice tree, multiplying weights along the way.
pub fn exact_acceptance<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    fuel: u64,
    policy: &AcceptancePolicy,
    node_cap: u64,
) -> Result<ProbabilityInterval<W>> {
    program.ensure_distribution()?;
    let mut result = ProbabilityInterval::empty();
    let mut explored = 0u64;
    let mut stack = vec![(Configuration::initial(inputs), 0u64, W::one())];
    while let Some((config, depth, mass)) = stack.pop() {
        explored += 1;
        if explored > node_cap {
            return Err(Error::BudgetExceeded { cap: node_cap });
        }
        match program.line(config.counter()) {
            None => result.add(&config, true, policy, mass),
            Some(_) if depth == fuel => result.add(&config, false, policy, mass),
            Some(line) => {
                for choice in line.choices().iter().rev() {
                    stack.push((
                        apply_instruction(&config, choice.instruction),
                        depth + 1,
                        mass.clone() * choice.weight.clone(),
                    ));
                }
            }
        }
    }
    Ok(result)
}

/// Same result as [`exact_acceptance`], merging mass per
/// `(configuration, remaining fuel)` state.
///
/// States are processed one depth layer at a time, so within a layer the
/// remaining fuel is shared and the configuration alone is the key.
pub fn exact_acceptance_memoized<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    fuel: u64,
    policy: &AcceptancePolicy,
    node_cap: u64,
) -> Result<ProbabilityInterval<W>> {
    program.ensure_distribution()?;
    let mut result = ProbabilityInterval::empty();
    let mut explored = 0u64;
    let mut layer = BTreeMap::from([(Configuration::initial(inputs), W::one())]);
    let mut depth = 0;
    while !layer.is_empty() {
        explored += layer.len() as u64;
        if explored > node_cap {
            return Err(Error::BudgetExceeded { cap: node_cap });
        }
        let mut next: BTreeMap<Configuration, W> = BTreeMap::new();
        for (config, mass) in layer {
            match program.line(config.counter()) {
                None => result.add(&config, true, policy, mass),
                Some(_) if depth == fuel => result.add(&config, false, policy, mass),
                Some(line) => {
                    for choice in line.choices() {
                        let share = mass.clone() * choice.weight.clone();
                        let child = apply_instruction(&config, choice.instruction);
                        match next.get_mut(&child) {
                            Some(slot) => *slot = slot.clone() + share,
                            None => {
                                next.insert(child, share);
                            }
                        }
                    }
                }
            }
        }
        layer = next;
        depth += 1;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{Instruction, ProgramLine};
    use crate::psm::{enumerate_choice_sequences, lift_deterministic, PathOutcome};
    use crate::Rational;
    use num_traits::{One, Zero};
    use proptest::prelude::*;
    use Instruction::{Dec, Inc};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn interval(a: Rational, r: Rational, u: Rational) -> ProbabilityInterval<Rational> {
        ProbabilityInterval {
            accept: a,
            reject: r,
            unresolved: u,
        }
    }

    fn weighted(lines: Vec<Vec<(Instruction, Rational)>>) -> Program {
        Program::new(lines.into_iter().map(|l| ProgramLine::new(l).unwrap()).collect())
    }

    fn both(p: &Program, fuel: u64) -> ProbabilityInterval<Rational> {
        let policy = AcceptancePolicy::default();
        let naive = exact_acceptance(p, &Registers::new(), fuel, &policy, DEFAULT_NODE_CAP).unwrap();
        let memo = exact_acceptance_memoized(p, &Registers::new(), fuel, &policy, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(naive, memo);
        naive
    }

    #[test]
    fn coin_program() {
        let coin = weighted(vec![vec![(Inc(0), q(1, 2)), (Dec(9, 2), q(1, 2))]]);
        assert_eq!(both(&coin, 2), interval(q(1, 2), q(1, 2), q(0, 1)));
    }

    #[test]
    fn two_thirds_gadget() {
        let gadget = weighted(vec![vec![
            (Inc(0), q(1, 3)),
            (Inc(0), q(1, 3)),
            (Dec(9, 2), q(1, 3)),
        ]]);
        assert_eq!(both(&gadget, 2), interval(q(2, 3), q(1, 3), q(0, 1)));
    }

    #[test]
    fn looping_program_is_fully_unresolved() {
        let looping = lift_deterministic(&Program::deterministic([Inc(9), Dec(9, 0)])).unwrap();
        for fuel in [0, 1, 2, 7, 50] {
            assert_eq!(both(&looping, fuel), interval(q(0, 1), q(0, 1), q(1, 1)));
        }
    }

    #[test]
    fn empty_program_rejects() {
        assert_eq!(both(&Program::default(), 3), interval(q(0, 1), q(1, 1), q(0, 1)));
    }

    #[test]
    fn reconverging_branches_agree() {
        // Both branches of line 0 and line 2 lead to the same configurations,
        // so the memoized engine merges them.
        let p = weighted(vec![
            vec![(Inc(1), q(1, 4)), (Inc(2), q(3, 4))],
            vec![(Dec(1, 2), q(1, 2)), (Dec(2, 2), q(1, 2))],
            vec![(Inc(3), q(1, 3)), (Inc(0), q(2, 3))],
            vec![(Dec(3, 0), q(1, 2)), (Inc(0), q(1, 2))],
        ]);
        let fuel = 10;
        let result = both(&p, fuel);
        assert_eq!(result.total(), Rational::one());
        assert!(result.unresolved > Rational::zero());
    }

    #[test]
    fn node_cap_is_enforced() {
        let p = weighted(vec![
            vec![(Inc(0), q(1, 2)), (Inc(1), q(1, 2))],
            vec![(Dec(0, 0), q(1, 2)), (Dec(1, 0), q(1, 2))],
        ]);
        let policy = AcceptancePolicy::default();
        assert_eq!(
            exact_acceptance(&p, &Registers::new(), 30, &policy, 100).unwrap_err(),
            Error::BudgetExceeded { cap: 100 }
        );
        assert_eq!(
            exact_acceptance_memoized(&p, &Registers::new(), 300, &policy, 100).unwrap_err(),
            Error::BudgetExceeded { cap: 100 }
        );
    }

    #[test]
    fn float_weights_track_exact_weights() {
        let p = weighted(vec![
            vec![(Inc(0), q(1, 3)), (Inc(1), q(2, 3))],
            vec![(Dec(0, 0), q(1, 5)), (Inc(2), q(4, 5))],
        ]);
        let policy = AcceptancePolicy::default();
        let exact = exact_acceptance_memoized(&p, &Registers::new(), 20, &policy, DEFAULT_NODE_CAP).unwrap();
        let float =
            exact_acceptance_memoized(&p.to_float(), &Registers::new(), 20, &policy, DEFAULT_NODE_CAP)
                .unwrap();
        assert!((Weight::to_f64(&exact.accept) - float.accept).abs() < 1e-12);
        assert!((float.total() - 1.0).abs() < 1e-12);
    }

    fn arb_program() -> impl Strategy<Value = Program> {
        let instr = prop_oneof![
            (0usize..3).prop_map(Inc),
            (0usize..3, 0usize..6).prop_map(|(r, t)| Dec(r, t)),
        ];
        let line = prop::collection::vec((instr, 1u64..4), 1..=3).prop_map(|raw| {
            let total: u64 = raw.iter().map(|(_, w)| w).sum();
            raw.into_iter()
                .map(|(i, w)| (i, Rational::from_ratio(w, total)))
                .collect::<Vec<_>>()
        });
        prop::collection::vec(line, 0..5).prop_map(weighted)
    }

    proptest! {
        #[test]
        fn enumerators_agree_and_conserve_mass(p in arb_program(), fuel in 0u64..8) {
            let result = both(&p, fuel);
            prop_assert_eq!(result.total(), Rational::one());
        }

        #[test]
        fn sequence_enumeration_agrees(p in arb_program(), fuel in 0u64..6) {
            let policy = AcceptancePolicy::default();
            let paths = enumerate_choice_sequences(&p, &Registers::new(), fuel, &policy, 100_000).unwrap();
            let mut by_sequence = interval(q(0, 1), q(0, 1), q(0, 1));
            for (_, path) in &paths {
                let product = path.trace.iter().fold(Rational::one(), |acc, s| {
                    acc * p.lines()[s.line].choices()[s.choice].weight.clone()
                });
                prop_assert_eq!(&product, &path.path_probability);
                let slot = match path.outcome {
                    PathOutcome::Accept => &mut by_sequence.accept,
                    PathOutcome::Reject => &mut by_sequence.reject,
                    PathOutcome::Unresolved => &mut by_sequence.unresolved,
                };
                *slot += &path.path_probability;
            }
            prop_assert_eq!(by_sequence, both(&p, fuel));
        }

        #[test]
        fn more_fuel_narrows_the_interval(p in arb_program(), fuel in 0u64..6, extra in 0u64..4) {
            let low = both(&p, fuel);
            let high = both(&p, fuel + extra);
            prop_assert!(high.accept >= low.accept);
            prop_assert!(high.reject >= low.reject);
            prop_assert!(high.unresolved <= low.unresolved);
        }
    }
}
