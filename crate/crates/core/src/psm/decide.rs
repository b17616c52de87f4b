//! Bounded-error acceptance.
//!
//! A machine decides a language with gap `eta` when members are accepted with
//! probability at least `1/2 + eta` and non-members with at most `1/2 - eta`.
//! The decider compares either the exact interval or a sampled estimate
//! (with `eps = eta`) against 1/2.

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use super::estimate::{estimate_acceptance, EstimateReport};
use super::exact::{exact_acceptance_memoized, ProbabilityInterval};
use crate::error::{Error, Result};
use crate::machine::{AcceptancePolicy, Program, Registers};
use crate::scalar::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecideMode {
    Exact { node_cap: u64 },
    Sampled { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UndeterminedReason {
    /// The exact interval straddles 1/2.
    UnresolvedMass,
    /// Unresolved samples alone could flip the comparison.
    EstimateInGap,
}

impl UndeterminedReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            UndeterminedReason::UnresolvedMass => "unresolved-mass",
            UndeterminedReason::EstimateInGap => "estimate-in-gap",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Accept,
    Reject,
    Undetermined(UndeterminedReason),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Evidence<W> {
    Interval(ProbabilityInterval<W>),
    Estimate(EstimateReport),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision<W> {
    pub verdict: Verdict,
    pub evidence: Evidence<W>,
}

pub fn decide_bounded_error<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    eta: &BigRational,
    fuel: u64,
    mode: DecideMode,
    policy: &AcceptancePolicy,
) -> Result<Decision<W>> {
    let half = BigRational::new(1.into(), 2.into());
    if !eta.is_positive() || eta >= &half {
        return Err(Error::EtaOutOfRange(eta.to_string()));
    }
    match mode {
        DecideMode::Exact { node_cap } => {
            let interval = exact_acceptance_memoized(program, inputs, fuel, policy, node_cap)?;
            let half = W::from_ratio(1, 2);
            let verdict = if interval.accept > half {
                Verdict::Accept
            } else if interval.upper() <= half {
                Verdict::Reject
            } else {
                Verdict::Undetermined(UndeterminedReason::UnresolvedMass)
            };
            Ok(Decision {
                verdict,
                evidence: Evidence::Interval(interval),
            })
        }
        DecideMode::Sampled { seed } => {
            let report = estimate_acceptance(program, inputs, eta, fuel, seed, policy)?;
            let verdict = sampled_verdict(&report);
            Ok(Decision {
                verdict,
                evidence: Evidence::Estimate(report),
            })
        }
    }
}

/// Unresolved samples count as non-accepting, but if counting them as
/// accepting would cross 1/2 the verdict is withheld.
fn sampled_verdict(report: &EstimateReport) -> Verdict {
    let k = report.sample_count;
    if 2 * report.accepts > k {
        Verdict::Accept
    } else if 2 * (report.accepts + report.unresolved) > k {
        Verdict::Undetermined(UndeterminedReason::EstimateInGap)
    } else {
        Verdict::Reject
    }
}
