//! Monte Carlo estimation of the acceptance probability.
//!
//! With `k = ceil(ln 3 / eps^2)` independent paths, Hoeffding's inequality
//! bounds the chance that the accepting fraction misses the true probability
//! by more than `eps` by `2 exp(-2 k eps^2) <= 2/9`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{sample_path, PathOutcome, RandomSource};
use crate::error::{Error, Result};
use crate::machine::{AcceptancePolicy, Program, Registers};
use crate::scalar::Weight;

/// Certified rational bounds `lo < ln 3 < hi` from `terms` terms of
/// `ln 3 = 2 atanh(1/2) = sum_k 2 / ((2k+1) 2^(2k+1))`.
///
/// The tail after `n` terms is below `(8/3) / ((2n+1) 2^(2n+1))`.
pub fn ln3_bounds(terms: u32) -> (BigRational, BigRational) {
    let mut lo = BigRational::zero();
    for k in 0..terms {
        let odd = 2 * k + 1;
        lo += BigRational::new(BigInt::from(2), BigInt::from(odd) << odd);
    }
    let odd = 2 * terms + 1;
    let tail = BigRational::new(BigInt::from(8), BigInt::from(3 * odd) << odd);
    let hi = &lo + tail;
    (lo, hi)
}

/// Number of samples `ceil(ln 3 / eps^2)` for `0 < eps <= 1`.
///
/// ln 3 is bracketed by [`ln3_bounds`] and the bracket is refined until both
/// ends give the same ceiling; since ln 3 is irrational that always happens,
/// so the result is exact for every rational `eps`.
pub fn sample_size(epsilon: &BigRational) -> Result<u64> {
    if !epsilon.is_positive() || epsilon > &BigRational::one() {
        return Err(Error::EpsilonOutOfRange(epsilon.to_string()));
    }
    let scale = (epsilon * epsilon).recip();
    let mut terms = 32;
    loop {
        let (lo, hi) = ln3_bounds(terms);
        let low = (&lo * &scale).ceil();
        let high = (&hi * &scale).ceil();
        if low == high {
            return low
                .to_integer()
                .to_u64()
                .ok_or_else(|| Error::EpsilonOutOfRange(epsilon.to_string()));
        }
        terms *= 2;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EstimateReport {
    /// Accepting fraction `accepts / sample_count`.
    pub estimate: BigRational,
    pub sample_count: u64,
    pub accepts: u64,
    pub rejects: u64,
    pub unresolved: u64,
    pub epsilon: BigRational,
    pub seed: u64,
}

/// Samples `sample_size(epsilon)` paths, run `i` drawing from
/// [`RandomSource::for_run`]`(seed, i)`, and reports the accepting fraction.
pub fn estimate_acceptance<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    epsilon: &BigRational,
    fuel: u64,
    seed: u64,
    policy: &AcceptancePolicy,
) -> Result<EstimateReport> {
    let k = sample_size(epsilon)?;
    program.ensure_distribution()?;
    let (mut accepts, mut rejects, mut unresolved) = (0, 0, 0);
    for run in 0..k {
        let mut rng = RandomSource::for_run(seed, run);
        match sample_path(program, inputs, fuel, &mut rng, policy)?.outcome {
            PathOutcome::Accept => accepts += 1,
            PathOutcome::Reject => rejects += 1,
            PathOutcome::Unresolved => unresolved += 1,
        }
    }
    Ok(EstimateReport {
        estimate: BigRational::new(accepts.into(), k.into()),
        sample_count: k,
        accepts,
        rejects,
        unresolved,
        epsilon: epsilon.clone(),
        seed,
    })
}
