//! Probability weights.
//!
//! Machine semantics never touch the weights; only the probabilistic engine
//! does. Everything weight-aware is generic over [`Weight`] so the same code
//! runs on exact big rationals (the default) or on plain floats when a quick
//! approximate answer is enough.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore};

/// Tolerance used by float weights when checking that a line sums to one.
pub const FLOAT_SUM_TOLERANCE: f64 = 1e-9;

/// A scalar able to carry probability mass.
pub trait Weight:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
{
    /// `true` when arithmetic on this type is exact.
    const EXACT: bool;

    fn from_ratio(numerator: u64, denominator: u64) -> Self;

    fn from_rational(value: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// Whether `weights` form a probability distribution: non-negative and
    /// summing to one (exactly for exact types).
    fn is_distribution<'a, I>(weights: I) -> bool
    where
        I: IntoIterator<Item = &'a Self>,
        Self: 'a;

    /// Draws an index with probability proportional to its weight.
    ///
    /// `weights` must be a distribution; the result is always a valid index.
    fn draw<R: RngCore + ?Sized>(weights: &[&Self], rng: &mut R) -> usize;
}

impl Weight for BigRational {
    const EXACT: bool = true;

    fn from_ratio(numerator: u64, denominator: u64) -> Self {
        BigRational::new(BigInt::from(numerator), BigInt::from(denominator))
    }

    fn from_rational(value: &BigRational) -> Self {
        value.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_distribution<'a, I>(weights: I) -> bool
    where
        I: IntoIterator<Item = &'a Self>,
    {
        let mut sum = BigRational::zero();
        for w in weights {
            if w.is_negative() {
                return false;
            }
            sum += w;
        }
        sum.is_one()
    }

    fn draw<R: RngCore + ?Sized>(weights: &[&Self], rng: &mut R) -> usize {
        // Exact inversion: scale every weight to the common denominator and
        // pick a uniform integer below it.
        let lcm = weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let scaled: Vec<BigInt> = weights.iter().map(|w| w.numer() * (&lcm / w.denom())).collect();
        let total: BigInt = scaled.iter().sum();
        let Some(total) = total.to_biguint().filter(|t| !t.is_zero()) else {
            return 0;
        };
        let ticket = BigInt::from(uniform_below(&total, rng));
        let mut cumulative = BigInt::zero();
        for (index, share) in scaled.iter().enumerate() {
            cumulative += share;
            if ticket < cumulative {
                return index;
            }
        }
        weights.len() - 1
    }
}

/// Uniform integer in `[0, bound)`.
fn uniform_below<R: RngCore + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    if let Some(small) = bound.to_u64() {
        return BigUint::from(rng.random_range(0..small));
    }
    // Rejection sampling on whole bytes.
    let bytes = bound.to_bytes_be().len();
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        let candidate = BigUint::from_bytes_be(&buf);
        if &candidate < bound {
            return candidate;
        }
    }
}

macro_rules! float_weight {
    ($t:ty) => {
        impl Weight for $t {
            const EXACT: bool = false;

            fn from_ratio(numerator: u64, denominator: u64) -> Self {
                numerator as $t / denominator as $t
            }

            fn from_rational(value: &BigRational) -> Self {
                ToPrimitive::to_f64(value).unwrap_or(f64::NAN) as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn is_distribution<'a, I>(weights: I) -> bool
            where
                I: IntoIterator<Item = &'a Self>,
            {
                let mut sum = 0.0f64;
                for w in weights {
                    if w.is_nan() || *w < 0.0 {
                        return false;
                    }
                    sum += *w as f64;
                }
                (sum - 1.0).abs() <= FLOAT_SUM_TOLERANCE
            }

            fn draw<R: RngCore + ?Sized>(weights: &[&Self], rng: &mut R) -> usize {
                let total: f64 = weights.iter().map(|w| **w as f64).sum();
                let ticket = rng.random::<f64>() * total;
                let mut cumulative = 0.0;
                for (index, w) in weights.iter().enumerate() {
                    cumulative += **w as f64;
                    if ticket < cumulative {
                        return index;
                    }
                }
                weights.len() - 1
            }
        }
    };
}

float_weight!(f64);
float_weight!(f32);

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn exact_distribution_check_has_no_tolerance() {
        assert!(BigRational::is_distribution(&[q(1, 3), q(1, 3), q(1, 3)]));
        assert!(!BigRational::is_distribution(&[q(1, 2), q(1, 3)]));
        assert!(!BigRational::is_distribution(&[q(3, 2), q(-1, 2)]));
    }

    #[test]
    fn float_distribution_check_tolerates_rounding() {
        assert!(f64::is_distribution(&[0.1, 0.2, 0.7]));
        assert!(!f64::is_distribution(&[0.5, 0.4]));
    }

    #[test]
    fn exact_draw_never_picks_zero_weight() {
        let weights = [q(0, 1), q(1, 1), q(0, 1)];
        let refs: Vec<&BigRational> = weights.iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            assert_eq!(BigRational::draw(&refs, &mut rng), 1);
        }
    }

    #[test]
    fn exact_draw_frequencies_track_weights() {
        let weights = [q(1, 6), q(1, 2), q(1, 3)];
        let refs: Vec<&BigRational> = weights.iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 3];
        let n = 60_000;
        for _ in 0..n {
            counts[BigRational::draw(&refs, &mut rng)] += 1;
        }
        for (count, expected) in counts.iter().zip([1.0 / 6.0, 0.5, 1.0 / 3.0]) {
            let freq = *count as f64 / n as f64;
            assert!((freq - expected).abs() < 0.01, "{freq} vs {expected}");
        }
    }

    #[test]
    fn uniform_below_handles_huge_bounds() {
        let bound = BigUint::from(u64::MAX) * BigUint::from(3u32);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(uniform_below(&bound, &mut rng) < bound);
        }
    }
}
