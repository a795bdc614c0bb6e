//! Random admissible length vectors, in floating point or exact integers.

use num_bigint::{BigInt, RandBigInt};
use num_rational::BigRational;
use num_traits::{Float, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use crate::genperm::{GeneralizedPermutation, LetterClass, Obstruction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("no positive length vector balances the rows of this permutation")]
    Unbalanceable,
    #[error("no length vector is admissible: {0:?}")]
    NotDynamicallyIrreducible(Obstruction),
    #[error("gave up after {0} rejected draws")]
    TooManyRejections(usize),
}

pub const DEFAULT_MAX_REJECTIONS: usize = 100_000;

/// Draws lengths with iid exponential coordinates, balanced by rescaling the bottom-only letters,
/// and rejects draws that fail admissibility.
#[derive(Clone, Debug)]
pub struct LengthSampler {
    perm: GeneralizedPermutation,
    max_rejections: usize,
}

impl LengthSampler {
    pub fn new(perm: &GeneralizedPermutation) -> Result<Self, SampleError> {
        if !perm.admits_lengths() {
            return Err(SampleError::Unbalanceable);
        }
        if let Some(w) = perm.case_one_witness() {
            return Err(SampleError::NotDynamicallyIrreducible(Obstruction::CaseOne(w)));
        }
        Ok(LengthSampler { perm: perm.clone(), max_rejections: DEFAULT_MAX_REJECTIONS })
    }

    pub fn with_max_rejections(mut self, n: usize) -> Self {
        self.max_rejections = n;
        self
    }

    pub fn permutation(&self) -> &GeneralizedPermutation {
        &self.perm
    }

    /// Floating lengths in alphabet order, normalized to total length 1 per row.
    pub fn sample_float<S: Float, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<S>, SampleError> {
        let p = &self.perm;
        for _ in 0..self.max_rejections {
            let mut lam: Vec<f64> = (0..p.d()).map(|_| Exp1.sample(rng)).collect();
            if lam.iter().any(|&v| v <= 0.0) {
                continue;
            }
            let (s0, s1) = class_sums(p, &lam);
            if p.is_genuine() {
                for x in 0..p.d() {
                    if p.class_of(x) == LetterClass::Bottom {
                        lam[x] *= s0 / s1;
                    }
                }
            }
            let total: f64 = p.top().iter().map(|&x| lam[x]).sum();
            let lam: Vec<S> = lam.iter().map(|&v| S::from(v / total).unwrap()).collect();
            let check: Vec<f64> = lam.iter().map(|v| v.to_f64().unwrap()).collect();
            if p.admissibility(&check).is_ok() {
                return Ok(lam);
            }
        }
        Err(SampleError::TooManyRejections(self.max_rejections))
    }

    /// `sample_exact` driven by stream `stream` of a ChaCha8 generator seeded with `seed`.
    pub fn exact_from_seed(&self, seed: u64, stream: u64, bits: u64) -> Result<Vec<BigRational>, SampleError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        self.sample_exact(&mut rng, bits)
    }

    /// Exact positive integers in alphabet order with the rows balanced exactly.
    ///
    /// Each coordinate is an exponential variate scaled to `bits` bits with uniformly random
    /// low-order bits, so ties and rational relations are avoided for many steps.
    pub fn sample_exact<R: Rng + ?Sized>(&self, rng: &mut R, bits: u64) -> Result<Vec<BigRational>, SampleError> {
        let p = &self.perm;
        let bits = bits.max(64);
        for _ in 0..self.max_rejections {
            let w: Vec<BigInt> = (0..p.d())
                .map(|_| {
                    let e: f64 = Exp1.sample(rng);
                    let hi = BigInt::from((e * (1u64 << 52) as f64) as u64 + 1);
                    let low = rng.gen_biguint(bits - 53);
                    (hi << (bits - 53) as usize) + BigInt::from(low)
                })
                .collect();
            let sum = |c: LetterClass| -> BigInt {
                (0..p.d()).filter(|&x| p.class_of(x) == c).map(|x| w[x].clone()).fold(BigInt::zero(), |a, b| a + b)
            };
            let (s0, s1) = (sum(LetterClass::Top), sum(LetterClass::Bottom));
            let lam: Vec<BigRational> = (0..p.d())
                .map(|x| {
                    let v = if !p.is_genuine() {
                        w[x].clone()
                    } else if p.class_of(x) == LetterClass::Bottom {
                        w[x].clone() * s0.clone()
                    } else {
                        w[x].clone() * s1.clone()
                    };
                    BigRational::from_integer(v)
                })
                .collect();
            if p.admissibility(&lam).is_ok() {
                return Ok(lam);
            }
        }
        Err(SampleError::TooManyRejections(self.max_rejections))
    }
}

fn class_sums(p: &GeneralizedPermutation, lam: &[f64]) -> (f64, f64) {
    let mut s = (0.0, 0.0);
    for x in 0..p.d() {
        match p.class_of(x) {
            LetterClass::Top => s.0 += lam[x],
            LetterClass::Bottom => s.1 += lam[x],
            LetterClass::Crossing => {}
        }
    }
    s
}

/// Balance residual `sum_top - sum_bottom` of exact lengths.
pub fn balance_residual(p: &GeneralizedPermutation, lam: &[BigRational]) -> BigRational {
    p.balance_row()
        .iter()
        .zip(lam)
        .fold(BigRational::zero(), |a, (&c, v)| a + BigRational::from_integer(c.into()) * v.clone())
        / BigRational::from_integer(2.into())
}
