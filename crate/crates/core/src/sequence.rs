//! The prefix-sum generation engine.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rspec::{OrderFunction, SublinearSpec};

/// Default cap on the total number of bits held in the terms (32 MiB).
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 28;

#[derive(Clone, Copy, Debug)]
pub struct GenerateOptions {
    pub bit_budget: u64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            bit_budget: DEFAULT_BIT_BUDGET,
        }
    }
}

/// Materialized terms `b(0..=N)` of a variable-order meta-Fibonacci sequence.
///
/// Immutable once generated. `prefix[i]` holds `P(i - 1)`, so `prefix[0] = 0`
/// and `prefix[n + 1] = b(0) + … + b(n)`.
#[derive(Clone, Debug)]
pub struct VrSequence {
    spec: SublinearSpec,
    orders: Vec<usize>,
    terms: Vec<BigUint>,
    prefix: Vec<BigUint>,
}

/// Generates `b(0..=horizon)` with the default bit budget.
pub fn generate(spec: &SublinearSpec, horizon: usize) -> Result<VrSequence> {
    generate_with(spec, horizon, GenerateOptions::default())
}

/// Generates `b(0..=horizon)`. Every term costs one subtraction and one
/// addition: `b(n) = P(n-1) - P(n-1-r(n))`.
pub fn generate_with(spec: &SublinearSpec, horizon: usize, opts: GenerateOptions) -> Result<VrSequence> {
    if let Some(end) = spec.domain_end() {
        if horizon >= end {
            return Err(Error::TableExhausted { n: end });
        }
    }
    let mut orders = Vec::with_capacity(horizon + 1);
    let mut terms = Vec::with_capacity(horizon + 1);
    let mut prefix = Vec::with_capacity(horizon + 2);
    prefix.push(BigUint::zero());

    orders.push(spec.try_r_at(0)?);
    terms.push(BigUint::one());
    prefix.push(BigUint::one());
    let mut bits = 1u64;

    for n in 1..=horizon {
        let r = spec.try_r_at(n)?;
        if r > n || r == 0 {
            // unreachable for a certified spec; opaque closures are only probed
            return Err(Error::SublinearityViolation { n, r });
        }
        let b = &prefix[n] - &prefix[n - r];
        bits += b.bits();
        if bits > opts.bit_budget {
            return Err(Error::DigitBudgetExceeded {
                n,
                bits,
                budget: opts.bit_budget,
            });
        }
        prefix.push(&prefix[n] + &b);
        orders.push(r);
        terms.push(b);
    }
    Ok(VrSequence {
        spec: spec.clone(),
        orders,
        terms,
        prefix,
    })
}

impl VrSequence {
    pub fn spec(&self) -> &SublinearSpec {
        &self.spec
    }

    pub fn horizon(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn terms(&self) -> &[BigUint] {
        &self.terms
    }

    /// `r(0..=N)` as used during generation.
    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn term(&self, n: usize) -> &BigUint {
        &self.terms[n]
    }

    pub fn r(&self, n: usize) -> usize {
        self.orders[n]
    }

    /// `P(n) = b(0) + … + b(n)`, with `P(-1) = 0` available as `prefix_sum(-1)`.
    pub fn prefix_sum(&self, n: isize) -> &BigUint {
        &self.prefix[(n + 1) as usize]
    }

    /// `b(lo) + … + b(hi)` in O(1) big-integer operations.
    pub fn window_sum(&self, lo: usize, hi: usize) -> BigUint {
        if lo > hi {
            return BigUint::zero();
        }
        &self.prefix[hi + 1] - &self.prefix[lo]
    }

    pub(crate) fn check_index(&self, n: usize, lo: usize) -> Result<()> {
        if n < lo || n > self.horizon() {
            return Err(Error::IndexOutOfRange {
                index: n as i64,
                lo: lo as i64,
                hi: self.horizon() as i64,
            });
        }
        Ok(())
    }

    /// `b(n) / b(n-1)`, exact and reduced.
    pub fn term_ratio(&self, n: usize) -> Result<BigRational> {
        self.check_index(n, 1)?;
        Ok(BigRational::new(
            BigInt::from(self.terms[n].clone()),
            BigInt::from(self.terms[n - 1].clone()),
        ))
    }

    pub fn ratios(&self) -> impl Iterator<Item = BigRational> + '_ {
        (1..=self.horizon()).map(|n| self.term_ratio(n).expect("in range"))
    }
}

impl OrderFunction for VrSequence {
    fn order(&self, n: usize) -> usize {
        self.orders[n]
    }
}

pub fn term_ratio(seq: &VrSequence, n: usize) -> Result<BigRational> {
    seq.term_ratio(n)
}
