//! Closed-form per-step growth bounds, all in exact rational arithmetic.
//!
//! For `n ≥ 1` write `Δr(n) = r(n) - r(n-1)`,
//! `λ(n) = 1 + (r(n) - 1) / r(n-1)` and
//! `μ(n, s) = 2 + (Δr(n) - 1) · ∏_{k=n-s}^{n-1} 1/r(k)`. Then
//!
//! `min{λ(n), μ(n, r(n)-1)} ≤ b(n)/b(n-1) ≤ max{λ(n), μ(n, r(n-1))}`,
//!
//! and the position of the ratio relative to 1 and 2 is decided by `Δr(n)`
//! alone (see [`GrowthCase`]). `μ(n, 0)` uses the empty product, so the lower
//! bound is defined even when `r(n) = 1`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rspec::OrderFunction;
use crate::scalar::{format_ratio, ratio_int};
use crate::sequence::VrSequence;

fn out_of_range(index: usize, lo: usize, hi: usize) -> Error {
    Error::IndexOutOfRange {
        index: index as i64,
        lo: lo as i64,
        hi: hi as i64,
    }
}

fn need_positive(n: usize) -> Result<()> {
    if n == 0 {
        return Err(out_of_range(0, 1, usize::MAX >> 1));
    }
    Ok(())
}

/// `Δr(n) = r(n) - r(n-1)`.
pub fn delta_r<O: OrderFunction + ?Sized>(r: &O, n: usize) -> Result<i64> {
    need_positive(n)?;
    Ok(r.order(n) as i64 - r.order(n - 1) as i64)
}

/// `λ(n) = 1 + (r(n) - 1) / r(n-1)`.
pub fn lambda<O: OrderFunction + ?Sized>(r: &O, n: usize) -> Result<BigRational> {
    need_positive(n)?;
    let num = BigInt::from(r.order(n) - 1);
    let den = BigInt::from(r.order(n - 1));
    Ok(BigRational::one() + BigRational::new(num, den))
}

/// `μ(n, s) = 2 + (Δr(n) - 1) · ∏_{k=n-s}^{n-1} 1/r(k)`, defined for `1 ≤ n`, `0 ≤ s ≤ n`.
pub fn mu<O: OrderFunction + ?Sized>(r: &O, n: usize, s: usize) -> Result<BigRational> {
    need_positive(n)?;
    if s > n {
        return Err(out_of_range(s, 0, n));
    }
    let coeff = delta_r(r, n)? - 1;
    let two = ratio_int(2);
    if coeff == 0 {
        return Ok(two);
    }
    let den: BigUint = (n - s..n).map(|k| BigUint::from(r.order(k))).product();
    Ok(two + BigRational::new(BigInt::from(coeff), BigInt::from(den)))
}

/// Where `b(n)/b(n-1)` sits relative to 1 and 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthCase {
    /// ratio = 1, iff `r(n) = 1`
    Flat,
    /// 1 < ratio < 2, iff `1 - r(n-1) < Δr(n) < 1`
    SubDoubling,
    /// ratio = 2, iff `Δr(n) = 1`
    ExactDoubling,
    /// ratio > 2, iff `Δr(n) > 1`
    SuperDoubling,
}

impl GrowthCase {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthCase::Flat => "flat",
            GrowthCase::SubDoubling => "sub-doubling",
            GrowthCase::ExactDoubling => "exact-doubling",
            GrowthCase::SuperDoubling => "super-doubling",
        }
    }

    /// The case a measured ratio falls in.
    pub fn from_ratio(ratio: &BigRational) -> GrowthCase {
        let two = ratio_int(2);
        if ratio.is_one() {
            GrowthCase::Flat
        } else if *ratio < two {
            GrowthCase::SubDoubling
        } else if *ratio == two {
            GrowthCase::ExactDoubling
        } else {
            GrowthCase::SuperDoubling
        }
    }
}

/// Classifies step `n` from the orders alone.
pub fn growth_case<O: OrderFunction + ?Sized>(r: &O, n: usize) -> Result<GrowthCase> {
    let d = delta_r(r, n)?;
    let prev = r.order(n - 1) as i64;
    Ok(if d == 1 - prev {
        GrowthCase::Flat
    } else if d < 1 {
        GrowthCase::SubDoubling
    } else if d == 1 {
        GrowthCase::ExactDoubling
    } else {
        GrowthCase::SuperDoubling
    })
}

/// The quantities entering the sandwich at one index.
#[derive(Clone, Debug, PartialEq)]
pub struct StepBounds {
    pub lambda: BigRational,
    /// `μ(n, r(n) - 1)`
    pub mu_lower_arg: BigRational,
    /// `μ(n, r(n-1))`
    pub mu_upper_arg: BigRational,
    pub lower: BigRational,
    pub upper: BigRational,
}

pub fn step_bounds<O: OrderFunction + ?Sized>(r: &O, n: usize) -> Result<StepBounds> {
    let lam = lambda(r, n)?;
    let mu_lo = mu(r, n, r.order(n) - 1)?;
    let mu_hi = mu(r, n, r.order(n - 1))?;
    let lower = lam.clone().min(mu_lo.clone());
    let upper = lam.clone().max(mu_hi.clone());
    Ok(StepBounds {
        lambda: lam,
        mu_lower_arg: mu_lo,
        mu_upper_arg: mu_hi,
        lower,
        upper,
    })
}

/// `(min{λ(n), μ(n, r(n)-1)}, max{λ(n), μ(n, r(n-1))})`.
pub fn main_theorem_bounds<O: OrderFunction + ?Sized>(r: &O, n: usize) -> Result<(BigRational, BigRational)> {
    let b = step_bounds(r, n)?;
    Ok((b.lower, b.upper))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRecord {
    pub n: usize,
    pub r_n: usize,
    pub r_prev: usize,
    pub delta_r: i64,
    pub lambda: BigRational,
    pub mu_lower_arg: BigRational,
    pub mu_upper_arg: BigRational,
    pub lower: BigRational,
    pub upper: BigRational,
    pub actual: BigRational,
    pub case: GrowthCase,
}

impl BoundsRecord {
    pub fn violates(&self) -> bool {
        self.actual < self.lower || self.actual > self.upper
    }

    /// `true` if the case predicted from `Δr` matches the measured ratio.
    pub fn case_matches(&self) -> bool {
        GrowthCase::from_ratio(&self.actual) == self.case
    }

    pub fn row(&self) -> BoundsRow {
        BoundsRow {
            n: self.n,
            r: self.r_n,
            delta_r: self.delta_r,
            lambda: format_ratio(&self.lambda),
            mu_lo: format_ratio(&self.mu_lower_arg),
            mu_hi: format_ratio(&self.mu_upper_arg),
            lower: format_ratio(&self.lower),
            upper: format_ratio(&self.upper),
            actual: format_ratio(&self.actual),
            case: self.case,
        }
    }
}

/// Flat export form of a [`BoundsRecord`]; rationals are `p/q` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n: usize,
    pub r: usize,
    pub delta_r: i64,
    pub lambda: String,
    pub mu_lo: String,
    pub mu_hi: String,
    pub lower: String,
    pub upper: String,
    pub actual: String,
    pub case: GrowthCase,
}

pub fn bounds_record(seq: &VrSequence, n: usize) -> Result<BoundsRecord> {
    let actual = seq.term_ratio(n)?;
    let b = step_bounds(seq, n)?;
    Ok(BoundsRecord {
        n,
        r_n: seq.r(n),
        r_prev: seq.r(n - 1),
        delta_r: delta_r(seq, n)?,
        lambda: b.lambda,
        mu_lower_arg: b.mu_lower_arg,
        mu_upper_arg: b.mu_upper_arg,
        lower: b.lower,
        upper: b.upper,
        actual,
        case: growth_case(seq, n)?,
    })
}

/// One record per `n` in `[lo, hi]`; check [`BoundsRecord::violates`] on each.
pub fn verify_main_theorem(seq: &VrSequence, lo: usize, hi: usize) -> Result<Vec<BoundsRecord>> {
    if lo < 1 || lo > hi {
        return Err(out_of_range(lo, 1, hi));
    }
    seq.check_index(hi, 1)?;
    (lo..=hi).map(|n| bounds_record(seq, n)).collect()
}

/// Products of the per-step bounds over `k = 2..=n`; they bracket `b(n)`.
///
/// The upper bound is the product of the per-step maxima.
pub fn product_bounds<O: OrderFunction + ?Sized>(r: &O, n: usize) -> Result<(BigRational, BigRational)> {
    if n < 2 {
        return Err(out_of_range(n, 2, usize::MAX >> 1));
    }
    let mut lower = BigRational::one();
    let mut upper = BigRational::one();
    for k in 2..=n {
        let (lo, hi) = main_theorem_bounds(r, k)?;
        lower *= lo;
        upper *= hi;
    }
    Ok((lower, upper))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalBoundReport {
    /// Indices with `b(n) = 2^(n-1)`.
    pub tight: Vec<usize>,
    /// Indices with `b(n) > 2^(n-1)`; always empty for a correct engine.
    pub violations: Vec<usize>,
}

impl UniversalBoundReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares every `b(n)`, `n ≥ 1`, against `2^(n-1)`.
pub fn check_universal_bound(seq: &VrSequence) -> UniversalBoundReport {
    let mut tight = Vec::new();
    let mut violations = Vec::new();
    for n in 1..=seq.horizon() {
        let b = seq.term(n);
        let bits = b.bits();
        let n64 = n as u64;
        if bits < n64 {
            continue;
        }
        // bits == n with only the top bit set means exactly 2^(n-1)
        if bits == n64 && b.trailing_zeros() == Some(n64 - 1) {
            tight.push(n);
        } else {
            violations.push(n);
        }
    }
    UniversalBoundReport { tight, violations }
}

/// `b(n)/b(n-1) ≤ r(n)`.
pub fn check_ratio_at_most_order(seq: &VrSequence, n: usize) -> Result<bool> {
    let ratio = seq.term_ratio(n)?;
    Ok(ratio <= BigRational::from_integer(BigInt::from(seq.r(n))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TelescopingCheck {
    /// `b(n+m) / b(n)`
    pub ratio: BigRational,
    /// `∏_{k=n+1}^{n+m} r(k)`
    pub product: BigUint,
    pub upper_holds: bool,
    pub reciprocal_holds: bool,
}

impl TelescopingCheck {
    pub fn holds(&self) -> bool {
        self.upper_holds && self.reciprocal_holds
    }
}

/// `b(n+m)/b(n) ≤ ∏ r(k)` and `b(n)/b(n+m) ≥ ∏ 1/r(k)` over `k = n+1..=n+m`.
pub fn check_telescoping(seq: &VrSequence, n: usize, m: usize) -> Result<TelescopingCheck> {
    if n < 1 {
        return Err(out_of_range(n, 1, seq.horizon()));
    }
    if m < 1 {
        return Err(out_of_range(m, 1, seq.horizon()));
    }
    seq.check_index(n + m, 1)?;
    let hi = BigInt::from(seq.term(n + m).clone());
    let lo = BigInt::from(seq.term(n).clone());
    let product: BigUint = (n + 1..=n + m).map(|k| BigUint::from(seq.r(k))).product();
    let prod = BigRational::from_integer(BigInt::from(product.clone()));
    let ratio = BigRational::new(hi.clone(), lo.clone());
    let upper_holds = ratio <= prod;
    let reciprocal_holds = BigRational::new(lo, hi) >= prod.recip();
    Ok(TelescopingCheck {
        ratio,
        product,
        upper_holds,
        reciprocal_holds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstancyCheck {
    /// Every ratio in the window is below 2.
    pub hypothesis: bool,
    /// `r(n) ≤ r(n-1)` for every `n` in the window.
    pub non_increasing: bool,
}

impl ConstancyCheck {
    pub fn holds(&self) -> bool {
        !self.hypothesis || self.non_increasing
    }
}

/// Finite-window form of "ratios eventually below 2 force `r` eventually constant":
/// if `b(n)/b(n-1) < 2` on `[lo, hi]` then `r` does not increase there.
pub fn check_eventual_constancy(seq: &VrSequence, lo: usize, hi: usize) -> Result<ConstancyCheck> {
    if lo < 1 || lo > hi {
        return Err(out_of_range(lo, 1, hi));
    }
    seq.check_index(hi, 1)?;
    let two = ratio_int(2);
    let mut hypothesis = true;
    let mut non_increasing = true;
    for n in lo..=hi {
        if seq.term_ratio(n)? >= two {
            hypothesis = false;
        }
        if seq.r(n) > seq.r(n - 1) {
            non_increasing = false;
        }
    }
    Ok(ConstancyCheck {
        hypothesis,
        non_increasing,
    })
}

/// Both orderings between `μ` and `λ`:
/// `Δr ≤ 1 ⟹ μ(n, r(n)-1) ≥ λ(n)` and `Δr ≥ 1 ⟹ μ(n, r(n-1)) ≤ λ(n)`.
///
/// The first ordering fails whenever `r(n) = 1 < r(n-1)`: then
/// `μ(n, 0) = 2 - r(n-1) < 1 = λ(n)`. The check reports that literally.
pub fn check_mu_lambda_order<O: OrderFunction + ?Sized>(r: &O, n: usize) -> Result<bool> {
    let d = delta_r(r, n)?;
    let b = step_bounds(r, n)?;
    let first = d > 1 || b.mu_lower_arg >= b.lambda;
    let second = d < 1 || b.mu_upper_arg <= b.lambda;
    Ok(first && second)
}

/// The four one-sided estimates that the sandwich is assembled from.
pub fn check_one_sided_bounds(seq: &VrSequence, n: usize) -> Result<bool> {
    let d = delta_r(seq, n)?;
    let ratio = seq.term_ratio(n)?;
    let b = step_bounds(seq, n)?;
    let ok = match d {
        d if d > 1 => ratio <= b.lambda && ratio >= b.mu_lower_arg,
        d if d < 1 => ratio >= b.lambda && ratio <= b.mu_upper_arg,
        _ => ratio == ratio_int(2),
    };
    Ok(ok)
}
