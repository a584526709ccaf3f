//! Dominant roots and long-run growth of generated sequences.
//!
//! Every statement here about limits is a finite-horizon proxy: it inspects an
//! explicit window of exact ratios and reports the evidence it used.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::bounds::lambda;
use crate::error::{Error, Result};
use crate::rspec::Limit;
use crate::scalar::{ratio_from_u64, ratio_int, Scalar};
use crate::sequence::VrSequence;

/// Iteration cap for bisection.
pub const MAX_BISECTION_STEPS: usize = 200;
/// Default bracket width for [`alpha_root`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Default spread below which tail ratios count as converged.
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-6;
/// Default share of the horizon used as the tail window.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;
/// Minimum horizon accepted by [`classify_growth`].
pub const MIN_CLASSIFY_HORIZON: usize = 100;

/// `x^R - x^(R-1) - … - x - 1` by Horner's rule.
pub fn characteristic_poly<T: Scalar>(order: usize, x: &T) -> T {
    let mut acc = T::one();
    for _ in 0..order {
        acc = acc * x.clone() - T::one();
    }
    acc
}

/// The dominant root `α_R` of `x^R - x^(R-1) - … - 1`.
///
/// `α_1 = 1`; for `R ≥ 2` the root is the unique one in `(1, 2)` and is found
/// by bisection until the bracket is narrower than `tol`. With
/// `T = BigRational` the returned midpoint is an exact dyadic rational.
pub fn alpha_root<T: Scalar>(order: usize, tol: &T) -> Result<T> {
    if order == 0 {
        return Err(Error::InvalidOrder(0));
    }
    if *tol <= T::zero() {
        return Err(Error::InvalidArgument("root tolerance must be positive".into()));
    }
    if order == 1 {
        return Ok(T::one());
    }
    let mut lo = T::one();
    let mut hi = T::one() + T::one();
    for _ in 0..MAX_BISECTION_STEPS {
        if hi.clone() - lo.clone() <= *tol {
            break;
        }
        let mid = (lo.clone() + hi.clone()) * T::half();
        // precision exhausted
        if mid <= lo || mid >= hi {
            break;
        }
        if characteristic_poly(order, &mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) * T::half())
}

/// Tail-window summary of `b(n)/b(n-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitEstimate<T> {
    /// The last ratio of the window.
    pub value: T,
    pub window: (usize, usize),
    pub min: BigRational,
    pub max: BigRational,
    pub spread: T,
    pub converged: bool,
}

/// Ratios are compared exactly; only `value` and `spread` are converted to `T`.
pub fn estimate_ratio_limit<T: Scalar>(seq: &VrSequence, tail_fraction: f64, tol: &T) -> Result<LimitEstimate<T>> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tail fraction {tail_fraction} not in (0, 1)"
        )));
    }
    let horizon = seq.horizon();
    let count = (horizon as f64 * tail_fraction).floor() as usize;
    if count < 10 {
        let needed = (10.0 / tail_fraction).ceil() as usize;
        return Err(Error::InsufficientHorizon { horizon, needed });
    }
    let lo = horizon - count + 1;
    let mut min: Option<BigRational> = None;
    let mut max: Option<BigRational> = None;
    let mut last = BigRational::one();
    for n in lo..=horizon {
        let q = seq.term_ratio(n)?;
        if min.as_ref().is_none_or(|m| q < *m) {
            min = Some(q.clone());
        }
        if max.as_ref().is_none_or(|m| q > *m) {
            max = Some(q.clone());
        }
        last = q;
    }
    let (min, max) = (min.expect("non-empty"), max.expect("non-empty"));
    let spread = T::from_ratio(&(max.clone() - min.clone()));
    let converged = spread < *tol;
    Ok(LimitEstimate {
        value: T::from_ratio(&last),
        window: (lo, horizon),
        min,
        max,
        spread,
        converged,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiminfCheck {
    pub min_ratio: BigRational,
    /// The window is long enough (`hi ≥ 2·lo - 1`) that a ratio ≤ 2 must occur in it.
    pub guaranteed: bool,
}

impl LiminfCheck {
    pub fn holds(&self) -> bool {
        self.min_ratio <= ratio_int(2)
    }
}

/// Smallest ratio on `[lo, hi]`, to be compared against 2.
///
/// A run of steps with ratio above 2 starting at `lo` lasts at most `lo - 1`
/// steps, so windows with `hi ≥ 2·lo - 1` always hold. Shorter windows may
/// legitimately sit inside such a run.
pub fn check_liminf_bound(seq: &VrSequence, lo: usize, hi: usize) -> Result<LiminfCheck> {
    if lo < 1 || lo > hi {
        return Err(Error::IndexOutOfRange {
            index: lo as i64,
            lo: 1,
            hi: hi as i64,
        });
    }
    seq.check_index(hi, 1)?;
    let min_ratio = (lo..=hi)
        .map(|n| seq.term_ratio(n))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .expect("non-empty window");
    Ok(LiminfCheck {
        min_ratio,
        guaranteed: hi + 1 >= 2 * lo,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProbe {
    pub window: (usize, usize),
    /// extrema and last value of `b(n)/n` over the window
    pub min: BigRational,
    pub max: BigRational,
    pub last: BigRational,
}

impl LinearProbe {
    pub fn spread(&self) -> BigRational {
        self.max.clone() - self.min.clone()
    }
}

/// `b(n)/n` per window.
pub fn linear_limit_probe(seq: &VrSequence, windows: &[(usize, usize)]) -> Result<Vec<LinearProbe>> {
    windows
        .iter()
        .map(|&(lo, hi)| {
            if lo < 1 || lo > hi {
                return Err(Error::IndexOutOfRange {
                    index: lo as i64,
                    lo: 1,
                    hi: hi as i64,
                });
            }
            seq.check_index(hi, 1)?;
            let values: Vec<BigRational> = (lo..=hi)
                .map(|n| BigRational::new(BigInt::from(seq.term(n).clone()), BigInt::from(n)))
                .collect();
            Ok(LinearProbe {
                window: (lo, hi),
                min: values.iter().min().cloned().expect("non-empty"),
                max: values.iter().max().cloned().expect("non-empty"),
                last: values.last().cloned().expect("non-empty"),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialCheck {
    /// `1 + (m - 1)/M`
    pub base: BigRational,
    pub min_ratio: BigRational,
    /// `b(hi)/b(lo-1) ≥ base^(hi-lo+1)`
    pub growth_holds: bool,
}

impl ExponentialCheck {
    pub fn holds(&self) -> bool {
        self.min_ratio >= self.base && self.growth_holds
    }
}

/// With `m ≤ r ≤ M` on `[lo-1, hi]`, every ratio on `[lo, hi]` is at least
/// `λ`'s floor `1 + (m-1)/M`, hence `b` grows at least like that base.
pub fn check_exponential_lower(seq: &VrSequence, m: usize, big_m: usize, lo: usize, hi: usize) -> Result<ExponentialCheck> {
    if m < 2 || m > big_m {
        return Err(Error::InvalidArgument(format!(
            "need 2 ≤ m ≤ M, got m = {m}, M = {big_m}"
        )));
    }
    if lo < 1 || lo > hi {
        return Err(Error::IndexOutOfRange {
            index: lo as i64,
            lo: 1,
            hi: hi as i64,
        });
    }
    seq.check_index(hi, 1)?;
    for n in lo - 1..=hi {
        let r = seq.r(n);
        if r < m || r > big_m {
            return Err(Error::HypothesisViolation {
                n,
                r,
                lo: m,
                hi: big_m,
            });
        }
    }
    let base = BigRational::one() + ratio_from_u64(m as u64 - 1, big_m as u64);
    let mut min_ratio: Option<BigRational> = None;
    for n in lo..=hi {
        let q = seq.term_ratio(n)?;
        debug_assert!(lambda(seq, n)? >= base);
        if min_ratio.as_ref().is_none_or(|x| q < *x) {
            min_ratio = Some(q);
        }
    }
    let total = BigRational::new(
        BigInt::from(seq.term(hi).clone()),
        BigInt::from(seq.term(lo - 1).clone()),
    );
    let growth_holds = total >= num_traits::pow(base.clone(), hi - lo + 1);
    Ok(ExponentialCheck {
        base,
        min_ratio: min_ratio.expect("non-empty window"),
        growth_holds,
    })
}

/// `[2 - 1/R, 2 - R^(-R)]`, the band holding R-bonacci ratios once the
/// recursion has run for `2R` steps.
pub fn r_bonacci_ratio_band(order: usize) -> (BigRational, BigRational) {
    let r = BigInt::from(order);
    let two = ratio_int(2);
    let lo = two.clone() - BigRational::new(BigInt::one(), r.clone());
    let hi = two - BigRational::new(BigInt::one(), num_traits::pow(r, order));
    (lo, hi)
}

/// Sub-exponential growth diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlowGrowthDiagnostics {
    /// Least-squares slope of `ln b(n)` against `ln n` over `[2, N]`.
    pub fitted_exponent: f64,
    pub regime: SlowRegime,
    /// `[min, max]` of `b(n)/n` over the evidence window
    pub b_over_n: (f64, f64),
    /// `[min, max]` of `b(n)/log2(n)` over the evidence window
    pub b_over_log2n: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlowRegime {
    Polynomial,
    Logarithmic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum GrowthClass {
    EventuallyConstant,
    ConvergesToAlpha { order: usize },
    ConvergesToTwo,
    SlowGrowth(SlowGrowthDiagnostics),
    /// Ratios do not settle in the window, or the evidence is contradictory.
    Oscillating,
}

impl GrowthClass {
    pub fn name(&self) -> &'static str {
        match self {
            GrowthClass::EventuallyConstant => "eventually-constant",
            GrowthClass::ConvergesToAlpha { .. } => "converges-to-alpha",
            GrowthClass::ConvergesToTwo => "converges-to-two",
            GrowthClass::SlowGrowth(_) => "slow-growth",
            GrowthClass::Oscillating => "oscillating",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    #[serde(flatten)]
    pub class: GrowthClass,
    pub evidence_window: (usize, usize),
    pub estimate: f64,
    pub spread: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_ref: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub tail_fraction: f64,
    /// spread threshold for convergence, and distance allowed from `α_R` or 2
    pub tol: f64,
    /// `ln b(N) / ln N` at or below which growth counts as slow
    pub max_poly_degree: f64,
    /// fitted exponent below which slow growth is reported as logarithmic
    pub log_regime_exponent: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tail_fraction: DEFAULT_TAIL_FRACTION,
            tol: DEFAULT_CONVERGENCE_TOL,
            max_poly_degree: 2.0,
            log_regime_exponent: 0.5,
        }
    }
}

fn ln_big(b: &num_bigint::BigUint) -> f64 {
    // ln b = ln(mantissa) + shift·ln 2, keeping 60 top bits
    let bits = b.bits();
    let shift = bits.saturating_sub(60);
    let top = (b >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn slow_diagnostics(seq: &VrSequence, window: (usize, usize), opts: &ClassifyOptions) -> SlowGrowthDiagnostics {
    let horizon = seq.horizon();
    let (mut sx, mut sy, mut sxx, mut sxy, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for n in 2..=horizon {
        let x = (n as f64).ln();
        let y = ln_big(seq.term(n));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        count += 1.0;
    }
    let denom = count * sxx - sx * sx;
    let fitted_exponent = if denom > 0.0 {
        (count * sxy - sx * sy) / denom
    } else {
        0.0
    };
    let mut b_over_n = (f64::INFINITY, f64::NEG_INFINITY);
    let mut b_over_log = (f64::INFINITY, f64::NEG_INFINITY);
    for n in window.0.max(2)..=window.1 {
        let b = seq.term(n).to_f64().unwrap_or(f64::INFINITY);
        let v = b / n as f64;
        let w = b / (n as f64).log2();
        b_over_n = (b_over_n.0.min(v), b_over_n.1.max(v));
        b_over_log = (b_over_log.0.min(w), b_over_log.1.max(w));
    }
    let regime = if fitted_exponent < opts.log_regime_exponent {
        SlowRegime::Logarithmic
    } else {
        SlowRegime::Polynomial
    };
    SlowGrowthDiagnostics {
        fitted_exponent,
        regime,
        b_over_n,
        b_over_log2n: b_over_log,
    }
}

/// Finite-horizon classification of the long-run growth of `seq`.
///
/// Decision order:
/// 1. `r = 1` on the final half and declared `limsup r = 1`: eventually constant.
/// 2. `r = R ≥ 2` on the final half: ratios must approach `α_R`.
/// 3. Tail ratios converged, `r` not eventually constant, estimate near 2: converges to 2.
/// 4. `ln b(N)/ln N` at most `max_poly_degree`: slow growth.
/// 5. Otherwise oscillating or inconclusive.
pub fn classify_growth(seq: &VrSequence, opts: &ClassifyOptions) -> Result<GrowthReport> {
    let horizon = seq.horizon();
    if horizon < MIN_CLASSIFY_HORIZON {
        return Err(Error::InsufficientHorizon {
            horizon,
            needed: MIN_CLASSIFY_HORIZON,
        });
    }
    let est = estimate_ratio_limit::<f64>(seq, opts.tail_fraction, &opts.tol)?;
    let half = (horizon / 2, horizon);
    let tail_orders = &seq.orders()[half.0..=half.1];
    let tail_constant = tail_orders.iter().all(|&r| r == tail_orders[0]).then(|| tail_orders[0]);
    let spec = seq.spec();
    let report = |class, alpha_ref| GrowthReport {
        class,
        evidence_window: est.window,
        estimate: est.value,
        spread: est.spread,
        alpha_ref,
    };

    if tail_constant == Some(1) && spec.declared_limsup() == Some(Limit::Finite(1)) {
        return Ok(report(GrowthClass::EventuallyConstant, None));
    }
    if let Some(order) = tail_constant.filter(|&r| r >= 2) {
        let alpha = alpha_root::<f64>(order, &DEFAULT_ROOT_TOL)?;
        let class = if (est.value - alpha).abs() < opts.tol {
            GrowthClass::ConvergesToAlpha { order }
        } else {
            GrowthClass::Oscillating
        };
        return Ok(report(class, Some(alpha)));
    }
    let declared_constant = match (spec.declared_liminf(), spec.declared_limsup()) {
        (Some(Limit::Finite(a)), Some(Limit::Finite(b))) => a == b,
        _ => false,
    };
    let eventually_constant = tail_constant.is_some() && declared_constant;
    if est.converged && !eventually_constant && (est.value - 2.0).abs() < opts.tol {
        return Ok(report(GrowthClass::ConvergesToTwo, None));
    }
    let last = seq.term(horizon);
    let degree = if last.is_zero() {
        0.0
    } else {
        ln_big(last) / (horizon as f64).ln()
    };
    if degree <= opts.max_poly_degree {
        let diag = slow_diagnostics(seq, half, opts);
        return Ok(report(GrowthClass::SlowGrowth(diag), None));
    }
    Ok(report(GrowthClass::Oscillating, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rspec::{IndicatorSet, RSpec};
    use crate::sequence::generate;

    fn seq(spec: RSpec, n: usize) -> VrSequence {
        generate(&spec.validate().unwrap(), n).unwrap()
    }

    #[test]
    fn alpha_values() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((alpha_root::<f64>(2, &1e-12).unwrap() - phi).abs() < 1e-12);
        assert_eq!(alpha_root::<f64>(1, &1e-12).unwrap(), 1.0);
        assert!((alpha_root::<f64>(3, &1e-12).unwrap() - 1.839_286_755_214_161).abs() < 1e-11);
        assert!(matches!(alpha_root::<f64>(0, &1e-12), Err(Error::InvalidOrder(0))));
        assert!(alpha_root::<f64>(2, &0.0).is_err());
    }

    #[test]
    fn alpha_in_f32_and_exact() {
        let a32 = alpha_root::<f32>(2, &1e-6).unwrap();
        assert!((a32 - 1.618_034).abs() < 1e-5);
        let tol = ratio_from_u64(1, 1 << 50);
        let exact = alpha_root::<BigRational>(2, &tol).unwrap();
        // exact bracket check: p(x) changes sign within tol of the midpoint
        let half = tol.clone() / ratio_int(2);
        assert!(characteristic_poly(2, &(exact.clone() - half.clone())) < BigRational::zero());
        assert!(characteristic_poly(2, &(exact.clone() + half)) > BigRational::zero());
    }

    #[test]
    fn estimates() {
        let fib = seq(RSpec::fibonacci(), 200);
        let e = estimate_ratio_limit::<f64>(&fib, 0.2, &1e-9).unwrap();
        assert!((e.value - 1.618_034).abs() < 1e-6);
        assert!(e.converged);
        assert_eq!(e.window, (161, 200));
        let eo = seq(RSpec::even_odd(), 200);
        let e = estimate_ratio_limit::<f64>(&eo, 0.2, &1e-6).unwrap();
        assert!(e.converged && (e.value - 2.0).abs() < 1e-9);
        let alt = seq(RSpec::alternating_two_three(), 200);
        let e = estimate_ratio_limit::<BigRational>(&alt, 0.2, &ratio_from_u64(1, 1_000_000)).unwrap();
        assert_eq!(e.spread, ratio_from_u64(1, 2));
        assert!(!e.converged);
        assert!(matches!(
            estimate_ratio_limit::<f64>(&seq(RSpec::fibonacci(), 40), 0.2, &1e-6),
            Err(Error::InsufficientHorizon { horizon: 40, needed: 50 })
        ));
    }

    #[test]
    fn liminf() {
        let id = seq(RSpec::identity(), 100);
        let c = check_liminf_bound(&id, 2, 100).unwrap();
        assert_eq!(c.min_ratio, ratio_int(2));
        assert!(c.holds() && c.guaranteed);
        let one = seq(RSpec::constant(1), 30);
        assert_eq!(check_liminf_bound(&one, 5, 9).unwrap().min_ratio, ratio_int(1));
        // a short window inside a run of super-doubling steps
        let run = RSpec::table(vec![1, 1, 1, 1, 1, 1, 1, 3, 5, 7], crate::rspec::TailRule::Error);
        let s = seq(run, 9);
        let c = check_liminf_bound(&s, 8, 9).unwrap();
        assert!(!c.holds() && !c.guaranteed);
    }

    #[test]
    fn linear_probe_powers_of_two() {
        let s = seq(RSpec::indicator(IndicatorSet::PowersOfTwo), 4096);
        let probes = linear_limit_probe(&s, &[(1, 4096), (2048, 4095)]).unwrap();
        assert_eq!(probes[0].min, ratio_from_u64(1, 2) + ratio_from_u64(1, 2 * 4095));
        assert_eq!(probes[0].max, ratio_int(1));
        for k in 1..12 {
            let n = 1usize << k;
            assert_eq!(s.term(n), &num_bigint::BigUint::from(n));
        }
        let one = seq(RSpec::constant(1), 1000);
        let p = linear_limit_probe(&one, &[(900, 1000)]).unwrap();
        assert_eq!(p[0].last, ratio_from_u64(1, 1000));
        assert!(linear_limit_probe(&one, &[(0, 10)]).is_err());
    }

    #[test]
    fn exponential_lower() {
        let fib = seq(RSpec::fibonacci(), 100);
        let c = check_exponential_lower(&fib, 2, 2, 3, 100).unwrap();
        assert_eq!(c.base, ratio_from_u64(3, 2));
        assert_eq!(c.min_ratio, ratio_from_u64(3, 2));
        assert!(c.holds());
        let tri = seq(RSpec::constant(3), 100);
        let c = check_exponential_lower(&tri, 3, 3, 4, 100).unwrap();
        assert_eq!(c.base, ratio_from_u64(5, 3));
        assert!(c.holds());
        let alt = seq(RSpec::alternating_two_three(), 100);
        let c = check_exponential_lower(&alt, 2, 3, 3, 100).unwrap();
        assert_eq!(c.base, ratio_from_u64(4, 3));
        assert_eq!(c.min_ratio, ratio_from_u64(3, 2));
        assert!(c.holds());
        assert!(matches!(
            check_exponential_lower(&alt, 3, 3, 3, 100),
            Err(Error::HypothesisViolation { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let opts = ClassifyOptions::default();
        let r = classify_growth(&seq(RSpec::fibonacci(), 200), &opts).unwrap();
        assert_eq!(r.class, GrowthClass::ConvergesToAlpha { order: 2 });
        let r = classify_growth(&seq(RSpec::constant(1), 200), &opts).unwrap();
        assert_eq!(r.class, GrowthClass::EventuallyConstant);
        let r = classify_growth(&seq(RSpec::identity(), 200), &opts).unwrap();
        assert_eq!(r.class, GrowthClass::ConvergesToTwo);
        let r = classify_growth(&seq(RSpec::even_odd(), 200), &opts).unwrap();
        assert_eq!(r.class, GrowthClass::ConvergesToTwo);
        let r = classify_growth(&seq(RSpec::alternating_two_three(), 200), &opts).unwrap();
        assert_eq!(r.class, GrowthClass::Oscillating);
        let r = classify_growth(&seq(RSpec::indicator(IndicatorSet::PowersOfTwo), 1000), &opts).unwrap();
        match r.class {
            GrowthClass::SlowGrowth(d) => {
                assert_eq!(d.regime, SlowRegime::Polynomial);
                assert!(d.b_over_n.0 >= 0.5 && d.b_over_n.1 <= 1.0);
            }
            other => panic!("{other:?}"),
        }
        let r = classify_growth(&seq(RSpec::indicator(IndicatorSet::Towers), 1000), &opts).unwrap();
        match r.class {
            GrowthClass::SlowGrowth(d) => assert_eq!(d.regime, SlowRegime::Logarithmic),
            other => panic!("{other:?}"),
        }
        assert!(classify_growth(&seq(RSpec::fibonacci(), 99), &opts).is_err());
    }

    #[test]
    fn report_json_shape() {
        let r = classify_growth(&seq(RSpec::fibonacci(), 200), &ClassifyOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["class"], "converges-to-alpha");
        assert_eq!(v["order"], 2);
        assert!(v["alpha_ref"].as_f64().is_some());
        assert_eq!(v["evidence_window"], serde_json::json!([161, 200]));
    }

    #[test]
    fn ratio_band() {
        let (lo, hi) = r_bonacci_ratio_band(2);
        assert_eq!((lo, hi), (ratio_from_u64(3, 2), ratio_from_u64(7, 4)));
    }
}
