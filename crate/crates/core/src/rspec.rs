//! Declarative order functions `r: ℕ → ℤ⁺`.
//!
//! An [`RSpec`] is a description of an order function. It may be any positive
//! function (extended sequences accept those); [`RSpec::validate`] certifies
//! the sublinearity rules `r(0) = 1`, `1 ≤ r(n) ≤ n` and hands back a
//! [`SublinearSpec`] that the sequence engine accepts.
//!
//! JSON schema (field `kind` selects the variant):
//!
//! | kind          | fields                                                       |
//! |---------------|--------------------------------------------------------------|
//! | `constant`    | `value`, `clamp` (default `true`: `r(0)=1`, `r(n)=min(value,n)`) |
//! | `identity`    | none; `r(0)=1`, `r(n)=n`                                     |
//! | `table`       | `values` (from `n = 0`), `tail`: `error` (default), `repeat-last`, `clamp-to-1` |
//! | `periodic`    | `prefix` (from `n = 0`), `cycle` repeated forever afterwards |
//! | `indicator`   | `set`: `powers-of-two`, `towers` (`2^(2^k)`) or `{"explicit": [..]}`; `r(n)=2` for members `n ≥ 2`, else 1 |
//! | `custom-step` | `pieces`: `[{start, slope, div, offset}]`, `r(n)=slope*floor(n/div)+offset` from `start` up to the next piece |

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probe length used for order functions that cannot be analysed symbolically.
pub const DEFAULT_PROBE: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RSpec {
    Constant {
        value: usize,
        #[serde(default = "default_clamp")]
        clamp: bool,
    },
    Identity,
    Table {
        values: Vec<usize>,
        #[serde(default)]
        tail: TailRule,
    },
    Periodic {
        prefix: Vec<usize>,
        cycle: Vec<usize>,
    },
    Indicator {
        set: IndicatorSet,
    },
    CustomStep {
        pieces: Vec<Piece>,
    },
    /// An arbitrary closure. Not serializable and never analysed symbolically.
    #[serde(skip)]
    Custom(CustomOrder),
}

fn default_clamp() -> bool {
    true
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailRule {
    #[default]
    Error,
    RepeatLast,
    #[serde(rename = "clamp-to-1")]
    ClampToOne,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndicatorSet {
    PowersOfTwo,
    Towers,
    Explicit(Vec<usize>),
}

impl IndicatorSet {
    pub fn contains(&self, n: usize) -> bool {
        match self {
            IndicatorSet::PowersOfTwo => n.is_power_of_two(),
            IndicatorSet::Towers => n.is_power_of_two() && n.trailing_zeros().is_power_of_two(),
            IndicatorSet::Explicit(members) => members.contains(&n),
        }
    }
}

/// One piece of a `custom-step` description: `r(n) = slope * floor(n / div) + offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub start: usize,
    #[serde(default)]
    pub slope: i64,
    #[serde(default = "default_div")]
    pub div: u64,
    pub offset: i64,
}

fn default_div() -> u64 {
    1
}

impl Piece {
    fn eval(&self, n: usize) -> i128 {
        i128::from(self.slope) * (n as i128 / i128::from(self.div)) + i128::from(self.offset)
    }
}

/// A named closure standing in for an order function with no declarative form.
#[derive(Clone)]
pub struct CustomOrder {
    pub name: String,
    f: Arc<dyn Fn(usize) -> usize + Send + Sync>,
}

impl CustomOrder {
    pub fn new(name: impl Into<String>, f: impl Fn(usize) -> usize + Send + Sync + 'static) -> Self {
        CustomOrder {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for CustomOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomOrder").field("name", &self.name).finish()
    }
}

impl PartialEq for CustomOrder {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f)
    }
}

/// A limsup/liminf value of `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limit {
    Finite(usize),
    Infinite,
}

/// Anything that can report `r(n)`.
pub trait OrderFunction {
    fn order(&self, n: usize) -> usize;
}

impl OrderFunction for [usize] {
    fn order(&self, n: usize) -> usize {
        self[n]
    }
}

impl OrderFunction for Vec<usize> {
    fn order(&self, n: usize) -> usize {
        self[n]
    }
}

impl<F: Fn(usize) -> usize> OrderFunction for F {
    fn order(&self, n: usize) -> usize {
        self(n)
    }
}

// `r(start + k*step) = base + k*slope` for `0 ≤ k ≤ count` (`None` = unbounded).
#[derive(Clone, Copy, Debug)]
struct Progression {
    start: i128,
    step: i128,
    count: Option<i128>,
    base: i128,
    slope: i128,
}

impl Progression {
    fn constant(lo: usize, hi: Option<usize>, value: i128) -> Self {
        Progression {
            start: lo as i128,
            step: 1,
            count: hi.map(|h| h as i128 - lo as i128),
            base: value,
            slope: 0,
        }
    }

    fn index(&self, k: i128) -> i128 {
        self.start + k * self.step
    }

    // Restricts to indices ≥ 1; `None` if nothing remains.
    fn from_one(self) -> Option<Self> {
        if self.start >= 1 {
            return Some(self);
        }
        let skip = (1 - self.start + self.step - 1) / self.step;
        let count = match self.count {
            Some(c) if c < skip => return None,
            Some(c) => Some(c - skip),
            None => None,
        };
        Some(Progression {
            start: self.index(skip),
            step: self.step,
            count,
            base: self.base + skip * self.slope,
            slope: self.slope,
        })
    }

    fn first_k(&self, excess0: i128, growth: i128) -> Option<i128> {
        // Smallest k with excess0 + k*growth > 0.
        let k = if excess0 > 0 {
            0
        } else if growth > 0 {
            (-excess0) / growth + 1
        } else {
            return None;
        };
        match self.count {
            Some(c) if k > c => None,
            _ => Some(k),
        }
    }

    fn first_nonpositive(&self) -> Option<i128> {
        // r < 1  ⇔  (1 - r) > 0
        self.first_k(1 - self.base, -self.slope).map(|k| self.index(k))
    }

    fn first_superlinear(&self) -> Option<i128> {
        // r(n) > n  ⇔  (r - n) > 0
        self.first_k(self.base - self.start, self.slope - self.step)
            .map(|k| self.index(k))
    }

    fn sup_excess(&self) -> Option<i128> {
        let e0 = self.base - self.start;
        let growth = self.slope - self.step;
        match self.count {
            None if growth > 0 => None,
            None => Some(e0),
            Some(c) => Some(e0.max(e0 + c * growth)),
        }
    }
}

enum Structure {
    Progressions(Vec<Progression>),
    Indicator,
    Opaque,
}

impl RSpec {
    pub fn constant(value: usize) -> Self {
        RSpec::Constant { value, clamp: true }
    }

    /// `r ≡ value`, including `r(0) = value`. Only valid for extended sequences
    /// unless `value == 1`.
    pub fn unclamped_constant(value: usize) -> Self {
        RSpec::Constant {
            value,
            clamp: false,
        }
    }

    pub fn identity() -> Self {
        RSpec::Identity
    }

    pub fn table(values: Vec<usize>, tail: TailRule) -> Self {
        RSpec::Table { values, tail }
    }

    pub fn periodic(prefix: Vec<usize>, cycle: Vec<usize>) -> Self {
        RSpec::Periodic { prefix, cycle }
    }

    pub fn indicator(set: IndicatorSet) -> Self {
        RSpec::Indicator { set }
    }

    pub fn custom_step(pieces: Vec<Piece>) -> Self {
        RSpec::CustomStep { pieces }
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(usize) -> usize + Send + Sync + 'static) -> Self {
        RSpec::Custom(CustomOrder::new(name, f))
    }

    /// `r(1) = 1` and `r(n) = 2` afterwards; generates the shifted Fibonacci numbers.
    pub fn fibonacci() -> Self {
        RSpec::constant(2)
    }

    /// `r(n) = n` for even `n ≥ 2`, `n - 1` for odd `n`.
    pub fn even_odd() -> Self {
        RSpec::custom_step(vec![
            Piece {
                start: 0,
                slope: 0,
                div: 1,
                offset: 1,
            },
            Piece {
                start: 2,
                slope: 2,
                div: 2,
                offset: 0,
            },
        ])
    }

    /// `r(n) = 2` for even `n ≥ 2`, `3` for odd `n ≥ 3`.
    pub fn alternating_two_three() -> Self {
        RSpec::periodic(vec![1, 1], vec![2, 3])
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Raw value of the description at `n`, before any positivity check.
    fn raw_at(&self, n: usize) -> Result<i128> {
        let v = match self {
            RSpec::Constant { value, clamp } => {
                if !*clamp {
                    *value as i128
                } else if n == 0 {
                    1
                } else {
                    (*value).min(n) as i128
                }
            }
            RSpec::Identity => n.max(1) as i128,
            RSpec::Table { values, tail } => match values.get(n) {
                Some(v) => *v as i128,
                None => match (tail, values.last()) {
                    (TailRule::RepeatLast, Some(last)) => *last as i128,
                    (TailRule::ClampToOne, _) => 1,
                    _ => return Err(Error::TableExhausted { n }),
                },
            },
            RSpec::Periodic { prefix, cycle } => match prefix.get(n) {
                Some(v) => *v as i128,
                None if cycle.is_empty() => {
                    return Err(Error::InvalidSpec("periodic cycle is empty".into()))
                }
                None => cycle[(n - prefix.len()) % cycle.len()] as i128,
            },
            RSpec::Indicator { set } => {
                if n >= 2 && set.contains(n) {
                    2
                } else {
                    1
                }
            }
            RSpec::CustomStep { pieces } => {
                let idx = pieces.partition_point(|p| p.start <= n);
                match idx.checked_sub(1) {
                    Some(i) => pieces[i].eval(n),
                    None => return Err(Error::InvalidSpec("no piece covers n = 0".into())),
                }
            }
            RSpec::Custom(c) => (c.f)(n) as i128,
        };
        Ok(v)
    }

    /// `r(n)`, failing when `r(n) < 1` or `n` is past a table's end.
    pub fn order_at(&self, n: usize) -> Result<usize> {
        let v = self.raw_at(n)?;
        if v < 1 {
            return Err(Error::ZeroOrder { n, r: v });
        }
        usize::try_from(v).map_err(|_| Error::InvalidSpec(format!("r({n}) = {v} overflows")))
    }

    /// Exclusive end of the domain on which `r` is defined, if finite.
    pub fn domain_end(&self) -> Option<usize> {
        match self {
            RSpec::Table {
                values,
                tail: TailRule::Error,
            } => Some(values.len()),
            _ => None,
        }
    }

    pub fn declared_limsup(&self) -> Option<Limit> {
        self.declared_limits().map(|(_, sup)| sup)
    }

    pub fn declared_liminf(&self) -> Option<Limit> {
        self.declared_limits().map(|(inf, _)| inf)
    }

    fn declared_limits(&self) -> Option<(Limit, Limit)> {
        use Limit::*;
        match self {
            RSpec::Constant { value, .. } => Some((Finite(*value), Finite(*value))),
            RSpec::Identity => Some((Infinite, Infinite)),
            RSpec::Table { values, tail } => match tail {
                TailRule::Error => None,
                TailRule::ClampToOne => Some((Finite(1), Finite(1))),
                TailRule::RepeatLast => values.last().map(|v| (Finite(*v), Finite(*v))),
            },
            RSpec::Periodic { cycle, .. } => {
                let lo = *cycle.iter().min()?;
                let hi = *cycle.iter().max()?;
                Some((Finite(lo), Finite(hi)))
            }
            RSpec::Indicator { set } => match set {
                IndicatorSet::Explicit(_) => Some((Finite(1), Finite(1))),
                _ => Some((Finite(1), Finite(2))),
            },
            RSpec::CustomStep { pieces } => {
                let last = pieces.last()?;
                match last.slope {
                    s if s > 0 => Some((Infinite, Infinite)),
                    0 if last.offset >= 1 => {
                        let v = last.offset as usize;
                        Some((Finite(v), Finite(v)))
                    }
                    _ => None,
                }
            }
            RSpec::Custom(_) => None,
        }
    }

    fn check_structure(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        match self {
            RSpec::Table { values, .. } if values.is_empty() => bad("table has no values"),
            RSpec::Periodic { cycle, .. } if cycle.is_empty() => bad("periodic cycle is empty"),
            RSpec::CustomStep { pieces } => {
                if pieces.first().map(|p| p.start) != Some(0) {
                    return bad("first piece must start at 0");
                }
                if pieces.windows(2).any(|w| w[0].start >= w[1].start) {
                    return bad("piece starts must be strictly increasing");
                }
                if pieces.iter().any(|p| p.div == 0) {
                    return bad("piece div must be at least 1");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn structure(&self) -> Structure {
        let mut out = Vec::new();
        match self {
            RSpec::Constant { value, clamp } => {
                let v = *value as i128;
                if !*clamp {
                    out.push(Progression::constant(0, None, v));
                } else if *value <= 1 {
                    out.push(Progression::constant(0, Some(0), 1));
                    out.push(Progression::constant(1, None, v));
                } else {
                    out.push(Progression::constant(0, Some(0), 1));
                    out.push(Progression {
                        start: 1,
                        step: 1,
                        count: Some(v - 2),
                        base: 1,
                        slope: 1,
                    });
                    out.push(Progression::constant(*value, None, v));
                }
            }
            RSpec::Identity => {
                out.push(Progression::constant(0, Some(0), 1));
                out.push(Progression {
                    start: 1,
                    step: 1,
                    count: None,
                    base: 1,
                    slope: 1,
                });
            }
            RSpec::Table { values, tail } => {
                for (n, v) in values.iter().enumerate() {
                    out.push(Progression::constant(n, Some(n), *v as i128));
                }
                let len = values.len();
                match (tail, values.last()) {
                    (TailRule::RepeatLast, Some(last)) => {
                        out.push(Progression::constant(len, None, *last as i128))
                    }
                    (TailRule::ClampToOne, _) => out.push(Progression::constant(len, None, 1)),
                    _ => {}
                }
            }
            RSpec::Periodic { prefix, cycle } => {
                for (n, v) in prefix.iter().enumerate() {
                    out.push(Progression::constant(n, Some(n), *v as i128));
                }
                for (i, v) in cycle.iter().enumerate() {
                    out.push(Progression {
                        start: (prefix.len() + i) as i128,
                        step: cycle.len() as i128,
                        count: None,
                        base: *v as i128,
                        slope: 0,
                    });
                }
            }
            RSpec::Indicator { .. } => return Structure::Indicator,
            RSpec::CustomStep { pieces } => {
                for (i, p) in pieces.iter().enumerate() {
                    let lo = p.start as i128;
                    let hi = pieces.get(i + 1).map(|q| q.start as i128 - 1);
                    let div = i128::from(p.div);
                    for residue in 0..div {
                        let first = lo + (residue - lo).rem_euclid(div);
                        if hi.is_some_and(|h| first > h) {
                            continue;
                        }
                        out.push(Progression {
                            start: first,
                            step: div,
                            count: hi.map(|h| (h - first) / div),
                            base: p.eval(first as usize),
                            slope: i128::from(p.slope),
                        });
                    }
                }
            }
            RSpec::Custom(_) => return Structure::Opaque,
        }
        Structure::Progressions(out)
    }

    /// Earliest `n` with `r(n) < 1`, found symbolically where possible and by
    /// probing `[0, probe]` otherwise.
    fn first_nonpositive(&self, structure: &Structure, probe: usize) -> Result<Option<usize>> {
        Ok(match structure {
            Structure::Progressions(ps) => ps
                .iter()
                .filter_map(Progression::first_nonpositive)
                .min()
                .map(|n| n as usize),
            Structure::Indicator => None,
            Structure::Opaque => {
                let mut hit = None;
                for n in 0..=probe {
                    if self.raw_at(n)? < 1 {
                        hit = Some(n);
                        break;
                    }
                }
                hit
            }
        })
    }

    /// Checks that `r(n) ≥ 1` wherever `r` is defined.
    pub fn check_positive(&self) -> Result<()> {
        self.check_structure()?;
        let structure = self.structure();
        if let Some(n) = self.first_nonpositive(&structure, DEFAULT_PROBE)? {
            return Err(Error::ZeroOrder {
                n,
                r: self.raw_at(n)?,
            });
        }
        Ok(())
    }

    /// `sup_{n ∈ ℕ} (r(n) − n)`, derived from the structure of the description.
    pub fn sup_excess(&self) -> Result<i128> {
        self.check_positive()?;
        match self.structure() {
            Structure::Opaque => Err(Error::UnderivableSup),
            // r(0) = 1 and r(n) ≤ 2 ≤ n + 1 afterwards.
            Structure::Indicator => Ok(1),
            Structure::Progressions(ps) => ps.iter().try_fold(i128::MIN, |acc, p| {
                p.sup_excess().map(|e| acc.max(e)).ok_or(Error::UnboundedSup)
            }),
        }
    }

    pub fn validate(&self) -> Result<SublinearSpec> {
        self.validate_with_probe(DEFAULT_PROBE)
    }

    /// Certifies `r(0) = 1` and `1 ≤ r(n) ≤ n` for `n ≥ 1`.
    ///
    /// Declarative kinds are checked on their whole domain symbolically. Opaque
    /// closures can only be probed on `[0, probe]`, and the result is marked
    /// uncertified.
    pub fn validate_with_probe(&self, probe: usize) -> Result<SublinearSpec> {
        self.check_structure()?;
        let structure = self.structure();
        if let Some(n) = self.first_nonpositive(&structure, probe)? {
            return Err(Error::ZeroOrder {
                n,
                r: self.raw_at(n)?,
            });
        }
        let r0 = self.order_at(0)?;
        if r0 != 1 {
            return Err(Error::Origin { r0 });
        }
        let violation = match &structure {
            Structure::Progressions(ps) => ps
                .iter()
                .filter_map(|p| p.from_one())
                .filter_map(|p| p.first_superlinear())
                .min()
                .map(|n| n as usize),
            Structure::Indicator => None,
            Structure::Opaque => {
                let mut hit = None;
                for n in 1..=probe {
                    if self.order_at(n)? > n {
                        hit = Some(n);
                        break;
                    }
                }
                hit
            }
        };
        if let Some(n) = violation {
            return Err(Error::SublinearityViolation {
                n,
                r: self.order_at(n)?,
            });
        }
        Ok(SublinearSpec {
            spec: self.clone(),
            certified: !matches!(structure, Structure::Opaque),
        })
    }
}

/// Free-function form of [`RSpec::validate`].
pub fn validate_rspec(raw: &RSpec) -> Result<SublinearSpec> {
    raw.validate()
}

/// An order function known to satisfy `r(0) = 1` and `1 ≤ r(n) ≤ n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SublinearSpec {
    spec: RSpec,
    certified: bool,
}

impl SublinearSpec {
    pub fn spec(&self) -> &RSpec {
        &self.spec
    }

    /// `true` when sublinearity was proven on the whole domain, `false` when
    /// only a probe window was checked.
    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn try_r_at(&self, n: usize) -> Result<usize> {
        self.spec.order_at(n)
    }

    /// `r(n)`.
    ///
    /// Panics past the end of an `error`-tail table; use [`Self::try_r_at`] or
    /// [`Self::domain_end`] when that can happen.
    pub fn r_at(&self, n: usize) -> usize {
        match self.spec.order_at(n) {
            Ok(r) => r,
            Err(e) => panic!("r({n}) undefined: {e}"),
        }
    }

    pub fn domain_end(&self) -> Option<usize> {
        self.spec.domain_end()
    }

    pub fn declared_limsup(&self) -> Option<Limit> {
        self.spec.declared_limsup()
    }

    pub fn declared_liminf(&self) -> Option<Limit> {
        self.spec.declared_liminf()
    }
}

impl OrderFunction for SublinearSpec {
    fn order(&self, n: usize) -> usize {
        self.r_at(n)
    }
}
