//! Reference sequences for comparison: R-bonacci numbers and three
//! self-referential recursions (Hofstadter Q, Conway, `T_{a,k}`).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rspec::RSpec;
use crate::scalar::ratio_from_u64;
use crate::sequence::generate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassicalKind {
    Fibonacci,
    RBonacci { order: usize },
    HofstadterQ,
    Conway,
    Tak { a: usize, k: usize },
}

impl ClassicalKind {
    pub fn label(&self) -> String {
        match self {
            ClassicalKind::Fibonacci => "fibonacci".into(),
            ClassicalKind::RBonacci { order } => format!("r-bonacci:{order}"),
            ClassicalKind::HofstadterQ => "hofstadter-q".into(),
            ClassicalKind::Conway => "conway".into(),
            ClassicalKind::Tak { a, k } => format!("tak:{a}:{k}"),
        }
    }
}

/// Which normalized quantity tends to `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitQuantity {
    /// `t(n)/n`
    TermOverIndex,
    /// `t(n)/t(n-1)`, known only as the root of a polynomial
    SuccessiveRatio,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KnownLimit {
    pub quantity: LimitQuantity,
    /// exact value when rational
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_ratio")]
    pub exact: Option<BigRational>,
    pub approx: f64,
    pub citation: &'static str,
}

mod opt_ratio {
    use num_rational::BigRational;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&crate::scalar::format_ratio(r)),
            None => s.serialize_none(),
        }
    }
}

/// Terms `t(offset), …, t(offset + len - 1)`.
#[derive(Clone, Debug)]
pub struct ClassicalSequence {
    pub kind: ClassicalKind,
    /// index of the first stored term
    pub offset: usize,
    pub terms: Vec<BigUint>,
    pub known_limit: Option<KnownLimit>,
}

impl ClassicalSequence {
    pub fn first_index(&self) -> usize {
        self.offset
    }

    pub fn last_index(&self) -> usize {
        self.offset + self.terms.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<&BigUint> {
        n.checked_sub(self.offset).and_then(|i| self.terms.get(i))
    }

    fn at(&self, n: usize) -> &BigUint {
        &self.terms[n - self.offset]
    }

    fn small(&self, n: usize) -> usize {
        self.at(n).to_usize().expect("self-referential terms stay below their index")
    }

    /// Index of the first region where the recursion applies.
    pub fn recursion_start(&self) -> usize {
        match self.kind {
            ClassicalKind::Fibonacci => 1,
            ClassicalKind::RBonacci { .. } => 1,
            ClassicalKind::HofstadterQ | ClassicalKind::Conway => 3,
            ClassicalKind::Tak { a, k } => a + k + 1,
        }
    }

    /// Re-evaluates the defining recursion at `n` by direct substitution.
    pub fn verify_at(&self, n: usize) -> Result<bool> {
        if n < self.recursion_start() || n > self.last_index() {
            return Err(Error::IndexOutOfRange {
                index: n as i64,
                lo: self.recursion_start() as i64,
                hi: self.last_index() as i64,
            });
        }
        let expected = match self.kind {
            ClassicalKind::Fibonacci | ClassicalKind::RBonacci { .. } => {
                let order = match self.kind {
                    ClassicalKind::RBonacci { order } => order,
                    _ => 2,
                };
                // ramp-up embedding: r(n) = min(n, R)
                let r = order.min(n);
                (1..=r).fold(BigUint::zero(), |acc, k| acc + self.at(n - k))
            }
            ClassicalKind::HofstadterQ => {
                let i = n - self.small(n - 1);
                let j = n - self.small(n - 2);
                self.at(i) + self.at(j)
            }
            ClassicalKind::Conway => {
                let prev = self.small(n - 1);
                self.at(prev) + self.at(n - prev)
            }
            ClassicalKind::Tak { a, k } => {
                let mut acc = BigUint::zero();
                for i in 0..k {
                    acc += self.at(n - i - a - self.small(n - i - 1));
                }
                acc
            }
        };
        Ok(&expected == self.at(n))
    }

    /// `t(n)/n`.
    pub fn term_over_index(&self, n: usize) -> Option<BigRational> {
        if n == 0 {
            return None;
        }
        self.get(n)
            .map(|t| BigRational::new(BigInt::from(t.clone()), BigInt::from(n)))
    }

    /// First `n` with `t(n) < t(n-1)`.
    pub fn first_decrease(&self) -> Option<usize> {
        (self.offset + 1..=self.last_index()).find(|&n| self.at(n) < self.at(n - 1))
    }
}

/// R-bonacci numbers through the variable-order engine with `r(n) = min(n, R)`.
///
/// With this seeding the terms are `1, 1, 2, 4, …, 2^(R-1)` and then each term
/// is the sum of the previous `R`. For `R = 2` this is `F(n+1)`.
pub fn r_bonacci(order: usize, horizon: usize) -> Result<ClassicalSequence> {
    if order == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let spec = RSpec::constant(order).validate()?;
    let seq = generate(&spec, horizon)?;
    let known_limit = Some(KnownLimit {
        quantity: LimitQuantity::SuccessiveRatio,
        exact: (order == 1).then(|| ratio_from_u64(1, 1)),
        approx: crate::asymptotics::alpha_root::<f64>(order, &crate::asymptotics::DEFAULT_ROOT_TOL)?,
        citation: "dominant root of x^R - x^(R-1) - ... - 1",
    });
    Ok(ClassicalSequence {
        kind: if order == 2 {
            ClassicalKind::Fibonacci
        } else {
            ClassicalKind::RBonacci { order }
        },
        offset: 0,
        terms: seq.terms().to_vec(),
        known_limit,
    })
}

fn need_horizon(horizon: usize, needed: usize) -> Result<()> {
    if horizon < needed {
        return Err(Error::InsufficientHorizon { horizon, needed });
    }
    Ok(())
}

fn into_big(values: Vec<usize>) -> Vec<BigUint> {
    values.into_iter().map(BigUint::from).collect()
}

/// `Q(n) = Q(n - Q(n-1)) + Q(n - Q(n-2))`, `Q(1) = Q(2) = 1`.
pub fn hofstadter_q(horizon: usize) -> Result<ClassicalSequence> {
    need_horizon(horizon, 2)?;
    // q[0] is a placeholder so that q[n] = Q(n)
    let mut q = vec![0usize, 1, 1];
    for n in 3..=horizon {
        let mut term = 0;
        for back in [q[n - 1], q[n - 2]] {
            if back >= n {
                return Err(Error::IndexUnderflow {
                    sequence: "hofstadter-q",
                    n,
                    index: n as i64 - back as i64,
                });
            }
            term += q[n - back];
        }
        q.push(term);
    }
    q.remove(0);
    Ok(ClassicalSequence {
        kind: ClassicalKind::HofstadterQ,
        offset: 1,
        terms: into_big(q),
        known_limit: None,
    })
}

/// `a(n) = a(a(n-1)) + a(n - a(n-1))`, `a(1) = a(2) = 1`.
pub fn conway(horizon: usize) -> Result<ClassicalSequence> {
    need_horizon(horizon, 2)?;
    let mut a = vec![0usize, 1, 1];
    for n in 3..=horizon {
        let prev = a[n - 1];
        if prev >= n {
            return Err(Error::IndexUnderflow {
                sequence: "conway",
                n,
                index: n as i64 - prev as i64,
            });
        }
        a.push(a[prev] + a[n - prev]);
    }
    a.remove(0);
    Ok(ClassicalSequence {
        kind: ClassicalKind::Conway,
        offset: 1,
        terms: into_big(a),
        known_limit: Some(KnownLimit {
            quantity: LimitQuantity::TermOverIndex,
            exact: Some(ratio_from_u64(1, 2)),
            approx: 0.5,
            citation: "Mallows, Conway's challenge sequence, Amer. Math. Monthly 98 (1991)",
        }),
    })
}

/// `T(n) = Σ_{i<k} T(n - i - a - T(n-i-1))` for `n > a + k`, and `T(n) = 1`
/// for `1 ≤ n ≤ a + k`.
pub fn tak(a: usize, k: usize, horizon: usize) -> Result<ClassicalSequence> {
    if a < 1 {
        return Err(Error::InvalidArgument(format!("offset a must be at least 1, got {a}")));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(format!("order k must be at least 2, got {k}")));
    }
    need_horizon(horizon, a + k)?;
    let mut t = vec![0usize];
    t.extend(std::iter::repeat(1).take(a + k));
    for n in a + k + 1..=horizon {
        let mut term = 0;
        for i in 0..k {
            let index = n as i64 - i as i64 - a as i64 - t[n - i - 1] as i64;
            if index < 1 {
                return Err(Error::IndexUnderflow {
                    sequence: "tak",
                    n,
                    index,
                });
            }
            term += t[index as usize];
        }
        t.push(term);
    }
    t.remove(0);
    let known_limit = (k % 2 == 1).then(|| KnownLimit {
        quantity: LimitQuantity::TermOverIndex,
        exact: Some(ratio_from_u64(k as u64 - 1, k as u64)),
        approx: (k - 1) as f64 / k as f64,
        citation: "Callaghan, Chew, Tanny, On the behavior of a family of meta-Fibonacci sequences, SIAM J. Discrete Math. 18 (2005)",
    });
    Ok(ClassicalSequence {
        kind: ClassicalKind::Tak { a, k },
        offset: 1,
        terms: into_big(t),
        known_limit,
    })
}

/// Builds a classical sequence from a label such as `conway`, `r-bonacci:3`
/// or `tak:1:3`.
pub fn from_label(label: &str, horizon: usize) -> Result<ClassicalSequence> {
    let parts: Vec<&str> = label.split(':').collect();
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("bad number {s:?} in {label:?}")))
    };
    match parts.as_slice() {
        ["fibonacci"] => r_bonacci(2, horizon),
        ["r-bonacci", r] => r_bonacci(num(r)?, horizon),
        ["hofstadter-q"] => hofstadter_q(horizon),
        ["conway"] => conway(horizon),
        ["tak", a, k] => tak(num(a)?, num(k)?, horizon),
        _ => Err(Error::InvalidArgument(format!(
            "unknown classical sequence {label:?}; expected fibonacci, r-bonacci:R, hofstadter-q, conway or tak:A:K"
        ))),
    }
}
