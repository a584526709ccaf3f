//! Two-sided extensions `β: [-B, N] → T` of a variable-order recursion.
//!
//! For `n ≥ 0` the order comes from the `RSpec`, which need not be sublinear;
//! for `n < 0` the order is `M = sup (r(n) - n)`. Given `β(-1), …, β(-M)`,
//! forward terms follow from the recursion and backward terms from solving
//! `β(n) = β(n-1) + … + β(n-M)` for its last summand.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rspec::RSpec;
use crate::scalar::{format_ratio, Scalar};

/// `M_r = sup_{n ≥ 0} (r(n) - n)`, read off the structure of the `RSpec`.
pub fn compute_mr(spec: &RSpec) -> Result<usize> {
    let sup = spec.sup_excess()?;
    // r(0) ≥ 1 already forces sup ≥ 1
    usize::try_from(sup)
        .ok()
        .filter(|&m| m >= 1)
        .ok_or_else(|| Error::InvalidSpec(format!("sup of r(n) - n is {sup}, expected at least 1")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedSequence<T> {
    spec: RSpec,
    m_r: usize,
    /// `B`: the lowest stored index is `-B`
    back: usize,
    /// `values[i] = β(i - B)`
    values: Vec<T>,
    /// `r(0..=N)`
    orders: Vec<usize>,
}

/// Builds `β` on `[-(n_back + M), n_fwd]` from `init = [β(-1), β(-2), …, β(-M)]`.
pub fn extend<T: Scalar>(spec: &RSpec, init: &[T], n_fwd: usize, n_back: usize) -> Result<ExtendedSequence<T>> {
    let m = compute_mr(spec)?;
    if init.len() != m {
        return Err(Error::Arity {
            expected: m,
            got: init.len(),
        });
    }
    let orders = (0..=n_fwd).map(|n| spec.order_at(n)).collect::<Result<Vec<_>>>()?;
    let back = n_back + m;
    let mut values = vec![T::zero(); back + n_fwd + 1];
    for (j, v) in init.iter().enumerate() {
        values[back - 1 - j] = v.clone();
    }
    // backward: β(n - M) = β(n) - Σ_{k=1}^{M-1} β(n - k), for n = -1, -2, …
    for step in 0..n_back {
        let n = back - 1 - step;
        let mut v = values[n].clone();
        for k in 1..m {
            v = v - values[n - k].clone();
        }
        values[n - m] = v;
    }
    fill_forward(&mut values, back, &orders);
    Ok(ExtendedSequence {
        spec: spec.clone(),
        m_r: m,
        back,
        values,
        orders,
    })
}

/// Fills `β(0..=N)` with prefix sums over the already-populated lower part.
fn fill_forward<T: Scalar>(values: &mut [T], back: usize, orders: &[usize]) {
    // prefix[i] = β(-B) + … + β(i - 1 - B)
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(T::zero());
    for v in &values[..back] {
        let next = prefix.last().expect("non-empty").clone() + v.clone();
        prefix.push(next);
    }
    for (n, &r) in orders.iter().enumerate() {
        let i = back + n;
        let v = prefix[i].clone() - prefix[i - r].clone();
        prefix.push(prefix[i].clone() + v.clone());
        values[i] = v;
    }
}

impl<T: Scalar> ExtendedSequence<T> {
    pub fn spec(&self) -> &RSpec {
        &self.spec
    }

    pub fn m_r(&self) -> usize {
        self.m_r
    }

    /// Lowest stored index, `-B`.
    pub fn lowest(&self) -> i64 {
        -(self.back as i64)
    }

    /// Highest stored index, `N`.
    pub fn highest(&self) -> i64 {
        self.orders.len() as i64 - 1
    }

    /// `r(n)` extended by `r(n) = M` for `n < 0`.
    pub fn r_ext(&self, n: i64) -> Option<usize> {
        if n < 0 {
            Some(self.m_r)
        } else {
            self.orders.get(n as usize).copied()
        }
    }

    pub fn get(&self, n: i64) -> Result<&T> {
        if n < self.lowest() || n > self.highest() {
            return Err(Error::IndexOutOfRange {
                index: n,
                lo: self.lowest(),
                hi: self.highest(),
            });
        }
        Ok(&self.values[(n + self.back as i64) as usize])
    }

    /// `β(0..=N)`.
    pub fn forward(&self) -> &[T] {
        &self.values[self.back..]
    }

    /// `(n, β(n))` over the whole stored range.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &T)> + '_ {
        let lo = self.lowest();
        self.values.iter().enumerate().map(move |(i, v)| (lo + i as i64, v))
    }

    /// The smallest index at which the recursion can be checked, `-B + M`.
    pub fn first_checkable(&self) -> i64 {
        self.lowest() + self.m_r as i64
    }

    fn check_range(&self, lo: i64, hi: i64) -> Result<()> {
        for idx in [lo, hi] {
            if idx < self.first_checkable() || idx > self.highest() {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    lo: self.first_checkable(),
                    hi: self.highest(),
                });
            }
        }
        Ok(())
    }

    fn residual(&self, n: i64) -> T {
        let r = self.r_ext(n).expect("index checked") as i64;
        let sum = (1..=r).fold(T::zero(), |acc, k| acc + self.get(n - k).expect("index checked").clone());
        self.get(n).expect("index checked").clone() - sum
    }

    /// Indices in `[lo, hi]` where `β(n) ≠ Σ_{k=1}^{r(n)} β(n-k)`, by direct
    /// summation. Empty means the recursion holds.
    pub fn verify_extended(&self, lo: i64, hi: i64) -> Result<Vec<i64>> {
        self.check_range(lo, hi)?;
        Ok((lo..=hi).filter(|&n| !self.residual(n).is_zero()).collect())
    }

    /// As [`Self::verify_extended`], allowing a residual of size `tol`.
    pub fn verify_extended_within(&self, lo: i64, hi: i64, tol: &T) -> Result<Vec<i64>> {
        self.check_range(lo, hi)?;
        Ok((lo..=hi).filter(|&n| self.residual(n).abs() > *tol).collect())
    }

    /// Recomputes every stored value from the `M` lowest ones, running the
    /// recursion upward through the negative range and into `n ≥ 0`.
    pub fn rebuild_from_bottom(&self) -> Vec<T> {
        let m = self.m_r;
        let mut values = self.values.clone();
        for v in values.iter_mut().skip(m) {
            *v = T::zero();
        }
        for i in m..self.back {
            let mut acc = T::zero();
            for k in 1..=m {
                acc = acc + values[i - k].clone();
            }
            values[i] = acc;
        }
        fill_forward(&mut values, self.back, &self.orders);
        values
    }

    /// The stored values in index order.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Test hook: overwrite one value without recomputing anything.
    pub fn corrupt(&mut self, n: i64, value: T) -> Result<()> {
        self.get(n)?;
        self.values[(n + self.back as i64) as usize] = value;
        Ok(())
    }
}

impl ExtendedSequence<BigRational> {
    pub fn rows(&self) -> Vec<ExtendedRow> {
        self.iter()
            .map(|(n, v)| ExtendedRow {
                n,
                r: self.r_ext(n).expect("in range"),
                beta: format_ratio(v),
            })
            .collect()
    }
}

/// One exported term. `beta` is written as `p/q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ExtendedRow {
    pub n: i64,
    pub r: usize,
    pub beta: String,
}

/// Rank of a rational matrix by Gaussian elimination.
pub fn rank(matrix: &[Vec<BigRational>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = matrix.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..a.len() {
            if a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone() / a[rank][c].clone();
            for j in c..cols {
                let d = f.clone() * a[rank][j].clone();
                a[i][j] -= d;
            }
        }
        rank += 1;
    }
    rank
}

/// Determinant of a square rational matrix.
pub fn determinant(matrix: &[Vec<BigRational>]) -> BigRational {
    let n = matrix.len();
    let mut a: Vec<Vec<BigRational>> = matrix.to_vec();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for i in c + 1..n {
            let f = a[i][c].clone() / a[c][c].clone();
            for j in c..n {
                let d = f.clone() * a[c][j].clone();
                a[i][j] -= d;
            }
        }
    }
    det
}

/// `[β_i(n)]` for the basis extensions `β_i` with unit init at `-(i+1)`,
/// one row per basis element and one column per index in `indices`.
pub fn value_matrix(spec: &RSpec, indices: &[i64]) -> Result<Vec<Vec<BigRational>>> {
    let m = compute_mr(spec)?;
    let hi = indices.iter().copied().max().unwrap_or(0).max(0) as usize;
    let lo = indices.iter().copied().min().unwrap_or(0).min(0);
    let n_back = (-lo - m as i64).max(0) as usize;
    (0..m)
        .map(|i| {
            let mut init = vec![BigRational::zero(); m];
            init[i] = BigRational::one();
            let ext = extend(spec, &init, hi, n_back)?;
            indices.iter().map(|&n| ext.get(n).cloned()).collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearityReport {
    pub m_r: usize,
    pub trials: usize,
    /// trials where `extend(c1·u + c2·v) ≠ c1·extend(u) + c2·extend(v)` somewhere
    pub failures: usize,
    /// rank of the basis values over `[-B, N]`
    pub rank: usize,
    /// start `s` of a window `s..s+M` on which the `M × M` matrix is
    /// invertible, preferring the smallest `s ≥ 0`
    pub window: Option<i64>,
    pub determinant: BigRational,
}

impl LinearityReport {
    pub fn holds(&self) -> bool {
        self.failures == 0 && self.rank == self.m_r && self.window.is_some()
    }
}

fn random_ratio(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-50i64..=50)), BigInt::from(rng.gen_range(1i64..=12)))
}

/// Checks that extensions form an `M`-dimensional space: superposition holds
/// exactly on random rational data and the `M` basis extensions are
/// independent.
pub fn check_linearity(spec: &RSpec, horizon: usize, trials: usize, seed: u64) -> Result<LinearityReport> {
    let m = compute_mr(spec)?;
    let n_back = m + 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let u: Vec<BigRational> = (0..m).map(|_| random_ratio(&mut rng)).collect();
        let v: Vec<BigRational> = (0..m).map(|_| random_ratio(&mut rng)).collect();
        let (c1, c2) = (random_ratio(&mut rng), random_ratio(&mut rng));
        let mixed: Vec<BigRational> = u
            .iter()
            .zip(&v)
            .map(|(a, b)| c1.clone() * a + c2.clone() * b)
            .collect();
        let eu = extend(spec, &u, horizon, n_back)?;
        let ev = extend(spec, &v, horizon, n_back)?;
        let em = extend(spec, &mixed, horizon, n_back)?;
        let ok = em
            .values()
            .iter()
            .zip(eu.values().iter().zip(ev.values()))
            .all(|(w, (a, b))| *w == c1.clone() * a + c2.clone() * b);
        if !ok {
            failures += 1;
        }
    }
    let lo = -((n_back + m) as i64);
    let all: Vec<i64> = (lo..=horizon as i64).collect();
    let full = value_matrix(spec, &all)?;
    let rank = rank(&full);
    let offset = (-lo) as usize;
    let mut window = None;
    let mut det = BigRational::zero();
    // forward windows first; when r(n) - n stays large the forward parts can
    // all be proportional, and only windows reaching below 0 separate them
    let starts = (0..=horizon as i64 + 1 - m as i64).chain((lo..0).rev());
    for s in starts {
        let at = (s + offset as i64) as usize;
        let square: Vec<Vec<BigRational>> = full.iter().map(|row| row[at..at + m].to_vec()).collect();
        let d = determinant(&square);
        if !d.is_zero() {
            window = Some(s);
            det = d;
            break;
        }
    }
    Ok(LinearityReport {
        m_r: m,
        trials,
        failures,
        rank,
        window,
        determinant: det,
    })
}
