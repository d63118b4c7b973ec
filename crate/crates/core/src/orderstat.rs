//! Order statistics along the graph of a random map.
//!
//! For a matrix `a` and a map `g`, the path values are `a[i][g(i)]`. The
//! statistic `S_k` is the k-th largest path value and `S = S_1 + ... + S_ell`.
//! This module computes expectations of these statistics over a family,
//! exactly by enumeration or by seeded Monte Carlo, together with the exact
//! distribution of the intersection counts `X_m` between the graph and the
//! positions of the `m` largest entries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::family::{MapFamily, ENUM_CHUNK};
use crate::matrix::{Matrix, OrderMap};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::report::Mode;

fn check_compatible(a: &Matrix, fam: &MapFamily) -> Result<()> {
    if a.rows() != fam.n() || a.cols() != fam.codomain() {
        return domain(format!(
            "matrix is {}x{} but family maps {} points into {}",
            a.rows(),
            a.cols(),
            fam.n(),
            fam.codomain()
        ));
    }
    Ok(())
}

fn check_ell(ell: usize, n: usize) -> Result<()> {
    if ell == 0 || ell > n {
        return domain(format!("ell = {ell} outside 1..={n}"));
    }
    Ok(())
}

/// `(a[0][g(0)], ..., a[n-1][g(n-1)])`.
pub fn path_values(a: &Matrix, g: &[usize]) -> Result<Vec<f64>> {
    if g.len() != a.rows() {
        return domain(format!("map has length {}, matrix has {} rows", g.len(), a.rows()));
    }
    g.iter()
        .enumerate()
        .map(|(i, &j)| {
            if j >= a.cols() {
                domain(format!("map value {} outside 1..={}", j + 1, a.cols()))
            } else {
                Ok(a.get(i, j))
            }
        })
        .collect()
}

/// Sum of the `ell` largest path values.
pub fn top_path_sum(a: &Matrix, g: &[usize], ell: usize) -> Result<f64> {
    check_ell(ell, a.rows())?;
    let mut v = path_values(a, g)?;
    v.sort_unstable_by(|x, y| y.total_cmp(x));
    Ok(v[..ell].iter().sum())
}

/// Fills `buf` with the path values sorted in nonincreasing order.
#[inline]
fn sorted_path(a: &Matrix, g: &[usize], buf: &mut [f64]) {
    for (i, (&j, slot)) in g.iter().zip(buf.iter_mut()).enumerate() {
        *slot = a.get(i, j);
    }
    // Insertion sort: paths are short.
    for i in 1..buf.len() {
        let x = buf[i];
        let mut k = i;
        while k > 0 && buf[k - 1] < x {
            buf[k] = buf[k - 1];
            k -= 1;
        }
        buf[k] = x;
    }
}

/// Expected value of `S` over a family, with the per-rank breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderStatResult {
    /// `E S = sum of per_k`.
    pub value: f64,
    /// `E S_k` for `k = 1..=ell`.
    pub per_k: Vec<f64>,
    pub mode: Mode,
    pub samples: Option<u64>,
    pub stderr: Option<f64>,
}

/// Exact `E S_k` for every `k = 1..=n`, by enumeration of the family.
pub fn kmax_profile(a: &Matrix, fam: &MapFamily) -> Result<Vec<f64>> {
    check_compatible(a, fam)?;
    let n = a.rows();
    let total = fam.enumerable_size()? as f64;
    let sums = fam.reduce(
        || (vec![CompensatedSum::new(); n], vec![0.0; n]),
        |(acc, buf), g| {
            sorted_path(a, g, buf);
            for (s, &x) in acc.iter_mut().zip(buf.iter()) {
                s.add(x);
            }
        },
        |(acc, _), (part, _)| {
            for (s, p) in acc.iter_mut().zip(part.iter()) {
                s.merge(p);
            }
        },
    )?;
    Ok(sums.0.iter().map(|s| s.value() / total).collect())
}

/// Exact expectation of `S = S_1 + ... + S_ell` over the family.
pub fn expectation_exact(a: &Matrix, fam: &MapFamily, ell: usize) -> Result<OrderStatResult> {
    check_ell(ell, a.rows())?;
    let profile = kmax_profile(a, fam)?;
    Ok(result_from_profile(&profile, ell))
}

/// Truncates a full profile to the first `ell` ranks.
pub fn result_from_profile(profile: &[f64], ell: usize) -> OrderStatResult {
    let per_k = profile[..ell].to_vec();
    OrderStatResult {
        value: compensated_sum(per_k.iter().copied()),
        per_k,
        mode: Mode::Exact,
        samples: None,
        stderr: None,
    }
}

#[derive(Clone)]
struct McChunk {
    count: u64,
    mean: f64,
    m2: f64,
    per_k: Vec<f64>,
}

impl McChunk {
    fn new(ell: usize) -> Self {
        Self { count: 0, mean: 0.0, m2: 0.0, per_k: vec![0.0; ell] }
    }

    /// Moments of `count` values from sums of `x - shift` and its square.
    fn set_shifted(&mut self, count: u64, shift: f64, sum: f64, sum_sq: f64) {
        if count == 0 {
            return;
        }
        let k = count as f64;
        self.count = count;
        self.mean = shift + sum / k;
        self.m2 = (sum_sq - sum * sum / k).max(0.0);
    }

    fn merge(&mut self, other: &McChunk) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
        for (s, o) in self.per_k.iter_mut().zip(&other.per_k) {
            *s += o;
        }
    }
}

/// Monte Carlo estimate of `E S` from `samples` seeded draws.
///
/// Draw `t` uses a sub-seed derived from `(seed, t)`; draws are processed in
/// fixed chunks merged in order, so the estimate is independent of the
/// number of worker threads.
pub fn expectation_mc(
    a: &Matrix,
    fam: &MapFamily,
    ell: usize,
    samples: u64,
    seed: u64,
) -> Result<OrderStatResult> {
    check_compatible(a, fam)?;
    check_ell(ell, a.rows())?;
    if samples < 2 {
        return domain("Monte Carlo needs at least 2 samples");
    }
    let n = a.rows();
    let chunks = samples.div_ceil(ENUM_CHUNK);
    let parts: Vec<McChunk> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = McChunk::new(ell);
            let mut g = vec![0usize; n];
            let mut buf = vec![0.0; n];
            let start = c * ENUM_CHUNK;
            let end = (start + ENUM_CHUNK).min(samples);
            let (mut shift, mut sum, mut sum_sq) = (0.0, 0.0, 0.0);
            for t in start..end {
                fam.sample_into(seed, t, &mut g);
                sorted_path(a, &g, &mut buf);
                let mut s = 0.0;
                for (pk, &x) in acc.per_k.iter_mut().zip(&buf[..ell]) {
                    *pk += x;
                    s += x;
                }
                if t == start {
                    shift = s;
                }
                let d = s - shift;
                sum += d;
                sum_sq += d * d;
            }
            acc.set_shifted(end - start, shift, sum, sum_sq);
            acc
        })
        .collect();
    let mut total = McChunk::new(ell);
    for p in &parts {
        total.merge(p);
    }
    let var = total.m2 / (samples - 1) as f64;
    Ok(OrderStatResult {
        value: total.mean,
        per_k: total.per_k.iter().map(|s| s / samples as f64).collect(),
        mode: Mode::MonteCarlo,
        samples: Some(samples),
        stderr: Some((var.max(0.0) / samples as f64).sqrt()),
    })
}

/// Ranks (under `h`) of the graph cells of `g`, sorted ascending.
#[inline]
fn graph_ranks(h: &OrderMap, g: &[usize], buf: &mut [usize]) {
    for (i, (&j, slot)) in g.iter().zip(buf.iter_mut()).enumerate() {
        *slot = h.rank(i, j);
    }
    buf.sort_unstable();
}

fn check_order_map(h: &OrderMap, fam: &MapFamily) -> Result<()> {
    if h.rows() != fam.n() || h.cols() != fam.codomain() {
        return domain(format!(
            "order map is {}x{} but family maps {} points into {}",
            h.rows(),
            h.cols(),
            fam.n(),
            fam.codomain()
        ));
    }
    Ok(())
}

/// Exact joint table of `X_m` for every `m = 0..=n*N`.
///
/// `X_m(g)` is the number of graph cells of `g` among the `m` top-ranked
/// positions of `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmTable {
    n: usize,
    cells: usize,
    total: u64,
    /// `counts[m][k] = #{g : X_m(g) = k}`.
    counts: Vec<Vec<u64>>,
}

impl XmTable {
    pub fn new(fam: &MapFamily, h: &OrderMap) -> Result<Self> {
        check_order_map(h, fam)?;
        let n = fam.n();
        let cells = h.len();
        let total = fam.enumerable_size()?;
        // diff[k][m] marks the m-range on which X_m = k.
        let diff = fam.reduce(
            || (vec![vec![0i64; cells + 2]; n + 1], vec![0usize; n]),
            |(diff, buf), g| {
                graph_ranks(h, g, buf);
                let mut lo = 0usize;
                for (k, &r) in buf.iter().enumerate() {
                    // X_m = k for lo <= m <= r.
                    diff[k][lo] += 1;
                    diff[k][r + 1] -= 1;
                    lo = r + 1;
                }
                diff[n][lo] += 1;
                diff[n][cells + 1] -= 1;
            },
            |(acc, _), (part, _)| {
                for (a, p) in acc.iter_mut().zip(part.iter()) {
                    for (x, y) in a.iter_mut().zip(p.iter()) {
                        *x += y;
                    }
                }
            },
        )?;
        let mut counts = vec![vec![0u64; n + 1]; cells + 1];
        for (k, d) in diff.0.iter().enumerate() {
            let mut run = 0i64;
            for (m, row) in counts.iter_mut().enumerate() {
                run += d[m];
                row[k] = run as u64;
            }
        }
        Ok(Self { n, cells, total, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of matrix positions, `n * N`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `#{g : X_m(g) = k}`.
    pub fn count(&self, m: usize, k: usize) -> u64 {
        self.counts[m].get(k).copied().unwrap_or(0)
    }

    /// `#{g : X_m(g) >= k}`.
    pub fn count_at_least(&self, m: usize, k: usize) -> u64 {
        self.counts[m].iter().skip(k).sum()
    }

    /// Exact `P(X_m >= k)`.
    pub fn tail(&self, m: usize, k: usize) -> BigRational {
        BigRational::new(BigInt::from(self.count_at_least(m, k)), BigInt::from(self.total))
    }

    pub fn distribution(&self, m: usize) -> Result<XmDistribution> {
        if m > self.cells {
            return domain(format!("m = {m} outside 0..={}", self.cells));
        }
        Ok(XmDistribution {
            m,
            counts: self.counts[m].clone(),
            total: self.total,
        })
    }
}

/// Exact distribution of `X_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmDistribution {
    pub m: usize,
    /// `counts[k] = #{g : X_m(g) = k}` for `k = 0..=n`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl XmDistribution {
    pub fn probability(&self, k: usize) -> BigRational {
        let c = self.counts.get(k).copied().unwrap_or(0);
        BigRational::new(BigInt::from(c), BigInt::from(self.total))
    }

    pub fn probabilities(&self) -> Vec<BigRational> {
        (0..self.counts.len()).map(|k| self.probability(k)).collect()
    }

    /// `P(X_m >= k)`.
    pub fn tail(&self, k: usize) -> BigRational {
        let c: u64 = self.counts.iter().skip(k).sum();
        BigRational::new(BigInt::from(c), BigInt::from(self.total))
    }

    /// Exact `E X_m^power`.
    pub fn moment(&self, power: u32) -> BigRational {
        let num: BigInt = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| BigInt::from(k).pow(power) * BigInt::from(c))
            .sum();
        BigRational::new(num, BigInt::from(self.total))
    }

    /// Value/probability atoms with nonzero mass.
    pub fn atoms(&self) -> Vec<(BigRational, BigRational)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, _)| (BigRational::from_integer(BigInt::from(k)), self.probability(k)))
            .collect()
    }
}

/// Exact distribution of `X_m` for a single `m` in `1..=n*N`.
pub fn xm_distribution(fam: &MapFamily, h: &OrderMap, m: usize) -> Result<XmDistribution> {
    if m == 0 || m > h.len() {
        return domain(format!("m = {m} outside 1..={}", h.len()));
    }
    XmTable::new(fam, h)?.distribution(m)
}

/// Exact weights `f(j)`, `j = 1..=ell*N`, such that
/// `E S(b) = sum_j f(j) b(h(j))` for every `b` ordered by `h` and vanishing
/// beyond rank `ell*N`.
///
/// `f(j)` is the probability that the cell of rank `j` lies on the graph and
/// among its `ell` top-ranked cells.
pub fn coefficient_counts(fam: &MapFamily, h: &OrderMap, ell: usize) -> Result<(Vec<u64>, u64)> {
    check_order_map(h, fam)?;
    check_ell(ell, fam.n())?;
    let n = fam.n();
    let top = ell * fam.codomain();
    let total = fam.enumerable_size()?;
    let counts = fam.reduce(
        || (vec![0u64; top], vec![0usize; n]),
        |(counts, buf), g| {
            graph_ranks(h, g, buf);
            for &r in &buf[..ell] {
                if r < top {
                    counts[r] += 1;
                }
            }
        },
        |(acc, _), (part, _)| {
            for (a, p) in acc.iter_mut().zip(part.iter()) {
                *a += p;
            }
        },
    )?;
    Ok((counts.0, total))
}

/// The weights of [`coefficient_counts`] as reals.
pub fn coefficient_f(fam: &MapFamily, h: &OrderMap, ell: usize) -> Result<Vec<f64>> {
    let (counts, total) = coefficient_counts(fam, h, ell)?;
    Ok(counts
        .into_iter()
        .map(|c| {
            BigRational::new(BigInt::from(c), BigInt::from(total))
                .to_f64()
                .unwrap_or(f64::NAN)
        })
        .collect())
}

/// `sum_j f(j) b(h(j))` over the first `f.len()` ranks.
pub fn apply_coefficients(f: &[f64], h: &OrderMap, b: &Matrix) -> f64 {
    compensated_sum(f.iter().enumerate().map(|(r, &w)| {
        let (i, j) = h.position(r);
        w * b.get(i, j)
    }))
}

/// `E X_m` for `m` in the table, as an exact rational.
pub fn xm_mean(table: &XmTable, m: usize) -> BigRational {
    let num: u64 = (0..=table.n()).map(|k| k as u64 * table.count(m, k)).sum();
    if table.total() == 0 {
        return BigRational::zero();
    }
    BigRational::new(BigInt::from(num), BigInt::from(table.total()))
}
