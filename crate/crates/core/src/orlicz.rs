//! Orlicz functions, Luxemburg norms, and the piecewise-linear family
//! `M_j(t) = max(0, t - 1/j)` whose norm is within a factor two of the sum of
//! the `j` largest coordinates.

use std::sync::Arc;

use crate::error::{domain, Result};
use crate::family::MapFamily;
use crate::matrix::Matrix;
use crate::orderstat::{expectation_exact, expectation_mc};
use crate::report::{Inputs, Relation, VerificationReport};

pub const SANDWICH_LOWER: &str = "orlicz/sandwich-lower";
pub const SANDWICH_UPPER: &str = "orlicz/sandwich-upper";
pub const UPPER_BOUND: &str = "orlicz/upper-bound";
pub const EXTREME_POINT: &str = "orlicz/extreme-point";

/// Default relative width of the final bisection bracket.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A convex `M: [0, inf) -> [0, inf)` with `M(0) = 0`, not constant.
pub trait OrliczFunction {
    fn value(&self, t: f64) -> f64;

    /// Whether `t` is a point of strict convexity.
    fn is_strictly_convex_at(&self, t: f64) -> bool;

    fn descriptor(&self) -> String;
}

/// `M_j(t) = 0` on `[0, 1/j]` and `t - 1/j` beyond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mj {
    j: u64,
}

impl Mj {
    pub fn new(j: u64) -> Result<Self> {
        if j == 0 {
            return domain("M_j needs j >= 1");
        }
        Ok(Self { j })
    }

    pub fn j(&self) -> u64 {
        self.j
    }

    pub fn kink(&self) -> f64 {
        1.0 / self.j as f64
    }
}

pub fn mj_function(j: u64) -> Result<Mj> {
    Mj::new(j)
}

impl OrliczFunction for Mj {
    #[inline]
    fn value(&self, t: f64) -> f64 {
        let k = self.kink();
        if t <= k {
            0.0
        } else {
            t - k
        }
    }

    /// Only the kink: `M_j` is affine on either side of it.
    fn is_strictly_convex_at(&self, t: f64) -> bool {
        t == self.kink()
    }

    fn descriptor(&self) -> String {
        format!("M_{}", self.j)
    }
}

fn modular(x: &[f64], m: &impl OrliczFunction, lambda: f64) -> f64 {
    x.iter().map(|v| m.value(v.abs() / lambda)).sum()
}

/// `inf { λ > 0 : Σ M(|x_i| / λ) <= 1 }` by bisection.
///
/// Returns the upper end of the final bracket, so the constraint holds at
/// the returned value, while it fails at the lower end, which lies within a
/// relative distance `tol` below.
pub fn luxemburg_norm(x: &[f64], m: &impl OrliczFunction, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let max = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if max == 0.0 {
        return Ok(0.0);
    }
    let mut lo = max * 1e-6;
    let mut hi = x.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
    let mut guard = 0;
    while modular(x, m, lo) <= 1.0 && guard < 64 {
        lo *= 1e-6;
        guard += 1;
    }
    guard = 0;
    while modular(x, m, hi) > 1.0 && guard < 1100 {
        hi *= 2.0;
        guard += 1;
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(x, m, mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Sum of the `j` largest `|x_i|`.
pub fn top_sum(x: &[f64], j: usize) -> f64 {
    let mut v: Vec<f64> = x.iter().map(|a| a.abs()).collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    v[..j.min(v.len())].iter().sum()
}

/// Checks `½ Σ_{i<=j} x*_i <= ‖x‖_{M_j} <= Σ_{i<=j} x*_i`.
///
/// Both comparisons allow the relative slack `tol` (plus the bisection error
/// at the same relative scale).
pub fn sandwich_check(x: &[f64], j: usize, tol: f64) -> Result<[VerificationReport; 2]> {
    if j == 0 || j > x.len() {
        return domain(format!("j = {j} outside 1..={}", x.len()));
    }
    let norm = luxemburg_norm(x, &Mj::new(j as u64)?, tol)?;
    let top = top_sum(x, j);
    let slack = 2.0 * tol * top.max(norm) + f64::EPSILON * top;
    let inputs = Inputs { j: Some(j), n: Some(x.len()), ..Inputs::default() };
    let lower = VerificationReport::compare_with_slack(
        SANDWICH_LOWER,
        inputs.clone(),
        norm,
        Relation::Ge,
        0.5 * top,
        slack,
    )
    .with_constant(0.5);
    let upper =
        VerificationReport::compare_with_slack(SANDWICH_UPPER, inputs, norm, Relation::Le, top, slack)
            .with_constant(1.0);
    Ok([lower, upper])
}

/// The `n·N` matrices with all entries `1/(ell N)` except one entry
/// `1 + 1/(ell N)`; each has `Σ M_{ell N}(entries) = 1`.
#[derive(Debug, Clone)]
pub struct ExtremePoints {
    rows: usize,
    cols: usize,
    ell: usize,
    next: usize,
}

impl ExtremePoints {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The extreme point whose large entry sits at row-major index `idx`.
    pub fn get(&self, idx: usize) -> Option<Matrix> {
        if idx >= self.len() {
            return None;
        }
        let base = 1.0 / (self.ell * self.cols) as f64;
        let mut entries = vec![base; self.len()];
        entries[idx] = 1.0 + base;
        Matrix::new(self.rows, self.cols, entries).ok()
    }
}

impl Iterator for ExtremePoints {
    type Item = Matrix;

    fn next(&mut self) -> Option<Matrix> {
        let m = self.get(self.next)?;
        self.next += 1;
        Some(m)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.len() - self.next.min(self.len());
        (rest, Some(rest))
    }
}

impl ExactSizeIterator for ExtremePoints {}

pub fn extreme_points_bmj(rows: usize, cols: usize, ell: usize) -> Result<ExtremePoints> {
    if rows == 0 || cols == 0 {
        return domain("dimensions must be positive");
    }
    if ell == 0 || ell > rows {
        return domain(format!("ell = {ell} outside 1..={rows}"));
    }
    Ok(ExtremePoints { rows, cols, ell, next: 0 })
}

/// `(2/N) ‖a‖_{M_{ell N}}`, with the matrix flattened row-major.
pub fn orlicz_upper_bound(a: &Matrix, ell: usize, tol: f64) -> Result<f64> {
    let norm = luxemburg_norm(a.entries(), &Mj::new((ell * a.cols()) as u64)?, tol)?;
    Ok(2.0 / a.cols() as f64 * norm)
}

/// Checks `E S <= (2/N) ‖a‖_{M_{ell N}}` by exact enumeration.
pub fn upper_bound_check(a: &Matrix, fam: &MapFamily, ell: usize) -> Result<VerificationReport> {
    upper_bound_check_with(a, fam, ell, Inputs::default(), None)
}

/// As [`upper_bound_check`]; with `mc = Some((samples, seed))` the
/// expectation is estimated and the slack widened by four standard errors.
pub fn upper_bound_check_with(
    a: &Matrix,
    fam: &MapFamily,
    ell: usize,
    base: Inputs,
    mc: Option<(u64, u64)>,
) -> Result<VerificationReport> {
    fam.require_uniform_marginals()?;
    let inputs = Inputs {
        matrix: base.matrix.clone().or_else(|| Some(Arc::from(a.content_hash()))),
        family: base.family.clone().or_else(|| Some(Arc::from(fam.descriptor()))),
        ..base
    }
    .with_ell(ell);
    let rhs = orlicz_upper_bound(a, ell, DEFAULT_TOL)?;
    Ok(match mc {
        None => {
            let e = expectation_exact(a, fam, ell)?;
            VerificationReport::compare(UPPER_BOUND, inputs, e.value, Relation::Le, rhs)
        }
        Some((samples, seed)) => {
            let e = expectation_mc(a, fam, ell, samples, seed)?;
            let inputs = Inputs { seed: Some(seed), samples: Some(samples), ..inputs };
            VerificationReport::compare_mc(
                UPPER_BOUND,
                inputs,
                e.value,
                Relation::Le,
                rhs,
                e.stderr.unwrap_or(0.0),
            )
        }
    }
    .with_constant(2.0))
}

/// On every extreme point, `E S = 2/N` within the exact-mode slack.
pub fn extreme_point_checks(fam: &MapFamily, ell: usize) -> Result<Vec<VerificationReport>> {
    fam.require_uniform_marginals()?;
    let nn = fam.codomain();
    let target = 2.0 / nn as f64;
    extreme_points_bmj(fam.n(), nn, ell)?
        .enumerate()
        .map(|(idx, a)| {
            let e = expectation_exact(&a, fam, ell)?;
            let inputs = Inputs {
                family: Some(Arc::from(fam.descriptor())),
                m: Some(idx + 1),
                ..Inputs::default()
            }
            .with_ell(ell);
            Ok(VerificationReport::compare(EXTREME_POINT, inputs, e.value, Relation::Eq, target)
                .with_constant(2.0))
        })
        .collect()
}
