//! K-functional of the couple `(ℓ1, ℓ∞)`, its averaged version over a map
//! family, the `(1 - 1/p, p)` real-interpolation norm, and the two-sided
//! estimate of `E ‖(a[i][g(i)])_i‖_p`.
//!
//! For `x` with decreasing rearrangement `x*`, the K-functional is the
//! piecewise-linear curve through the partial sums of `x*`:
//! `K(x, t) = Σ_{k <= ⌊t⌋} x*_k + (t - ⌊t⌋) x*_{⌈t⌉}`, saturating at `‖x‖_1`
//! for `t >= n`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::family::{MapFamily, ENUM_CHUNK};
use crate::matrix::Matrix;
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::orderstat::{kmax_profile, path_values};
use crate::quadrature;
use crate::report::{Inputs, Mode, Relation, VerificationReport};

pub const LP_UPPER: &str = "lp/upper";
pub const LP_IDENTITY: &str = "lp/identity";
pub const LP_LOWER_RATIO: &str = "lp/lower-ratio";

/// Piecewise-linear `t ↦ K(x, t; ℓ1, ℓ∞)` with breakpoints at `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KFunctionalCurve {
    /// Slopes on `[k-1, k]`: the decreasing rearrangement of `|x|`.
    x_star: Vec<f64>,
    /// `prefix[k] = K(x, k)`.
    prefix: Vec<f64>,
}

impl KFunctionalCurve {
    pub fn new(x: &[f64]) -> Self {
        let mut x_star: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        x_star.sort_unstable_by(|a, b| b.total_cmp(a));
        Self::from_sorted(x_star)
    }

    /// From slopes already sorted in nonincreasing order.
    pub fn from_sorted(x_star: Vec<f64>) -> Self {
        let mut prefix = Vec::with_capacity(x_star.len() + 1);
        let mut acc = CompensatedSum::new();
        prefix.push(0.0);
        for &v in &x_star {
            acc.add(v);
            prefix.push(acc.value());
        }
        Self { x_star, prefix }
    }

    pub fn len(&self) -> usize {
        self.x_star.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_star.is_empty()
    }

    pub fn slopes(&self) -> &[f64] {
        &self.x_star
    }

    pub fn breakpoints(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.len()
    }

    /// `‖x‖_1`.
    pub fn total(&self) -> f64 {
        *self.prefix.last().expect("prefix is nonempty")
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return domain(format!("K-functional needs t >= 0, got {t}"));
        }
        let n = self.len();
        if t >= n as f64 {
            return Ok(self.total());
        }
        let k = t.floor() as usize;
        Ok(self.prefix[k] + (t - k as f64) * self.x_star[k])
    }

    /// `(∫_0^∞ t^{-p} K(t)^p dt)^{1/p}`, the `(1 - 1/p, p)` norm.
    ///
    /// Closed form on `(0, 1)` and `[n, ∞)`, 32-point Gauss-Legendre on each
    /// `[k, k+1]` in between.
    pub fn interpolation_norm(&self, p: f64) -> Result<f64> {
        check_interpolation_p(p)?;
        let n = self.len();
        if n == 0 || self.total() == 0.0 {
            return Ok(0.0);
        }
        let head = self.x_star[0].powf(p);
        let middle = compensated_sum((1..n).map(|k| {
            let (base, slope) = (self.prefix[k], self.x_star[k]);
            quadrature::integrate(k as f64, (k + 1) as f64, |t| {
                (base + (t - k as f64) * slope).powf(p) * t.powf(-p)
            })
        }));
        let tail = self.total().powf(p) * (n as f64).powf(1.0 - p) / (p - 1.0);
        Ok(compensated_sum([head, middle, tail]).powf(1.0 / p))
    }
}

fn check_interpolation_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return domain(format!(
            "interpolation norm needs 1 < p < ∞ (θ = 1 - 1/p in (0, 1)), got p = {p}"
        ));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("p must satisfy 1 <= p < ∞, got {p}"));
    }
    Ok(())
}

/// `K(x, t; ℓ1, ℓ∞)`.
pub fn k_functional(x: &[f64], t: f64) -> Result<f64> {
    KFunctionalCurve::new(x).eval(t)
}

/// `(1 - 1/p, p)` interpolation norm of `x` for the couple `(ℓ1, ℓ∞)`.
pub fn interpolation_norm(x: &[f64], p: f64) -> Result<f64> {
    KFunctionalCurve::new(x).interpolation_norm(p)
}

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

/// `∫_G K(a(g), t) dP(g)`, averaging the path K-functionals over the family.
pub fn k_functional_mixed(a: &Matrix, fam: &MapFamily, t: f64) -> Result<f64> {
    check_compatible(a, fam)?;
    if !(t >= 0.0) {
        return domain(format!("K-functional needs t >= 0, got {t}"));
    }
    let total = fam.enumerable_size()? as f64;
    let sum = fam.reduce(
        CompensatedSum::new,
        |acc, g| {
            let v = path_values(a, g).expect("dimensions checked");
            acc.add(k_functional(&v, t).expect("t checked"));
        },
        |acc, part| acc.merge(&part),
    )?;
    Ok(sum.value() / total)
}

/// The averaged K-functional as a curve: its slopes are the expected order
/// statistics `E kmax_i a[i][g(i)]`.
pub fn mixed_k_curve(a: &Matrix, fam: &MapFamily) -> Result<KFunctionalCurve> {
    Ok(KFunctionalCurve::from_sorted(kmax_profile(a, fam)?))
}

/// Interpolation norm of the family-indexed object `g ↦ a(g)` in the
/// `L1`-over-`G` couple.
pub fn mixed_interpolation_norm(a: &Matrix, fam: &MapFamily, p: f64) -> Result<f64> {
    mixed_k_curve(a, fam)?.interpolation_norm(p)
}

/// `E_G ‖a(g)‖_{θ,p}`, the average of the per-path interpolation norms.
pub fn average_path_interpolation_norm(a: &Matrix, fam: &MapFamily, p: f64) -> Result<f64> {
    check_compatible(a, fam)?;
    check_interpolation_p(p)?;
    let total = fam.enumerable_size()? as f64;
    let sum = fam.reduce(
        CompensatedSum::new,
        |acc, g| {
            let v = path_values(a, g).expect("dimensions checked");
            acc.add(interpolation_norm(&v, p).expect("p checked"));
        },
        |acc, part| acc.merge(&part),
    )?;
    Ok(sum.value() / total)
}

#[inline]
fn lp_norm(v: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == 1.0 {
        v.sum()
    } else {
        v.map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Exact `E_G (Σ_i a[i][g(i)]^p)^{1/p}`.
pub fn lp_expectation(a: &Matrix, fam: &MapFamily, p: f64) -> Result<f64> {
    check_compatible(a, fam)?;
    check_p(p)?;
    let total = fam.enumerable_size()? as f64;
    let sum = fam.reduce(
        CompensatedSum::new,
        |acc, g| acc.add(lp_norm(g.iter().enumerate().map(|(i, &j)| a.get(i, j)), p)),
        |acc, part| acc.merge(&part),
    )?;
    Ok(sum.value() / total)
}

/// Monte Carlo estimate of [`lp_expectation`]: `(mean, standard error)`.
pub fn lp_expectation_mc(
    a: &Matrix,
    fam: &MapFamily,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    check_compatible(a, fam)?;
    check_p(p)?;
    if samples < 2 {
        return domain("Monte Carlo needs at least 2 samples");
    }
    let n = a.rows();
    let chunks = samples.div_ceil(ENUM_CHUNK);
    let parts: Vec<(CompensatedSum, CompensatedSum)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut g = vec![0usize; n];
            let (mut s, mut s2) = (CompensatedSum::new(), CompensatedSum::new());
            let start = c * ENUM_CHUNK;
            for t in start..(start + ENUM_CHUNK).min(samples) {
                fam.sample_into(seed, t, &mut g);
                let v = lp_norm(g.iter().enumerate().map(|(i, &j)| a.get(i, j)), p);
                s.add(v);
                s2.add(v * v);
            }
            (s, s2)
        })
        .collect();
    let (mut s, mut s2) = (CompensatedSum::new(), CompensatedSum::new());
    for (a1, a2) in &parts {
        s.merge(a1);
        s2.merge(a2);
    }
    let k = samples as f64;
    let mean = s.value() / k;
    let var = ((s2.value() - k * mean * mean) / (k - 1.0)).max(0.0);
    Ok((mean, (var / k).sqrt()))
}

/// `(1/N) Σ_{k<=N} s(k) + ((1/N) Σ_{k>N} s(k)^p)^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTermBound {
    /// `(1/N) Σ_{k<=N} s(k)`: the `N` largest entries.
    pub head: f64,
    /// `((1/N) Σ_{k>N} s(k)^p)^{1/p}`: the remaining entries.
    pub tail: f64,
}

impl TwoTermBound {
    pub fn value(&self) -> f64 {
        self.head + self.tail
    }
}

pub fn lp_two_term_bound(a: &Matrix, p: f64) -> Result<TwoTermBound> {
    check_p(p)?;
    let s = a.rearrangement();
    let nn = a.cols();
    let inv = 1.0 / nn as f64;
    let head = inv * compensated_sum(s[..nn].iter().copied());
    let rest = &s[nn..];
    let tail = if p == 1.0 {
        inv * compensated_sum(rest.iter().copied())
    } else {
        (inv * compensated_sum(rest.iter().map(|x| x.powf(p)))).powf(1.0 / p)
    };
    Ok(TwoTermBound { head, tail })
}

/// Upper bound `E ‖a(g)‖_p <= bound` (constant 1), the identity at `p = 1`,
/// and the observed lower ratio `E ‖a(g)‖_p / bound > 0`.
///
/// The lower ratio carries the reference constant `1/(32 (1 + 2 C_G)^2)` for
/// comparison; it is reported, not asserted against.
pub fn verify_lp_bounds(
    a: &Matrix,
    fam: &MapFamily,
    p: f64,
    base: Inputs,
    mc: Option<(u64, u64)>,
) -> Result<Vec<VerificationReport>> {
    let cert = fam.require_uniform_marginals()?;
    let inputs = Inputs {
        matrix: base.matrix.clone().or_else(|| Some(Arc::from(a.content_hash()))),
        family: base.family.clone().or_else(|| Some(Arc::from(fam.descriptor()))),
        ..base
    }
    .with_p(p);
    let bound = lp_two_term_bound(a, p)?.value();
    let reference = 1.0 / (32.0 * (1.0 + 2.0 * cert.c_g).powi(2));
    let mut out = Vec::with_capacity(3);
    let (lhs, stderr) = match mc {
        None => (lp_expectation(a, fam, p)?, None),
        Some((samples, seed)) => {
            let (m, se) = lp_expectation_mc(a, fam, p, samples, seed)?;
            (m, Some((se, samples, seed)))
        }
    };
    let finish = |r: VerificationReport| match stderr {
        None => r,
        Some((se, samples, seed)) => {
            let widened = VerificationReport::compare_mc(
                &r.check_id,
                Inputs { seed: Some(seed), samples: Some(samples), ..r.inputs.clone() },
                r.lhs,
                r.relation,
                r.rhs,
                se,
            );
            VerificationReport { constant: r.constant, note: r.note, ..widened }
        }
    };
    out.push(finish(
        VerificationReport::compare(LP_UPPER, inputs.clone(), lhs, Relation::Le, bound).with_constant(1.0),
    ));
    if p == 1.0 {
        out.push(finish(
            VerificationReport::compare(LP_IDENTITY, inputs.clone(), lhs, Relation::Eq, bound)
                .with_constant(1.0),
        ));
    }
    if bound == 0.0 {
        out.push(VerificationReport::vacuous(LP_LOWER_RATIO, inputs, "zero matrix"));
    } else {
        let mut r = VerificationReport::compare(LP_LOWER_RATIO, inputs, lhs / bound, Relation::Gt, 0.0)
            .with_constant(reference);
        if stderr.is_some() {
            r.mode = Mode::MonteCarlo;
        }
        out.push(r);
    }
    Ok(out)
}
