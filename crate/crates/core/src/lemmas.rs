//! Executable checks for the intermediate inequalities behind the lower
//! bound: hitting probabilities of the top-ranked positions, their
//! anti-concentration, the Paley-Zygmund inequality, and the averaging
//! comparisons between a matrix and its flattened top block.
//!
//! Statements about `X_m` are checked in exact rational arithmetic. Checks
//! that involve expectations of real matrices use the absolute slack
//! [`EXACT_SLACK`](crate::report::EXACT_SLACK).

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};
use crate::family::MapFamily;
use crate::matrix::{averaged_matrix, indicator_matrix, keep_top, order_map, Matrix, OrderMap};
use crate::orderstat::{kmax_profile, XmDistribution, XmTable};
use crate::report::{Inputs, Relation, VerificationReport};

pub const FIRST_HIT: &str = "xm/first-hit";
pub const FIRST_HIT_THRESHOLD: &str = "xm/first-hit-threshold";
pub const ANTI_CONCENTRATION: &str = "xm/anti-concentration";
pub const PALEY_ZYGMUND: &str = "paley-zygmund";
pub const HIT_VS_TOP: &str = "xm/hit-vs-top";
pub const TAIL_VS_TOP: &str = "xm/tail-vs-top";
pub const AVERAGING_INDICATOR: &str = "averaging/indicator";
pub const AVERAGING_GENERAL: &str = "averaging/general";
pub const INDICATOR_KMAX_FLOOR: &str = "indicator/kmax-floor";

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn int(a: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(a))
}

fn ceil_usize(x: &BigRational) -> usize {
    x.ceil().to_integer().to_usize().unwrap_or(usize::MAX)
}

/// The grid `{0.1, ..., 0.9}` as exact rationals.
pub fn theta_grid() -> Vec<(f64, BigRational)> {
    (1..=9).map(|k| (k as f64 / 10.0, q(k, 10))).collect()
}

/// A finitely supported nonnegative random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    atoms: Vec<(BigRational, BigRational)>,
}

impl EmpiricalDistribution {
    /// From `(value, probability)` atoms; probabilities must sum to one.
    pub fn from_atoms(atoms: Vec<(BigRational, BigRational)>) -> Result<Self> {
        if atoms.is_empty() {
            return domain("empty distribution");
        }
        if atoms.iter().any(|(v, p)| v.is_negative() || p.is_negative()) {
            return domain("distribution must be nonnegative with nonnegative weights");
        }
        let mass: BigRational = atoms.iter().map(|(_, p)| p.clone()).sum();
        if !mass.is_one() {
            return domain(format!("probabilities sum to {mass}, not 1"));
        }
        Ok(Self { atoms })
    }

    /// Equal-weight sample; each value is taken exactly as its binary fraction.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return domain("empty sample");
        }
        let w = q(1, values.len() as i64);
        let atoms = values
            .iter()
            .map(|&v| {
                BigRational::from_float(v)
                    .filter(|r| !r.is_negative())
                    .map(|r| (r, w.clone()))
                    .ok_or_else(|| crate::error::Error::Domain(format!("bad sample value {v}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { atoms })
    }

    pub fn from_xm(d: &XmDistribution) -> Self {
        Self { atoms: d.atoms() }
    }

    pub fn mean(&self) -> BigRational {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    pub fn second_moment(&self) -> BigRational {
        self.atoms.iter().map(|(v, p)| v * v * p).sum()
    }

    /// `P(Z >= x)`.
    pub fn tail(&self, x: &BigRational) -> BigRational {
        self.atoms.iter().filter(|(v, _)| v >= x).map(|(_, p)| p.clone()).sum()
    }
}

/// Paley-Zygmund: `P(Z >= θ E Z) >= (1-θ)^2 (E Z)^2 / E Z^2`, evaluated exactly.
pub fn paley_zygmund_check(z: &EmpiricalDistribution, theta: f64) -> Result<VerificationReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return domain(format!("theta = {theta} outside (0, 1)"));
    }
    let exact = BigRational::from_float(theta).expect("finite theta");
    Ok(paley_zygmund_exact(z, &exact, Inputs::default().with_theta(theta)))
}

fn paley_zygmund_exact(
    z: &EmpiricalDistribution,
    theta: &BigRational,
    inputs: Inputs,
) -> VerificationReport {
    let mean = z.mean();
    if mean.is_zero() {
        return VerificationReport::vacuous(PALEY_ZYGMUND, inputs, "E Z = 0");
    }
    let lhs = z.tail(&(theta * &mean));
    let one_minus = BigRational::one() - theta;
    let rhs = &one_minus * &one_minus * &mean * &mean / z.second_moment();
    VerificationReport::compare_exact(PALEY_ZYGMUND, inputs, &lhs, Relation::Ge, &rhs)
}

/// Precomputed data for running the lemma checks on one matrix and family.
pub struct LemmaContext<'a> {
    a: &'a Matrix,
    fam: &'a MapFamily,
    h: OrderMap,
    table: XmTable,
    c_g: BigRational,
    c_g_f: f64,
    base: Inputs,
    indicator_profiles: Vec<OnceLock<Result<Vec<f64>>>>,
}

impl<'a> LemmaContext<'a> {
    /// Requires uniform marginals; `C_G` is the exact pairwise constant.
    pub fn new(a: &'a Matrix, fam: &'a MapFamily, base: Inputs) -> Result<Self> {
        fam.require_uniform_marginals()?;
        let c_g = fam.pairwise_constant().c_g;
        Self::with_constant(a, fam, c_g, base)
    }

    /// As [`LemmaContext::new`] but with a caller-supplied pair constant.
    pub fn with_constant(
        a: &'a Matrix,
        fam: &'a MapFamily,
        c_g: BigRational,
        base: Inputs,
    ) -> Result<Self> {
        let h = order_map(a);
        let table = XmTable::new(fam, &h)?;
        let cells = h.len();
        let c_g_f = c_g.to_f64().unwrap_or(f64::NAN);
        let base = Inputs {
            matrix: base.matrix.or_else(|| Some(Arc::from(a.content_hash()))),
            family: base.family.or_else(|| Some(Arc::from(fam.descriptor()))),
            ..base
        };
        Ok(Self {
            a,
            fam,
            h,
            table,
            c_g,
            c_g_f,
            base,
            indicator_profiles: (0..=cells).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn order_map(&self) -> &OrderMap {
        &self.h
    }

    pub fn table(&self) -> &XmTable {
        &self.table
    }

    pub fn pair_constant(&self) -> &BigRational {
        &self.c_g
    }

    fn big_n(&self) -> usize {
        self.fam.codomain()
    }

    fn cells(&self) -> usize {
        self.h.len()
    }

    fn indicator_profile(&self, m: usize) -> Result<&Vec<f64>> {
        self.indicator_profiles[m]
            .get_or_init(|| {
                let am = indicator_matrix(&self.h, m)?;
                kmax_profile(&am, self.fam)
            })
            .as_ref()
            .map_err(|e| crate::error::Error::Domain(e.to_string()))
    }

    /// `P(X_m >= 1) >= (m/N)(1 - C_G (m-1)/(2N))` for every `m`, plus the
    /// threshold instance `P(X_{ceil(N/C_G)} >= 1) >= 1/(2 C_G)`.
    pub fn first_hit(&self) -> Vec<VerificationReport> {
        let nn = self.big_n();
        let mut out = Vec::with_capacity(self.cells() + 1);
        for m in 1..=self.cells() {
            let lhs = self.table.tail(m, 1);
            let rhs = q(m as i64, nn as i64)
                * (BigRational::one() - &self.c_g * q(m as i64 - 1, 2 * nn as i64));
            out.push(
                VerificationReport::compare_exact(FIRST_HIT, self.base.with_m(m), &lhs, Relation::Ge, &rhs)
                    .with_constant(self.c_g_f),
            );
        }
        let inputs = self.base.clone();
        if self.c_g.is_positive() {
            let m = ceil_usize(&(int(nn) / &self.c_g));
            if m <= self.cells() {
                let lhs = self.table.tail(m, 1);
                let rhs = BigRational::one() / (int(2) * &self.c_g);
                out.push(
                    VerificationReport::compare_exact(
                        FIRST_HIT_THRESHOLD,
                        inputs.with_m(m),
                        &lhs,
                        Relation::Ge,
                        &rhs,
                    )
                    .with_constant(self.c_g_f),
                );
            } else {
                out.push(VerificationReport::vacuous(
                    FIRST_HIT_THRESHOLD,
                    inputs,
                    format!("ceil(N/C_G) = {m} exceeds n*N"),
                ));
            }
        } else {
            out.push(VerificationReport::vacuous(FIRST_HIT_THRESHOLD, inputs, "C_G = 0"));
        }
        out
    }

    /// `P(X_m >= θ m/N) >= (1-θ)^2 m / (N + m C_G)` over `m` and the θ grid.
    pub fn anti_concentration(&self) -> Vec<VerificationReport> {
        let nn = self.big_n();
        let mut out = Vec::new();
        for m in 1..=self.cells() {
            for (theta_f, theta) in theta_grid() {
                let threshold = &theta * q(m as i64, nn as i64);
                let lhs = self.table.tail(m, ceil_usize(&threshold));
                let one_minus = BigRational::one() - &theta;
                let rhs = &one_minus * &one_minus * int(m) / (int(nn) + int(m) * &self.c_g);
                out.push(
                    VerificationReport::compare_exact(
                        ANTI_CONCENTRATION,
                        self.base.with_m(m).with_theta(theta_f),
                        &lhs,
                        Relation::Ge,
                        &rhs,
                    )
                    .with_constant(self.c_g_f),
                );
            }
        }
        out
    }

    /// Paley-Zygmund applied to every `X_m` and θ on the grid.
    pub fn paley_zygmund(&self) -> Result<Vec<VerificationReport>> {
        let mut out = Vec::new();
        for m in 1..=self.cells() {
            let z = EmpiricalDistribution::from_xm(&self.table.distribution(m)?);
            for (theta_f, theta) in theta_grid() {
                out.push(paley_zygmund_exact(&z, &theta, self.base.with_m(m).with_theta(theta_f)));
            }
        }
        Ok(out)
    }

    /// `P(X_m >= 1) >= min{m/(2N), 1/(2 C_G)} P(X_{ell N} >= 1)` for every `m`.
    pub fn hit_vs_top(&self, ell: usize) -> Vec<VerificationReport> {
        let nn = self.big_n();
        let top = self.table.tail(ell * nn, 1);
        (1..=self.cells())
            .map(|m| {
                let mut factor = q(m as i64, 2 * nn as i64);
                if self.c_g.is_positive() {
                    factor = factor.min(BigRational::one() / (int(2) * &self.c_g));
                }
                let rhs = factor * &top;
                VerificationReport::compare_exact(
                    HIT_VS_TOP,
                    self.base.with_ell(ell).with_m(m),
                    &self.table.tail(m, 1),
                    Relation::Ge,
                    &rhs,
                )
                .with_constant(self.c_g_f)
            })
            .collect()
    }

    /// `P(X_m >= k) >= P(X_{ell N} >= k) / (2 + 4 C_G)` for `2kN <= m <= nN`.
    pub fn tail_vs_top(&self, ell: usize) -> Vec<VerificationReport> {
        let nn = self.big_n();
        let denom = int(2) + int(4) * &self.c_g;
        let mut out = Vec::new();
        let mut k = 1;
        while 2 * k * nn <= self.cells() {
            let rhs = self.table.tail(ell * nn, k) / &denom;
            for m in 2 * k * nn..=self.cells() {
                out.push(
                    VerificationReport::compare_exact(
                        TAIL_VS_TOP,
                        self.base.with_ell(ell).with_m(m).with_k(k),
                        &self.table.tail(m, k),
                        Relation::Ge,
                        &rhs,
                    )
                    .with_constant(denom.to_f64().unwrap_or(f64::NAN)),
                );
            }
            k += 1;
        }
        if out.is_empty() {
            out.push(VerificationReport::vacuous(
                TAIL_VS_TOP,
                self.base.with_ell(ell),
                "no k >= 1 with 2kN <= nN",
            ));
        }
        out
    }

    /// `E S(avg(a_m)) <= (8 + 16 C_G) E S(a_m)` for the indicator matrices
    /// `a_m`, `m = 1..=ell N`.
    pub fn averaging_indicator(&self, ell: usize) -> Result<Vec<VerificationReport>> {
        let constant = 8.0 + 16.0 * self.c_g_f;
        let top = ell * self.big_n();
        let mut out = Vec::with_capacity(top);
        for m in 1..=top {
            let am = indicator_matrix(&self.h, m)?;
            let lhs_m = averaged_matrix(&am, &self.h, ell)?;
            let lhs: f64 = kmax_profile(&lhs_m, self.fam)?[..ell].iter().sum();
            let rhs: f64 = self.indicator_profile(m)?[..ell].iter().sum();
            out.push(
                VerificationReport::compare(
                    AVERAGING_INDICATOR,
                    self.base.with_ell(ell).with_m(m),
                    lhs,
                    Relation::Le,
                    constant * rhs,
                )
                .with_constant(constant),
            );
        }
        Ok(out)
    }

    /// `E S(avg(a')) <= (8 + 16 C_G) E S(a')` where `a'` keeps the `ell N`
    /// largest entries of the matrix.
    pub fn averaging_general(&self, ell: usize) -> Result<VerificationReport> {
        let constant = 8.0 + 16.0 * self.c_g_f;
        let reduced = keep_top(self.a, &self.h, ell * self.big_n())?;
        let avg = averaged_matrix(&reduced, &self.h, ell)?;
        let lhs: f64 = kmax_profile(&avg, self.fam)?[..ell].iter().sum();
        let rhs: f64 = kmax_profile(&reduced, self.fam)?[..ell].iter().sum();
        Ok(VerificationReport::compare(
            AVERAGING_GENERAL,
            self.base.with_ell(ell),
            lhs,
            Relation::Le,
            constant * rhs,
        )
        .with_constant(constant))
    }

    /// `E kmax b >= 1/(2 + 4 C_G)` for the indicator `b` of the `ell N`
    /// top positions and `1 <= k <= floor(ell/2)`.
    pub fn indicator_kmax_floor(&self, ell: usize) -> Result<Vec<VerificationReport>> {
        let constant = 1.0 / (2.0 + 4.0 * self.c_g_f);
        if ell / 2 == 0 {
            return Ok(vec![VerificationReport::vacuous(
                INDICATOR_KMAX_FLOOR,
                self.base.with_ell(ell),
                "no k with 1 <= k <= ell/2",
            )]);
        }
        let profile = self.indicator_profile(ell * self.big_n())?;
        Ok((1..=ell / 2)
            .map(|k| {
                VerificationReport::compare(
                    INDICATOR_KMAX_FLOOR,
                    self.base.with_ell(ell).with_k(k),
                    profile[k - 1],
                    Relation::Ge,
                    constant,
                )
                .with_constant(constant)
            })
            .collect())
    }

    /// Checks that do not depend on `ell`.
    pub fn ell_independent(&self) -> Result<Vec<VerificationReport>> {
        let mut out = self.first_hit();
        out.extend(self.anti_concentration());
        out.extend(self.paley_zygmund()?);
        Ok(out)
    }

    /// Checks parameterized by `ell`.
    pub fn for_ell(&self, ell: usize) -> Result<Vec<VerificationReport>> {
        if ell == 0 || ell > self.a.rows() {
            return domain(format!("ell = {ell} outside 1..={}", self.a.rows()));
        }
        let mut out = self.hit_vs_top(ell);
        out.extend(self.tail_vs_top(ell));
        out.extend(self.averaging_indicator(ell)?);
        out.push(self.averaging_general(ell)?);
        out.extend(self.indicator_kmax_floor(ell)?);
        Ok(out)
    }
}

/// Every lemma instance for one matrix, family, and `ell`.
pub fn lemma_suite(a: &Matrix, fam: &MapFamily, ell: usize) -> Result<Vec<VerificationReport>> {
    let ctx = LemmaContext::new(a, fam, Inputs::default())?;
    let mut out = ctx.ell_independent()?;
    out.extend(ctx.for_ell(ell)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    fn diag2() -> Matrix {
        Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn first_hit_is_tight_on_sym2_identity() {
        let sym2 = MapFamily::symmetric_group(2).unwrap();
        let a = diag2();
        let ctx = LemmaContext::new(&a, &sym2, Inputs::default()).unwrap();
        let r = ctx.first_hit().into_iter().find(|r| r.check_id.as_ref() == FIRST_HIT && r.inputs.m == Some(2)).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.lhs, 0.5);
        assert_eq!(r.rhs, 0.5);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn paley_zygmund_examples() {
        let c = EmpiricalDistribution::from_values(&[3.0, 3.0]).unwrap();
        let r = paley_zygmund_check(&c, 0.5).unwrap();
        assert_eq!((r.lhs, r.rhs, r.status), (1.0, 0.25, Status::Pass));

        let sym2 = MapFamily::symmetric_group(2).unwrap();
        let h = order_map(&diag2());
        let d = crate::orderstat::xm_distribution(&sym2, &h, 2).unwrap();
        let z = EmpiricalDistribution::from_xm(&d);
        assert_eq!(z.mean(), q(1, 1));
        assert_eq!(z.second_moment(), q(2, 1));
        let r = paley_zygmund_check(&z, 0.5).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.5, 0.125));

        let zero = EmpiricalDistribution::from_values(&[0.0, 0.0]).unwrap();
        assert_eq!(paley_zygmund_check(&zero, 0.5).unwrap().status, Status::Vacuous);
        assert!(paley_zygmund_check(&c, 0.0).is_err());
        assert!(paley_zygmund_check(&c, 1.0).is_err());
        assert!(EmpiricalDistribution::from_values(&[-1.0]).is_err());
    }

    #[test]
    fn kmax_floor_on_constant_matrix() {
        let sym2 = MapFamily::symmetric_group(2).unwrap();
        let ones = Matrix::ones(2, 2).unwrap();
        let ctx = LemmaContext::new(&ones, &sym2, Inputs::default()).unwrap();
        let r = ctx.indicator_kmax_floor(2).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].lhs, r[0].rhs, r[0].status), (1.0, 0.1, Status::Pass));
        assert_eq!(ctx.indicator_kmax_floor(1).unwrap()[0].status, Status::Vacuous);
    }

    #[test]
    fn averaging_indicator_is_equality_at_full_block() {
        let a = Matrix::from_rows(&[[0.3, 0.9, 0.1], [0.5, 0.2, 0.8], [0.4, 0.7, 0.6]]).unwrap();
        let fam = MapFamily::symmetric_group(3).unwrap();
        let ctx = LemmaContext::new(&a, &fam, Inputs::default()).unwrap();
        for ell in 1..=3 {
            let reps = ctx.averaging_indicator(ell).unwrap();
            let last = reps.last().unwrap();
            assert!((last.lhs * last.constant.unwrap() - last.rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn full_suite_passes_on_small_cases() {
        let a = Matrix::from_rows(&[[0.3, 0.9, 0.1], [0.5, 0.2, 0.8], [0.4, 0.7, 0.6]]).unwrap();
        for fam in [MapFamily::symmetric_group(3).unwrap(), MapFamily::full_mapping(3, 3).unwrap()] {
            for ell in 1..=3 {
                let reps = lemma_suite(&a, &fam, ell).unwrap();
                assert!(reps.iter().all(|r| r.passed()), "{fam} ell={ell}");
            }
        }
    }

    #[test]
    fn suite_rejects_nonuniform_family() {
        let fam = MapFamily::explicit(2, 2, vec![vec![0, 1]]).unwrap();
        assert!(matches!(
            lemma_suite(&diag2(), &fam, 1),
            Err(crate::error::Error::Hypothesis { .. })
        ));
    }

    #[test]
    fn an_understated_constant_is_caught() {
        // With C_G forced below its true value the first-hit bound must fail
        // on the tight instance.
        let sym2 = MapFamily::symmetric_group(2).unwrap();
        let a = diag2();
        let ctx = LemmaContext::with_constant(&a, &sym2, q(1, 1), Inputs::default()).unwrap();
        assert!(ctx.first_hit().iter().any(|r| r.status == Status::Fail));
    }
}
