//! Finite families of maps `{0..n} -> {0..N}` under normalized counting
//! measure: the symmetric group, the full mapping family, and explicit
//! multisets loaded from JSON.
//!
//! Members are enumerated in lexicographic order and can be addressed by
//! index, so enumerations split into disjoint index ranges for parallel
//! reduction. Sampling derives one sub-seed per draw index, so a sample
//! sequence does not depend on how draws are distributed over workers.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::sub_seed;

/// Largest family size enumerated exactly unless overridden.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Index range handled by one unit of work in parallel enumerations.
pub const ENUM_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    SymmetricGroup,
    FullMapping,
    Explicit,
}

/// A finite multiset of maps with the normalized counting measure.
#[derive(Debug, Clone)]
pub struct MapFamily {
    n: usize,
    codomain: usize,
    kind: FamilyKind,
    members: Vec<Vec<usize>>,
    size: Option<u64>,
    enum_cap: u64,
    label: String,
}

/// JSON form of an explicit family; map values are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyFile {
    pub n: i64,
    #[serde(rename = "N")]
    pub codomain: i64,
    pub maps: Vec<Vec<i64>>,
}

impl MapFamily {
    /// All `n!` permutations of `{0..n}`.
    pub fn symmetric_group(n: usize) -> Result<Self> {
        if n == 0 {
            return domain("symmetric group needs n >= 1");
        }
        let size = (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k));
        Ok(Self {
            n,
            codomain: n,
            kind: FamilyKind::SymmetricGroup,
            members: Vec::new(),
            size,
            enum_cap: DEFAULT_ENUM_CAP,
            label: format!("sym:{n}"),
        })
    }

    /// All `N^n` maps `{0..n} -> {0..N}`.
    pub fn full_mapping(n: usize, codomain: usize) -> Result<Self> {
        if n == 0 || codomain == 0 {
            return domain(format!("mapping family needs n, N >= 1, got n={n}, N={codomain}"));
        }
        let size = u32::try_from(n).ok().and_then(|e| (codomain as u64).checked_pow(e));
        Ok(Self {
            n,
            codomain,
            kind: FamilyKind::FullMapping,
            members: Vec::new(),
            size,
            enum_cap: DEFAULT_ENUM_CAP,
            label: format!("map:{n}:{codomain}"),
        })
    }

    /// Explicit multiset of 0-based maps. Duplicates weight the measure.
    pub fn explicit(n: usize, codomain: usize, maps: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 || codomain == 0 {
            return Err(Error::Parse(format!("family needs n, N >= 1, got n={n}, N={codomain}")));
        }
        if maps.is_empty() {
            return Err(Error::Parse("empty map family".into()));
        }
        for (k, g) in maps.iter().enumerate() {
            if g.len() != n {
                return Err(Error::Parse(format!(
                    "map {} has length {}, expected n = {n}",
                    k + 1,
                    g.len()
                )));
            }
            if let Some(&v) = g.iter().find(|&&v| v >= codomain) {
                return Err(Error::Parse(format!(
                    "map {} takes value {} outside 1..={codomain}",
                    k + 1,
                    v + 1
                )));
            }
        }
        let size = maps.len() as u64;
        Ok(Self {
            n,
            codomain,
            kind: FamilyKind::Explicit,
            members: maps,
            size: Some(size),
            enum_cap: DEFAULT_ENUM_CAP,
            label: format!("explicit:{n}:{codomain}:{size}"),
        })
    }

    pub fn from_file(file: FamilyFile) -> Result<Self> {
        if file.n <= 0 || file.codomain <= 0 {
            return Err(Error::Parse(format!(
                "family needs n, N >= 1, got n={}, N={}",
                file.n, file.codomain
            )));
        }
        let (n, codomain) = (file.n as usize, file.codomain as usize);
        let mut maps = Vec::with_capacity(file.maps.len());
        for (k, g) in file.maps.into_iter().enumerate() {
            let mut m = Vec::with_capacity(g.len());
            for v in g {
                if v < 1 || v > codomain as i64 {
                    return Err(Error::Parse(format!(
                        "map {} takes value {v} outside 1..={codomain}",
                        k + 1
                    )));
                }
                m.push((v - 1) as usize);
            }
            maps.push(m);
        }
        Self::explicit(n, codomain, maps)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: FamilyFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("family JSON: {e}")))?;
        Self::from_file(file)
    }

    /// Loads an explicit family from `{"n": .., "N": .., "maps": [[..], ..]}`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut fam = Self::from_json_str(&text)?;
        fam.label = format!("file:{}", path.display());
        Ok(fam)
    }

    /// Replaces the exact-enumeration cap.
    pub fn with_enum_cap(mut self, cap: u64) -> Self {
        self.enum_cap = cap;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Codomain size `N`.
    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// `None` when the cardinality does not fit in 64 bits.
    pub fn size(&self) -> Option<u64> {
        self.size
    }

    pub fn enum_cap(&self) -> u64 {
        self.enum_cap
    }

    /// Family specifier such as `sym:4`, `map:2:3` or `file:path`.
    pub fn descriptor(&self) -> &str {
        &self.label
    }

    /// Size, provided the family may be enumerated exactly.
    pub fn enumerable_size(&self) -> Result<u64> {
        match self.size {
            Some(s) if s <= self.enum_cap => Ok(s),
            Some(s) => Err(Error::Resource { size: s.to_string(), cap: self.enum_cap }),
            None => Err(Error::Resource { size: self.approx_size(), cap: self.enum_cap }),
        }
    }

    fn approx_size(&self) -> String {
        let log10 = match self.kind {
            FamilyKind::SymmetricGroup => (1..=self.n).map(|k| (k as f64).log10()).sum::<f64>(),
            FamilyKind::FullMapping => self.n as f64 * (self.codomain as f64).log10(),
            FamilyKind::Explicit => (self.members.len() as f64).log10(),
        };
        format!("~1e{log10:.1}")
    }

    /// The member with lexicographic index `index`.
    pub fn member(&self, index: u64) -> Vec<usize> {
        let mut g = vec![0; self.n];
        self.unrank_into(index, &mut g);
        g
    }

    fn unrank_into(&self, mut index: u64, g: &mut [usize]) {
        match self.kind {
            FamilyKind::Explicit => g.copy_from_slice(&self.members[index as usize]),
            FamilyKind::FullMapping => {
                let base = self.codomain as u64;
                for slot in g.iter_mut().rev() {
                    *slot = (index % base) as usize;
                    index /= base;
                }
            }
            FamilyKind::SymmetricGroup => {
                // Factorial number system, most significant digit first.
                let n = self.n;
                let mut avail: Vec<usize> = (0..n).collect();
                let mut fact: u64 = (1..n as u64).product();
                for (pos, slot) in g.iter_mut().enumerate() {
                    let digit = (index / fact) as usize;
                    index %= fact;
                    *slot = avail.remove(digit);
                    let rest = (n - pos - 1) as u64;
                    if rest > 0 {
                        fact /= rest;
                    }
                }
            }
        }
    }

    /// Advances `g` to its lexicographic successor.
    fn advance(&self, index: u64, g: &mut [usize]) {
        match self.kind {
            FamilyKind::Explicit => {
                if let Some(next) = self.members.get(index as usize + 1) {
                    g.copy_from_slice(next);
                }
            }
            FamilyKind::FullMapping => {
                for slot in g.iter_mut().rev() {
                    *slot += 1;
                    if *slot < self.codomain {
                        return;
                    }
                    *slot = 0;
                }
            }
            FamilyKind::SymmetricGroup => next_permutation(g),
        }
    }

    /// Visits the members with indices in `range`, in order.
    pub fn for_each_in_range(&self, range: Range<u64>, mut visit: impl FnMut(&[usize])) {
        if range.is_empty() {
            return;
        }
        let mut g = vec![0; self.n];
        self.unrank_into(range.start, &mut g);
        for idx in range {
            visit(&g);
            self.advance(idx, &mut g);
        }
    }

    /// Visits every member in order. Fails above the enumeration cap.
    pub fn for_each(&self, visit: impl FnMut(&[usize])) -> Result<()> {
        let size = self.enumerable_size()?;
        self.for_each_in_range(0..size, visit);
        Ok(())
    }

    pub fn members(&self) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::with_capacity(self.enumerable_size()? as usize);
        self.for_each(|g| out.push(g.to_vec()))?;
        Ok(out)
    }

    /// Folds every member in fixed-size index chunks and merges the chunk
    /// results in index order, so the result does not depend on scheduling.
    pub fn reduce<T, I, F, M>(&self, init: I, fold: F, mut merge: M) -> Result<T>
    where
        T: Send,
        I: Fn() -> T + Sync,
        F: Fn(&mut T, &[usize]) + Sync,
        M: FnMut(&mut T, T),
    {
        let size = self.enumerable_size()?;
        let chunks = size.div_ceil(ENUM_CHUNK);
        let parts: Vec<T> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                let start = c * ENUM_CHUNK;
                let end = (start + ENUM_CHUNK).min(size);
                self.for_each_in_range(start..end, |g| fold(&mut acc, g));
                acc
            })
            .collect();
        let mut total = init();
        for part in parts {
            merge(&mut total, part);
        }
        Ok(total)
    }

    /// Writes draw number `index` of the stream `seed` into `g`.
    pub fn sample_into(&self, seed: u64, index: u64, g: &mut [usize]) {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(sub_seed(seed, index));
        match self.kind {
            FamilyKind::SymmetricGroup => {
                for (k, slot) in g.iter_mut().enumerate() {
                    *slot = k;
                }
                g.shuffle(&mut rng);
            }
            FamilyKind::FullMapping => {
                for slot in g.iter_mut() {
                    *slot = rng.random_range(0..self.codomain);
                }
            }
            FamilyKind::Explicit => {
                let k = rng.random_range(0..self.members.len());
                g.copy_from_slice(&self.members[k]);
            }
        }
    }

    /// `count` i.i.d. uniform draws, reproducible from `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<Vec<usize>>> {
        if count == 0 {
            return domain("sample count must be at least 1");
        }
        Ok((0..count as u64)
            .into_par_iter()
            .map(|idx| {
                let mut g = vec![0; self.n];
                self.sample_into(seed, idx, &mut g);
                g
            })
            .collect())
    }

    /// Exact check of the uniform-marginal condition `P(g(i)=j) = 1/N`.
    pub fn check_marginals(&self) -> Marginals {
        let target = BigRational::new(BigInt::one(), BigInt::from(self.codomain));
        let (uniform, worst) = match self.kind {
            FamilyKind::SymmetricGroup | FamilyKind::FullMapping => (true, BigRational::zero()),
            FamilyKind::Explicit => {
                let total = BigInt::from(self.members.len());
                let mut counts = vec![0u64; self.n * self.codomain];
                for g in &self.members {
                    for (i, &j) in g.iter().enumerate() {
                        counts[i * self.codomain + j] += 1;
                    }
                }
                let worst = counts
                    .iter()
                    .map(|&c| (BigRational::new(BigInt::from(c), total.clone()) - &target).abs())
                    .max()
                    .unwrap_or_else(BigRational::zero);
                (worst.is_zero(), worst)
            }
        };
        Marginals { uniform, worst_deviation: worst }
    }

    /// Exact `C_G = N^2 · max P(g(i1)=j1, g(i2)=j2)` over distinct pairs.
    pub fn pairwise_constant(&self) -> PairConstant {
        let n2 = BigInt::from(self.codomain * self.codomain);
        let (max_prob, argmax) = match self.kind {
            FamilyKind::SymmetricGroup | FamilyKind::FullMapping if self.n >= 2 => {
                let (denom, pair) = if self.kind == FamilyKind::SymmetricGroup {
                    ((self.n * (self.n - 1)) as u64, ((0, 0), (1, 1)))
                } else {
                    ((self.codomain * self.codomain) as u64, ((0, 0), (1, 0)))
                };
                (BigRational::new(BigInt::one(), BigInt::from(denom)), Some(pair))
            }
            FamilyKind::SymmetricGroup | FamilyKind::FullMapping => {
                // A single coordinate cannot take two values at once.
                let pair = (self.codomain >= 2).then_some(((0, 0), (0, 1)));
                (BigRational::zero(), pair)
            }
            FamilyKind::Explicit => self.explicit_pair_max(),
        };
        PairConstant { c_g: max_prob.clone() * BigRational::from_integer(n2), max_prob, argmax }
    }

    fn explicit_pair_max(&self) -> (BigRational, Option<Pair>) {
        let mut counts: HashMap<Pair, u64> = HashMap::new();
        for g in &self.members {
            for i1 in 0..self.n {
                for i2 in i1 + 1..self.n {
                    *counts.entry(((i1, g[i1]), (i2, g[i2]))).or_default() += 1;
                }
            }
        }
        let best = counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        let total = BigInt::from(self.members.len());
        match best {
            Some((pair, c)) => (BigRational::new(BigInt::from(c), total), Some(pair)),
            None => {
                let pair = (self.codomain >= 2).then_some(((0, 0), (0, 1)));
                (BigRational::zero(), pair)
            }
        }
    }

    /// Marginal and pairwise certificate.
    pub fn certificate(&self) -> MeasureCertificate {
        let m = self.check_marginals();
        let p = self.pairwise_constant();
        MeasureCertificate {
            family: self.label.clone(),
            n: self.n,
            codomain: self.codomain,
            size: self.size,
            marginals_uniform: m.uniform,
            worst_marginal_deviation: m.worst_deviation.to_f64().unwrap_or(f64::NAN),
            worst_marginal_deviation_exact: m.worst_deviation.to_string(),
            c_g: p.c_g.to_f64().unwrap_or(f64::NAN),
            c_g_exact: p.c_g.to_string(),
            max_pair_probability_exact: p.max_prob.to_string(),
            argmax_pair: p.argmax.map(|((a, b), (c, d))| [[a + 1, b + 1], [c + 1, d + 1]]),
        }
    }

    /// The certificate, or a hypothesis error when marginals are not uniform.
    pub fn require_uniform_marginals(&self) -> Result<MeasureCertificate> {
        let cert = self.certificate();
        if cert.marginals_uniform {
            Ok(cert)
        } else {
            Err(Error::Hypothesis {
                family: self.label.clone(),
                deviation: cert.worst_marginal_deviation,
                certificate: Box::new(cert),
            })
        }
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

type Pair = ((usize, usize), (usize, usize));

/// Result of the marginal check.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub uniform: bool,
    /// `max |P(g(i)=j) - 1/N|`.
    pub worst_deviation: BigRational,
}

/// Result of the pair-probability computation.
#[derive(Debug, Clone)]
pub struct PairConstant {
    pub c_g: BigRational,
    pub max_prob: BigRational,
    /// 0-based maximizing pair, if any distinct pair exists.
    pub argmax: Option<Pair>,
}

/// Serializable certificate for the marginal and pairwise conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureCertificate {
    pub family: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub codomain: usize,
    pub size: Option<u64>,
    pub marginals_uniform: bool,
    pub worst_marginal_deviation: f64,
    pub worst_marginal_deviation_exact: String,
    pub c_g: f64,
    pub c_g_exact: String,
    pub max_pair_probability_exact: String,
    /// 1-based `[[i1, j1], [i2, j2]]`.
    pub argmax_pair: Option<[[usize; 2]; 2]>,
}

fn next_permutation(p: &mut [usize]) {
    let n = p.len();
    if n < 2 {
        return;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        p.reverse();
        return;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    /// Counts marginal and pair events by brute-force enumeration.
    fn enumerated_certificate(f: &MapFamily) -> (bool, BigRational) {
        let members = f.members().unwrap();
        let total = members.len() as i64;
        let (n, nn) = (f.n(), f.codomain());
        let mut uniform = true;
        for i in 0..n {
            for j in 0..nn {
                let c = members.iter().filter(|g| g[i] == j).count() as i64;
                uniform &= ratio(c, total) == ratio(1, nn as i64);
            }
        }
        let mut best = BigRational::zero();
        for i1 in 0..n {
            for j1 in 0..nn {
                for i2 in 0..n {
                    for j2 in 0..nn {
                        if (i1, j1) == (i2, j2) {
                            continue;
                        }
                        let c = members.iter().filter(|g| g[i1] == j1 && g[i2] == j2).count();
                        best = best.max(ratio(c as i64, total));
                    }
                }
            }
        }
        (uniform, best * ratio((nn * nn) as i64, 1))
    }

    #[test]
    fn sizes() {
        assert_eq!(MapFamily::symmetric_group(1).unwrap().size(), Some(1));
        assert_eq!(MapFamily::symmetric_group(3).unwrap().size(), Some(6));
        assert_eq!(MapFamily::symmetric_group(4).unwrap().size(), Some(24));
        assert_eq!(MapFamily::full_mapping(2, 2).unwrap().size(), Some(4));
        assert_eq!(MapFamily::full_mapping(3, 2).unwrap().size(), Some(8));
        assert_eq!(MapFamily::full_mapping(1, 5).unwrap().size(), Some(5));
        assert_eq!(MapFamily::symmetric_group(30).unwrap().size(), None);
        assert!(MapFamily::symmetric_group(0).is_err());
    }

    #[test]
    fn enumeration_cap() {
        let big = MapFamily::symmetric_group(11).unwrap();
        assert!(matches!(big.enumerable_size(), Err(Error::Resource { .. })));
        assert!(MapFamily::symmetric_group(10).unwrap().enumerable_size().is_ok());
        let capped = MapFamily::full_mapping(3, 3).unwrap().with_enum_cap(10);
        assert!(capped.for_each(|_| {}).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic_and_unranking_agrees() {
        for fam in [
            MapFamily::symmetric_group(4).unwrap(),
            MapFamily::full_mapping(3, 3).unwrap(),
        ] {
            let all = fam.members().unwrap();
            assert_eq!(all.len() as u64, fam.size().unwrap());
            assert!(all.windows(2).all(|w| w[0] < w[1]));
            for (idx, g) in all.iter().enumerate() {
                assert_eq!(&fam.member(idx as u64), g);
            }
            let mut tail = Vec::new();
            fam.for_each_in_range(7..all.len() as u64, |g| tail.push(g.to_vec()));
            assert_eq!(&tail[..], &all[7..]);
        }
    }

    #[test]
    fn closed_form_certificates_match_enumeration() {
        for n in 1..=5 {
            let sym = MapFamily::symmetric_group(n).unwrap();
            let (u, c) = enumerated_certificate(&sym);
            assert!(u && sym.check_marginals().uniform);
            assert_eq!(sym.pairwise_constant().c_g, c, "sym:{n}");
            for nn in 1..=4 {
                let map = MapFamily::full_mapping(n, nn).unwrap();
                let (u, c) = enumerated_certificate(&map);
                assert!(u && map.check_marginals().uniform);
                assert_eq!(map.pairwise_constant().c_g, c, "map:{n}:{nn}");
            }
        }
    }

    #[test]
    fn pairwise_constant_examples() {
        let c = |f: MapFamily| f.pairwise_constant().c_g;
        assert_eq!(c(MapFamily::symmetric_group(3).unwrap()), ratio(3, 2));
        assert_eq!(c(MapFamily::symmetric_group(2).unwrap()), ratio(2, 1));
        for n in 2..=6 {
            assert_eq!(c(MapFamily::full_mapping(n, n).unwrap()), ratio(1, 1));
            assert_eq!(c(MapFamily::symmetric_group(n).unwrap()), ratio(n as i64, n as i64 - 1));
        }
    }

    #[test]
    fn explicit_family_matches_builtin() {
        let f = MapFamily::from_json_str(r#"{"n":2,"N":2,"maps":[[1,2],[2,1]]}"#).unwrap();
        assert_eq!(f.size(), Some(2));
        let sym = MapFamily::symmetric_group(2).unwrap();
        assert_eq!(f.members().unwrap(), sym.members().unwrap());
        assert_eq!(f.pairwise_constant().c_g, sym.pairwise_constant().c_g);
        assert!(f.check_marginals().uniform);
    }

    #[test]
    fn explicit_family_validation() {
        assert!(MapFamily::from_json_str(r#"{"n":2,"N":2,"maps":[[1,3]]}"#).is_err());
        assert!(MapFamily::from_json_str(r#"{"n":2,"N":2,"maps":[[1,0]]}"#).is_err());
        assert!(MapFamily::from_json_str(r#"{"n":2,"N":2,"maps":[[1]]}"#).is_err());
        assert!(MapFamily::from_json_str(r#"{"n":2,"N":2,"maps":[]}"#).is_err());
    }

    #[test]
    fn identity_only_family_is_not_uniform() {
        let f = MapFamily::explicit(2, 2, vec![vec![0, 1]]).unwrap();
        let m = f.check_marginals();
        assert!(!m.uniform);
        assert_eq!(m.worst_deviation, ratio(1, 2));
        assert!(matches!(f.require_uniform_marginals(), Err(Error::Hypothesis { .. })));
    }

    #[test]
    fn duplicates_weight_the_measure() {
        let f = MapFamily::explicit(2, 2, vec![vec![0, 1], vec![0, 1], vec![1, 0]]).unwrap();
        let m = f.check_marginals();
        assert_eq!(m.worst_deviation, ratio(1, 6));
        let p = f.pairwise_constant();
        assert_eq!(p.max_prob, ratio(2, 3));
        assert_eq!(p.argmax, Some(((0, 0), (1, 1))));
    }

    #[test]
    fn samples_are_valid_and_reproducible() {
        let sym = MapFamily::symmetric_group(3).unwrap();
        let a = sym.sample(11, 200).unwrap();
        for g in &a {
            let mut s = g.clone();
            s.sort();
            assert_eq!(s, vec![0, 1, 2]);
        }
        assert_eq!(a, sym.sample(11, 200).unwrap());
        assert_ne!(a, sym.sample(12, 200).unwrap());
        // A prefix of a longer stream equals the shorter stream.
        assert_eq!(&sym.sample(11, 400).unwrap()[..200], &a[..]);

        let single = MapFamily::explicit(3, 2, vec![vec![1, 0, 1]]).unwrap();
        assert!(single.sample(5, 50).unwrap().iter().all(|g| g == &[1, 0, 1]));
        assert!(sym.sample(0, 0).is_err());
    }

    #[test]
    fn sampled_marginals_are_near_uniform() {
        let fam = MapFamily::full_mapping(2, 3).unwrap();
        let count = 100_000;
        let draws = fam.sample(2024, count).unwrap();
        let p = 1.0 / 3.0;
        let band = 4.0 * (p * (1.0 - p) / count as f64).sqrt();
        for j in 0..3 {
            let freq = draws.iter().filter(|g| g[0] == j).count() as f64 / count as f64;
            assert!((freq - p).abs() <= band, "j={j}: {freq}");
        }
    }

    #[test]
    fn reduce_is_order_independent_of_chunking() {
        let fam = MapFamily::symmetric_group(8).unwrap();
        let total = fam
            .reduce(|| 0u64, |acc, g| *acc += g[0] as u64, |a, b| *a += b)
            .unwrap();
        // Each value appears in position 0 exactly 7! times.
        assert_eq!(total, 5040 * (0..8).sum::<u64>());
    }
}
