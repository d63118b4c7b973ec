//! Corpus-wide verification campaigns.
//!
//! Every `(matrix, family)` pair is an independent job. Jobs run on the
//! rayon pool; their reports are concatenated in job order and the set is
//! canonicalized before serialization, so the output does not depend on
//! scheduling.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::EllRange;
use crate::corpus::{Corpus, CorpusMatrix};
use crate::error::{domain, Error, Result};
use crate::family::{FamilyKind, MapFamily, MeasureCertificate, DEFAULT_ENUM_CAP};
use crate::interpolation::{verify_lp_bounds, LP_LOWER_RATIO};
use crate::lemmas::LemmaContext;
use crate::orderstat::{expectation_mc, kmax_profile, result_from_profile};
use crate::orlicz::{extreme_point_checks, orlicz_upper_bound, DEFAULT_TOL, UPPER_BOUND};
use crate::report::{Inputs, Mode, Relation, ReportSet, Status, VerificationReport};

pub const MAIN_LOWER: &str = "avg-orderstat/lower";
pub const MAIN_UPPER: &str = "avg-orderstat/upper";
pub const MAIN_LOWER_EXAMPLE: &str = "avg-orderstat/lower-example-constant";

/// Which map families a campaign runs against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    /// `sym`: the symmetric group on every square cell.
    Sym,
    /// `map`: all maps `{1..n} -> {1..N}` on every cell.
    Map,
    /// `sym:n`
    SymN(usize),
    /// `map:n:N`
    MapN(usize, usize),
    /// `file:PATH`
    File(PathBuf),
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("family must be sym, map, sym:n, map:n:N or file:PATH, got {s:?}"));
        let num = |t: &str| t.parse::<usize>().ok().filter(|&v| v > 0).ok_or_else(bad);
        let parts: Vec<&str> = s.splitn(2, ':').collect();
        match parts.as_slice() {
            ["sym"] => Ok(Self::Sym),
            ["map"] => Ok(Self::Map),
            ["sym", n] => Ok(Self::SymN(num(n)?)),
            ["map", rest] => {
                let (n, c) = rest.split_once(':').ok_or_else(bad)?;
                Ok(Self::MapN(num(n)?, num(c)?))
            }
            ["file", path] if !path.is_empty() => Ok(Self::File(PathBuf::from(path))),
            _ => Err(bad()),
        }
    }
}

impl FamilySpec {
    /// The family to use on an `n x cols` cell, or `None` when the spec does
    /// not apply to that shape.
    pub fn family_for(&self, n: usize, cols: usize, enum_cap: u64) -> Result<Option<MapFamily>> {
        let fam = match *self {
            Self::Sym if n == cols => MapFamily::symmetric_group(n)?,
            Self::Map => MapFamily::full_mapping(n, cols)?,
            Self::SymN(k) if k == n && k == cols => MapFamily::symmetric_group(n)?,
            Self::MapN(k, c) if k == n && c == cols => MapFamily::full_mapping(n, cols)?,
            Self::File(ref path) => {
                let f = MapFamily::load(path)?;
                if f.n() != n || f.codomain() != cols {
                    return Ok(None);
                }
                f
            }
            _ => return Ok(None),
        };
        Ok(Some(fam.with_enum_cap(enum_cap)))
    }

    /// The family a sized spec denotes on its own.
    pub fn standalone(&self, enum_cap: u64) -> Result<MapFamily> {
        let fam = match *self {
            Self::SymN(n) => MapFamily::symmetric_group(n)?,
            Self::MapN(n, c) => MapFamily::full_mapping(n, c)?,
            Self::File(ref path) => MapFamily::load(path)?,
            Self::Sym | Self::Map => {
                return domain("family-check needs a sized family: sym:n, map:n:N or file:PATH")
            }
        };
        Ok(fam.with_enum_cap(enum_cap))
    }
}

pub fn parse_families(specs: &[String]) -> Result<Vec<FamilySpec>> {
    specs.iter().map(|s| s.parse()).collect()
}

/// Knobs shared by the campaigns.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOptions {
    /// `None` means every `ell` in `1..=n`.
    pub ell: Option<EllRange>,
    pub p: Vec<f64>,
    /// Sample count used when a family exceeds the enumeration cap.
    pub mc_samples: Option<u64>,
    pub seed: u64,
    pub enum_cap: u64,
    /// Add the `(2/N)·Orlicz norm` upper bound and the extreme-point checks.
    pub orlicz: bool,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        Self {
            ell: None,
            p: crate::config::DEFAULT_P.to_vec(),
            mc_samples: None,
            seed: crate::corpus::DEFAULT_SEED,
            enum_cap: DEFAULT_ENUM_CAP,
            orlicz: true,
        }
    }
}

impl CampaignOptions {
    fn ells(&self, n: usize) -> std::ops::RangeInclusive<usize> {
        match self.ell {
            Some(r) => r.clipped(n),
            None => 1..=n,
        }
    }

    /// `Some((samples, seed))` when `fam` must be sampled.
    fn mc_for(&self, fam: &MapFamily) -> Result<Option<(u64, u64)>> {
        match fam.enumerable_size() {
            Ok(_) => Ok(None),
            Err(e @ Error::Resource { .. }) => match self.mc_samples {
                Some(k) => Ok(Some((k, self.seed))),
                None => Err(e),
            },
            Err(e) => Err(e),
        }
    }
}

struct Cell {
    fam: Arc<MapFamily>,
    cert: MeasureCertificate,
}

/// Builds and certifies each applicable family once per shape.
///
/// Any family with non-uniform marginals aborts the campaign.
fn resolve_cells(
    corpus: &Corpus,
    specs: &[FamilySpec],
    enum_cap: u64,
) -> Result<BTreeMap<(usize, usize), Vec<Cell>>> {
    let mut out = BTreeMap::new();
    for (n, cols) in corpus.shapes() {
        let mut cells: Vec<Cell> = Vec::new();
        for spec in specs {
            if let Some(fam) = spec.family_for(n, cols, enum_cap)? {
                if cells.iter().any(|c| c.fam.descriptor() == fam.descriptor()) {
                    continue;
                }
                let cert = fam.require_uniform_marginals()?;
                cells.push(Cell { fam: Arc::new(fam), cert });
            }
        }
        out.insert((n, cols), cells);
    }
    Ok(out)
}

fn run_jobs<F>(
    corpus: &Corpus,
    specs: &[FamilySpec],
    opts: &CampaignOptions,
    job: F,
) -> Result<ReportSet>
where
    F: Fn(&CorpusMatrix, &Cell) -> Result<Vec<VerificationReport>> + Sync,
{
    let cells = resolve_cells(corpus, specs, opts.enum_cap)?;
    let jobs: Vec<(&CorpusMatrix, &Cell)> = corpus
        .matrices
        .iter()
        .flat_map(|m| {
            cells[&(m.matrix.rows(), m.matrix.cols())].iter().map(move |c| (m, c))
        })
        .collect();
    let parts: Vec<Result<Vec<VerificationReport>>> =
        jobs.par_iter().map(|&(m, c)| job(m, c)).collect();
    let mut set = ReportSet::new();
    for p in parts {
        set.reports.extend(p?);
    }
    set.certificates = cells.values().flatten().map(|c| c.cert.clone()).collect();
    set.canonicalize();
    Ok(set)
}

fn base_inputs(m: &CorpusMatrix, fam: &MapFamily) -> Inputs {
    Inputs {
        matrix: Some(Arc::from(m.matrix.content_hash())),
        matrix_id: Some(Arc::from(m.id.as_str())),
        family: Some(Arc::from(fam.descriptor())),
        ..Inputs::default()
    }
}

/// `1/(32 (1 + 2 C_G)^2)`.
pub fn lower_constant(c_g: f64) -> f64 {
    1.0 / (32.0 * (1.0 + 2.0 * c_g).powi(2))
}

/// The published constant for the symmetric-group and all-maps families
/// on square cells.
pub fn example_constant(fam: &MapFamily) -> Option<f64> {
    if fam.n() != fam.codomain() {
        return None;
    }
    match fam.kind() {
        FamilyKind::SymmetricGroup => Some(1.0 / 800.0),
        FamilyKind::FullMapping => Some(1.0 / 288.0),
        FamilyKind::Explicit => None,
    }
}

fn main_checks(m: &CorpusMatrix, cell: &Cell, opts: &CampaignOptions) -> Result<Vec<VerificationReport>> {
    let (a, fam) = (&m.matrix, cell.fam.as_ref());
    let n = a.rows();
    let nn = a.cols() as f64;
    let base = base_inputs(m, fam);
    let c = lower_constant(cell.cert.c_g);
    let example = example_constant(fam);
    let mc = opts.mc_for(fam)?;
    let profile = match mc {
        None => Some(kmax_profile(a, fam)?),
        Some(_) => None,
    };
    let mut out = Vec::new();
    for ell in opts.ells(n) {
        let inputs = base.with_ell(ell);
        let top = a.top_sum(ell * a.cols()) / nn;
        let (e, stderr, inputs) = match (&profile, mc) {
            (Some(p), _) => (result_from_profile(p, ell).value, None, inputs),
            (None, Some((samples, seed))) => {
                let r = expectation_mc(a, fam, ell, samples, seed)?;
                let inputs = Inputs { seed: Some(seed), samples: Some(samples), ..inputs };
                (r.value, r.stderr, inputs)
            }
            (None, None) => unreachable!("profile is computed whenever sampling is off"),
        };
        let cmp = |id: &str, rel: Relation, rhs: f64, constant: f64| {
            match stderr {
                None => VerificationReport::compare(id, inputs.clone(), e, rel, rhs),
                Some(se) => VerificationReport::compare_mc(id, inputs.clone(), e, rel, rhs, se),
            }
            .with_constant(constant)
        };
        out.push(cmp(MAIN_LOWER, Relation::Ge, c * top, c));
        out.push(cmp(MAIN_UPPER, Relation::Le, 2.0 * top, 2.0));
        if let Some(ce) = example {
            out.push(cmp(MAIN_LOWER_EXAMPLE, Relation::Ge, ce * top, ce));
        }
        if opts.orlicz {
            let rhs = orlicz_upper_bound(a, ell, DEFAULT_TOL)?;
            out.push(cmp(UPPER_BOUND, Relation::Le, rhs, 2.0));
        }
    }
    Ok(out)
}

/// Two-sided bound on `E Σ_{k<=ell} kmax_i |a[i][g(i)]|` for every corpus
/// matrix, applicable family and `ell`, with `C_G` taken from the exact
/// certificate. Adds the published example constants on square cells, the
/// Orlicz-norm upper bound, and the extreme-point identities.
pub fn run_verify_main(corpus: &Corpus, specs: &[FamilySpec], opts: &CampaignOptions) -> Result<ReportSet> {
    let mut set = run_jobs(corpus, specs, opts, |m, c| main_checks(m, c, opts))?;
    if opts.orlicz {
        let cells = resolve_cells(corpus, specs, opts.enum_cap)?;
        let extreme: Vec<Result<Vec<VerificationReport>>> = cells
            .iter()
            .flat_map(|(&(n, _), cs)| cs.iter().flat_map(move |c| opts.ells(n).map(move |ell| (c, ell))))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(c, ell)| match opts.mc_for(&c.fam)? {
                None => extreme_point_checks(&c.fam, ell),
                Some(_) => Ok(Vec::new()),
            })
            .collect();
        for r in extreme {
            set.reports.extend(r?);
        }
        set.canonicalize();
    }
    Ok(set)
}

/// `E ‖(a[i][g(i)])_i‖_p` against the two-term expression for each `p`.
///
/// Records `lp/min-lower-ratio` overall and per `p`; the lower ratio is
/// asserted positive only.
pub fn run_verify_lp(corpus: &Corpus, specs: &[FamilySpec], opts: &CampaignOptions) -> Result<ReportSet> {
    if opts.p.is_empty() {
        return domain("p list is empty");
    }
    let mut set = run_jobs(corpus, specs, opts, |m, cell| {
        let mc = opts.mc_for(&cell.fam)?;
        let mut out = Vec::new();
        for &p in &opts.p {
            out.extend(verify_lp_bounds(&m.matrix, &cell.fam, p, base_inputs(m, &cell.fam), mc)?);
        }
        Ok(out)
    })?;
    let mut overall = f64::INFINITY;
    let mut per_p: BTreeMap<String, f64> = BTreeMap::new();
    for r in &set.reports {
        if r.check_id.as_ref() == LP_LOWER_RATIO && r.status != Status::Vacuous {
            overall = overall.min(r.lhs);
            let key = format!("lp/min-lower-ratio/p={}", r.inputs.p.unwrap_or(f64::NAN));
            let e = per_p.entry(key).or_insert(f64::INFINITY);
            *e = e.min(r.lhs);
        }
    }
    if overall.is_finite() {
        set.metrics.insert("lp/min-lower-ratio".into(), overall);
        set.metrics.extend(per_p);
    }
    for c in &set.certificates {
        set.metrics.insert(format!("lp/reference-constant/{}", c.family), lower_constant(c.c_g));
    }
    Ok(set)
}

/// Every exact lemma instance for every corpus matrix, family and `ell`.
pub fn run_lemmas(corpus: &Corpus, specs: &[FamilySpec], opts: &CampaignOptions) -> Result<ReportSet> {
    run_jobs(corpus, specs, opts, |m, cell| {
        opts.mc_for(&cell.fam)?;
        let ctx = LemmaContext::new(&m.matrix, &cell.fam, base_inputs(m, &cell.fam))?;
        let mut out = ctx.ell_independent()?;
        for ell in opts.ells(m.matrix.rows()) {
            out.extend(ctx.for_ell(ell)?);
        }
        Ok(out)
    })
}

/// Marginal and pair-probability certificate for a sized family spec.
pub fn run_family_check(spec: &FamilySpec, enum_cap: u64) -> Result<MeasureCertificate> {
    Ok(spec.standalone(enum_cap)?.certificate())
}

/// Mode of every report in a set, when uniform.
pub fn uniform_mode(set: &ReportSet) -> Option<Mode> {
    let first = set.reports.first()?.mode;
    set.reports.iter().all(|r| r.mode == first).then_some(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusSpec;
    use crate::matrix::Matrix;

    fn small() -> Corpus {
        CorpusSpec::grid(3, 3, 3, 1, 1, 5).generate()
    }

    #[test]
    fn family_specs_parse() {
        assert_eq!("sym".parse::<FamilySpec>().unwrap(), FamilySpec::Sym);
        assert_eq!("sym:4".parse::<FamilySpec>().unwrap(), FamilySpec::SymN(4));
        assert_eq!("map:3:5".parse::<FamilySpec>().unwrap(), FamilySpec::MapN(3, 5));
        assert_eq!("file:a:b.json".parse::<FamilySpec>().unwrap(), FamilySpec::File("a:b.json".into()));
        for bad in ["", "sym:0", "map:3", "perm", "file:", "map:x:2"] {
            assert!(bad.parse::<FamilySpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn spec_applicability() {
        assert!(FamilySpec::Sym.family_for(2, 3, 100).unwrap().is_none());
        assert!(FamilySpec::Sym.family_for(3, 3, 100).unwrap().is_some());
        assert!(FamilySpec::MapN(2, 3).family_for(2, 3, 100).unwrap().is_some());
        assert!(FamilySpec::MapN(2, 3).family_for(3, 2, 100).unwrap().is_none());
        assert!(FamilySpec::Sym.standalone(100).is_err());
    }

    #[test]
    fn main_campaign_passes_on_small_corpus() {
        let specs = parse_families(&["sym".into(), "map".into()]).unwrap();
        let set = run_verify_main(&small(), &specs, &CampaignOptions::default()).unwrap();
        assert!(set.all_passed(), "{}", set.summary_text());
        let s = set.summary();
        for id in [MAIN_LOWER, MAIN_UPPER, MAIN_LOWER_EXAMPLE, UPPER_BOUND] {
            assert!(s[id].pass > 0, "{id}");
        }
        assert_eq!(set.certificates.len(), 3 + 9);
    }

    #[test]
    fn zero_matrix_passes_both_sides() {
        let corpus = Corpus::single("zero", Matrix::zeros(3, 3).unwrap());
        let set = run_verify_main(&corpus, &[FamilySpec::Sym], &CampaignOptions { orlicz: false, ..Default::default() }).unwrap();
        assert!(set.reports.iter().all(|r| r.lhs == 0.0 && r.rhs == 0.0 && r.passed()));
    }

    #[test]
    fn lp_campaign_records_min_ratio() {
        let set = run_verify_lp(&small(), &[FamilySpec::Map], &CampaignOptions::default()).unwrap();
        assert!(set.all_passed(), "{}", set.summary_text());
        let min = set.metrics["lp/min-lower-ratio"];
        assert!(min > 0.0 && min <= 1.0 + 1e-12);
        assert!(set.metrics.contains_key("lp/min-lower-ratio/p=1.5"));
    }

    #[test]
    fn lemma_campaign_passes() {
        let corpus = CorpusSpec::grid(3, 3, 1, 1, 1, 9).generate();
        let set = run_lemmas(&corpus, &[FamilySpec::Sym, FamilySpec::Map], &CampaignOptions::default()).unwrap();
        assert!(set.all_passed(), "{}", set.summary_text());
    }

    #[test]
    fn nonuniform_family_aborts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        std::fs::write(&path, r#"{"n":2,"N":2,"maps":[[1,1],[1,2]]}"#).unwrap();
        let corpus = Corpus::single("id", Matrix::ones(2, 2).unwrap());
        let err = run_verify_main(&corpus, &[FamilySpec::File(path)], &CampaignOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { .. }));
    }

    #[test]
    fn over_cap_needs_samples() {
        let corpus = Corpus::single("id", Matrix::ones(3, 3).unwrap());
        let opts = CampaignOptions { enum_cap: 5, orlicz: false, ..Default::default() };
        let err = run_verify_main(&corpus, &[FamilySpec::Map], &opts).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
        let opts = CampaignOptions { mc_samples: Some(2000), ..opts };
        let set = run_verify_main(&corpus, &[FamilySpec::Map], &opts).unwrap();
        assert_eq!(uniform_mode(&set), Some(Mode::MonteCarlo));
        assert!(set.all_passed());
    }
}
