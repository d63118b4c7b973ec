//! Verification reports and their canonical serialization.
//!
//! Every report records one directed comparison `lhs REL rhs`. The JSON
//! rendering is canonical: object keys sorted, reals printed with 17
//! significant digits, reports sorted by check id and inputs. Identical runs
//! therefore produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::family::MeasureCertificate;

/// Absolute slack applied to floating-point comparisons in exact mode.
pub const EXACT_SLACK: f64 = 1e-12;

/// Number of standard errors tolerated in Monte Carlo mode.
pub const MC_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "mc")]
    MonteCarlo,
}

/// Direction of the asserted comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `lhs <= rhs`
    Le,
    /// `lhs >= rhs`
    Ge,
    /// `lhs == rhs`
    Eq,
    /// `lhs > rhs`, no slack
    Gt,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Le => "le",
            Relation::Ge => "ge",
            Relation::Eq => "eq",
            Relation::Gt => "gt",
        }
    }

    /// Signed margin, nonnegative when the relation holds.
    pub fn margin(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::Le => rhs - lhs,
            Relation::Ge | Relation::Gt => lhs - rhs,
            Relation::Eq => -(lhs - rhs).abs(),
        }
    }
}

fn mode_str(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::MonteCarlo => "mc",
    }
}

fn status_str(status: Status) -> &'static str {
    match status {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Vacuous => "vacuous",
    }
}

/// Parameters identifying one check instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Inputs {
    /// Content hash of the matrix under test.
    pub matrix: Option<Arc<str>>,
    /// Corpus identifier of the matrix.
    pub matrix_id: Option<Arc<str>>,
    pub family: Option<Arc<str>>,
    pub ell: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub j: Option<usize>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub theta: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
}

impl Inputs {
    pub fn with_ell(&self, ell: usize) -> Self {
        Self { ell: Some(ell), ..self.clone() }
    }

    pub fn with_m(&self, m: usize) -> Self {
        Self { m: Some(m), ..self.clone() }
    }

    pub fn with_k(&self, k: usize) -> Self {
        Self { k: Some(k), ..self.clone() }
    }

    pub fn with_p(&self, p: f64) -> Self {
        Self { p: Some(p), ..self.clone() }
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        Self { theta: Some(theta), ..self.clone() }
    }

    fn to_json(&self) -> Json {
        let mut o = BTreeMap::new();
        let mut put = |k: &str, v: Option<Json>| {
            if let Some(v) = v {
                o.insert(k.to_string(), v);
            }
        };
        put("matrix", self.matrix.as_deref().map(Json::str));
        put("matrix_id", self.matrix_id.as_deref().map(Json::str));
        put("family", self.family.as_deref().map(Json::str));
        put("ell", self.ell.map(|v| Json::Int(v as i128)));
        put("m", self.m.map(|v| Json::Int(v as i128)));
        put("k", self.k.map(|v| Json::Int(v as i128)));
        put("j", self.j.map(|v| Json::Int(v as i128)));
        put("n", self.n.map(|v| Json::Int(v as i128)));
        put("p", self.p.map(Json::Real));
        put("theta", self.theta.map(Json::Real));
        put("seed", self.seed.map(|v| Json::Int(v as i128)));
        put("samples", self.samples.map(|v| Json::Int(v as i128)));
        Json::Obj(o)
    }
}

/// Outcome of one directed comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub check_id: Arc<str>,
    pub inputs: Inputs,
    pub lhs: f64,
    pub rhs: f64,
    /// The constant entering the bound, when there is one.
    pub constant: Option<f64>,
    pub relation: Relation,
    pub margin: f64,
    pub status: Status,
    pub mode: Mode,
    pub stderr: Option<f64>,
    pub note: Option<String>,
}

impl VerificationReport {
    /// Floating-point comparison with the default exact-mode slack.
    pub fn compare(check_id: &str, inputs: Inputs, lhs: f64, rel: Relation, rhs: f64) -> Self {
        Self::compare_with_slack(check_id, inputs, lhs, rel, rhs, EXACT_SLACK)
    }

    pub fn compare_with_slack(
        check_id: &str,
        inputs: Inputs,
        lhs: f64,
        rel: Relation,
        rhs: f64,
        slack: f64,
    ) -> Self {
        let margin = rel.margin(lhs, rhs);
        let ok = match rel {
            Relation::Gt => margin > 0.0,
            _ => margin >= -slack,
        };
        Self {
            check_id: check_id.into(),
            inputs,
            lhs,
            rhs,
            constant: None,
            relation: rel,
            margin,
            status: if ok { Status::Pass } else { Status::Fail },
            mode: Mode::Exact,
            stderr: None,
            note: None,
        }
    }

    /// Exact rational comparison; the recorded values are f64 renderings.
    pub fn compare_exact(
        check_id: &str,
        inputs: Inputs,
        lhs: &BigRational,
        rel: Relation,
        rhs: &BigRational,
    ) -> Self {
        let ok = match rel {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Gt => lhs > rhs,
        };
        let exact_margin = match rel {
            Relation::Le => rhs - lhs,
            Relation::Ge | Relation::Gt => lhs - rhs,
            Relation::Eq => {
                let d = lhs - rhs;
                if d < BigRational::from_integer(0.into()) {
                    d
                } else {
                    -d
                }
            }
        };
        let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        Self {
            check_id: check_id.into(),
            inputs,
            lhs: f(lhs),
            rhs: f(rhs),
            constant: None,
            relation: rel,
            margin: f(&exact_margin),
            status: if ok { Status::Pass } else { Status::Fail },
            mode: Mode::Exact,
            stderr: None,
            note: None,
        }
    }

    /// Monte Carlo comparison; `stderr` is the standard error of the estimated side.
    pub fn compare_mc(
        check_id: &str,
        inputs: Inputs,
        lhs: f64,
        rel: Relation,
        rhs: f64,
        stderr: f64,
    ) -> Self {
        let mut r = Self::compare_with_slack(
            check_id,
            inputs,
            lhs,
            rel,
            rhs,
            MC_SIGMAS * stderr + EXACT_SLACK,
        );
        r.mode = Mode::MonteCarlo;
        r.stderr = Some(stderr);
        r
    }

    /// A check whose hypothesis range is empty or degenerate.
    pub fn vacuous(check_id: &str, inputs: Inputs, note: impl Into<String>) -> Self {
        Self {
            check_id: check_id.into(),
            inputs,
            lhs: 0.0,
            rhs: 0.0,
            constant: None,
            relation: Relation::Le,
            margin: 0.0,
            status: Status::Vacuous,
            mode: Mode::Exact,
            stderr: None,
            note: Some(note.into()),
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    fn to_json(&self) -> Json {
        let mut o = BTreeMap::new();
        o.insert("check_id".into(), Json::str(&self.check_id));
        o.insert("inputs".into(), self.inputs.to_json());
        o.insert("lhs".into(), Json::Real(self.lhs));
        o.insert("rhs".into(), Json::Real(self.rhs));
        o.insert("constant".into(), self.constant.map(Json::Real).unwrap_or(Json::Null));
        o.insert("relation".into(), Json::str(self.relation.as_str()));
        o.insert("margin".into(), Json::Real(self.margin));
        o.insert("status".into(), Json::str(status_str(self.status)));
        o.insert("mode".into(), Json::str(mode_str(self.mode)));
        o.insert("stderr".into(), self.stderr.map(Json::Real).unwrap_or(Json::Null));
        if let Some(note) = &self.note {
            o.insert("note".into(), Json::str(note));
        }
        Json::Obj(o)
    }

    fn sort_key(&self) -> (Arc<str>, String) {
        (self.check_id.clone(), self.inputs.to_json().render())
    }
}

/// Per-check aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub vacuous: usize,
    /// Smallest margin among non-vacuous reports.
    pub worst_margin: Option<f64>,
}

/// A collection of reports with campaign-level metrics.
#[derive(Debug, Clone, Default)]
pub struct ReportSet {
    pub reports: Vec<VerificationReport>,
    pub metrics: BTreeMap<String, f64>,
    pub certificates: Vec<MeasureCertificate>,
}

impl ReportSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&mut self, other: ReportSet) {
        self.reports.extend(other.reports);
        for (k, v) in other.metrics {
            self.metrics.insert(k, v);
        }
        self.certificates.extend(other.certificates);
    }

    /// Sorts reports by check id, then inputs; certificates by family.
    pub fn canonicalize(&mut self) {
        let mut keyed: Vec<_> =
            std::mem::take(&mut self.reports).into_iter().map(|r| (r.sort_key(), r)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        self.reports = keyed.into_iter().map(|(_, r)| r).collect();
        self.certificates.sort_by(|a, b| a.family.cmp(&b.family));
        self.certificates.dedup_by(|a, b| a.family == b.family);
    }

    /// True when no report failed.
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(VerificationReport::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationReport> {
        self.reports.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn summary(&self) -> BTreeMap<String, CheckSummary> {
        let mut out: BTreeMap<String, CheckSummary> = BTreeMap::new();
        for r in &self.reports {
            let s = out.entry(r.check_id.to_string()).or_insert(CheckSummary {
                total: 0,
                pass: 0,
                fail: 0,
                vacuous: 0,
                worst_margin: None,
            });
            s.total += 1;
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Vacuous => s.vacuous += 1,
            }
            if r.status != Status::Vacuous {
                s.worst_margin = Some(s.worst_margin.map_or(r.margin, |w: f64| w.min(r.margin)));
            }
        }
        out
    }

    /// Human-readable pass/fail table.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<36} {:>8} {:>8} {:>6} {:>8}  worst margin",
            "check", "total", "pass", "fail", "vacuous"
        );
        for (id, s) in self.summary() {
            let worst = s.worst_margin.map_or("-".to_string(), |w| format!("{w:.3e}"));
            let _ = writeln!(
                out,
                "{id:<36} {:>8} {:>8} {:>6} {:>8}  {worst}",
                s.total, s.pass, s.fail, s.vacuous
            );
        }
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "{k} = {v:.6e}");
        }
        out
    }

    /// Canonical JSON: sorted keys, 17 significant digits, trailing newline.
    pub fn to_json(&self) -> String {
        let mut set = self.clone();
        set.canonicalize();
        let mut o = BTreeMap::new();
        o.insert(
            "reports".into(),
            Json::Arr(set.reports.iter().map(VerificationReport::to_json).collect()),
        );
        o.insert(
            "metrics".into(),
            Json::Obj(set.metrics.iter().map(|(k, v)| (k.clone(), Json::Real(*v))).collect()),
        );
        o.insert(
            "certificates".into(),
            Json::Arr(set.certificates.iter().map(certificate_json).collect()),
        );
        let summary = set
            .summary()
            .into_iter()
            .map(|(k, s)| {
                let mut so = BTreeMap::new();
                so.insert("total".into(), Json::Int(s.total as i128));
                so.insert("pass".into(), Json::Int(s.pass as i128));
                so.insert("fail".into(), Json::Int(s.fail as i128));
                so.insert("vacuous".into(), Json::Int(s.vacuous as i128));
                so.insert("worst_margin".into(), s.worst_margin.map(Json::Real).unwrap_or(Json::Null));
                (k, Json::Obj(so))
            })
            .collect();
        o.insert("summary".into(), Json::Obj(summary));
        let mut text = Json::Obj(o).render();
        text.push('\n');
        text
    }

    /// Flat CSV with one row per report.
    pub fn to_csv(&self) -> String {
        let mut set = self.clone();
        set.canonicalize();
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = [
            "check_id", "matrix", "matrix_id", "family", "ell", "m", "k", "j", "n", "p", "theta",
            "seed", "samples", "lhs", "rhs", "constant", "relation", "margin", "status", "mode",
            "stderr", "note",
        ];
        w.write_record(header).expect("in-memory csv");
        for r in &set.reports {
            let i = &r.inputs;
            let opt_u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
            let opt_f = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
            let row = [
                r.check_id.to_string(),
                i.matrix.as_deref().unwrap_or("").to_string(),
                i.matrix_id.as_deref().unwrap_or("").to_string(),
                i.family.as_deref().unwrap_or("").to_string(),
                opt_u(i.ell),
                opt_u(i.m),
                opt_u(i.k),
                opt_u(i.j),
                opt_u(i.n),
                opt_f(i.p),
                opt_f(i.theta),
                i.seed.map(|s| s.to_string()).unwrap_or_default(),
                i.samples.map(|s| s.to_string()).unwrap_or_default(),
                fmt_real(r.lhs),
                fmt_real(r.rhs),
                opt_f(r.constant),
                r.relation.as_str().to_string(),
                fmt_real(r.margin),
                status_str(r.status).to_string(),
                mode_str(r.mode).to_string(),
                opt_f(r.stderr),
                r.note.clone().unwrap_or_default(),
            ];
            w.write_record(&row).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

fn certificate_json(c: &MeasureCertificate) -> Json {
    let mut o = BTreeMap::new();
    o.insert("family".into(), Json::str(&c.family));
    o.insert("n".into(), Json::Int(c.n as i128));
    o.insert("N".into(), Json::Int(c.codomain as i128));
    o.insert("size".into(), c.size.map(|s| Json::Int(s as i128)).unwrap_or(Json::Null));
    o.insert("marginals_uniform".into(), Json::Bool(c.marginals_uniform));
    o.insert("worst_marginal_deviation".into(), Json::Real(c.worst_marginal_deviation));
    o.insert("worst_marginal_deviation_exact".into(), Json::str(&c.worst_marginal_deviation_exact));
    o.insert("c_g".into(), Json::Real(c.c_g));
    o.insert("c_g_exact".into(), Json::str(&c.c_g_exact));
    o.insert("max_pair_probability_exact".into(), Json::str(&c.max_pair_probability_exact));
    o.insert(
        "argmax_pair".into(),
        match c.argmax_pair {
            Some(p) => Json::Arr(
                p.iter()
                    .map(|q| Json::Arr(q.iter().map(|&v| Json::Int(v as i128)).collect()))
                    .collect(),
            ),
            None => Json::Null,
        },
    );
    Json::Obj(o)
}

/// Renders a certificate in the canonical JSON style.
pub fn certificate_to_json(c: &MeasureCertificate) -> String {
    let mut s = certificate_json(c).render();
    s.push('\n');
    s
}

/// 17 significant digits in scientific notation; non-finite values become `null`.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// Minimal JSON tree with deterministic rendering.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i128),
    Real(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(BTreeMap<String, Json>),
}

impl Json {
    pub fn str(s: &str) -> Json {
        Json::Str(s.to_string())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Real(x) => out.push_str(&fmt_real(*x)),
            Json::Str(s) => out.push_str(&serde_json::to_string(s).expect("string encodes")),
            Json::Arr(items) => {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            Json::Obj(map) => {
                out.push('{');
                for (k, (key, value)) in map.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    out.push_str(&serde_json::to_string(key).expect("string encodes"));
                    out.push(':');
                    value.write(out);
                }
                out.push('}');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn reals_render_with_17_digits_and_parse_back() {
        for x in [0.1, 1.0 / 3.0, 2.0, -5e-300, 123456.789] {
            let s = fmt_real(x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "{s}");
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(back, x);
        }
        assert_eq!(fmt_real(f64::NAN), "null");
    }

    #[test]
    fn relations_and_slack() {
        let r = VerificationReport::compare("t", Inputs::default(), 1.0, Relation::Le, 1.0 - 1e-13);
        assert_eq!(r.status, Status::Pass);
        let r = VerificationReport::compare("t", Inputs::default(), 1.0, Relation::Le, 0.99);
        assert_eq!(r.status, Status::Fail);
        assert!(r.margin < 0.0);
        let r = VerificationReport::compare("t", Inputs::default(), 0.0, Relation::Gt, 0.0);
        assert_eq!(r.status, Status::Fail);
        let r = VerificationReport::compare("t", Inputs::default(), 2.0, Relation::Eq, 2.0);
        assert_eq!(r.status, Status::Pass);
        let r = VerificationReport::compare_mc("t", Inputs::default(), 1.3, Relation::Le, 1.0, 0.1);
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.mode, Mode::MonteCarlo);
    }

    #[test]
    fn exact_comparison_has_no_slack() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let r = VerificationReport::compare_exact("t", Inputs::default(), &half, Relation::Ge, &half);
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.margin, 0.0);
        let tiny = BigRational::new(BigInt::from(1), BigInt::from(10).pow(30u32));
        let r = VerificationReport::compare_exact(
            "t",
            Inputs::default(),
            &half,
            Relation::Ge,
            &(half.clone() + tiny),
        );
        assert_eq!(r.status, Status::Fail);
    }

    #[test]
    fn json_is_sorted_and_stable() {
        let mut set = ReportSet::new();
        set.reports.push(VerificationReport::compare(
            "b",
            Inputs::default().with_ell(2),
            1.0,
            Relation::Le,
            2.0,
        ));
        set.reports.push(VerificationReport::compare(
            "a",
            Inputs::default().with_ell(1),
            1.0,
            Relation::Le,
            2.0,
        ));
        set.metrics.insert("z".into(), 0.5);
        let json = set.to_json();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["reports"][0]["check_id"], "a");
        assert_eq!(parsed["summary"]["b"]["pass"], 1);
        // Reversing insertion order does not change the bytes.
        set.reports.reverse();
        assert_eq!(set.to_json(), json);
        assert!(set.to_csv().starts_with("check_id,"));
        assert_eq!(set.to_csv().lines().count(), 3);
    }
}
