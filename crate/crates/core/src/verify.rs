//! Numerical certificates for the extremal inequalities and the transformation
//! lemmas behind them.
//!
//! Every check records the quantities it computed and a list of comparisons.
//! Strict inequalities must clear `strict_margin`, non-strict ones may be
//! violated by at most `equality_band`, equalities must agree within
//! `equality_band`, and residuals must stay below their stated bound. A
//! certificate passes iff every comparison holds; inputs outside a claim's
//! hypotheses yield a `not-applicable` certificate instead of a vacuous pass.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::charpoly::{largest_real_root, CharPolyError, CharPolySpec, PolyKind};
use crate::dense::{q_index_via_charpoly, spectral_radius_eigen, spectral_radius_via_charpoly, DenseError, CHARPOLY_CAP};
use crate::digraph::{Digraph, GraphError};
use crate::enumerate::{certify_minimum, EnumError, EnumerationTask, ReportVerdict};
use crate::families::{build, subdivide_arc, Family, FamilyError, FamilySpec};
use crate::numfmt::{g17, to_sorted_json, G17};
use crate::spectral::{
    q_index, q_index_by_component_blocks, q_index_by_induced_components, signless_laplacian, SolverConfig,
    SpectralError, SpectralResult,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    CharPoly(#[from] CharPolyError),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error("unknown claim '{0}'")]
    UnknownClaim(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub solver: SolverConfig,
    /// Strictness margin and equality band are `band_multiplier * solver.tol`.
    pub band_multiplier: f64,
    /// Bound for eigen-equation residuals.
    pub residual_tol: f64,
    /// Bound for agreement between independent routes to the same value.
    pub cross_tol: f64,
    pub timestamp: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            band_multiplier: 10.0,
            residual_tol: 1e-8,
            cross_tol: 1e-7,
            timestamp: false,
        }
    }
}

impl VerifyConfig {
    pub fn band(&self) -> f64 {
        self.band_multiplier * self.solver.tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not-applicable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    LessEq,
    #[serde(rename = "==")]
    Equal,
    /// `lhs` is a nonnegative error that must not exceed `rhs`.
    #[serde(rename = "err<=")]
    Within,
    /// Structural yes/no fact; `lhs` is 1 when it holds.
    #[serde(rename = "fact")]
    Fact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    pub lhs: G17,
    pub relation: Relation,
    pub rhs: G17,
    /// Margin the comparison had to clear.
    pub margin: G17,
    /// Distance from the pass/fail boundary; positive iff the comparison holds.
    pub slack: G17,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(G17),
    Vector(Vec<G17>),
    Count(u64),
    Flag(bool),
    Text(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl Params {
    pub fn npq(n: usize, p: usize, q: usize) -> Self {
        Self {
            n: Some(n),
            p: Some(p),
            q: Some(q),
            ..Default::default()
        }
    }

    pub fn described(text: impl Into<String>) -> Self {
        Self {
            description: Some(text.into()),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub claim: String,
    pub params: Params,
    pub values: BTreeMap<String, Value>,
    pub comparisons: Vec<Comparison>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub tolerance: G17,
    pub strict_margin: G17,
    pub equality_band: G17,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    /// Smallest slack over the numeric comparisons.
    pub fn margin(&self) -> Option<f64> {
        self.comparisons
            .iter()
            .filter(|c| c.relation != Relation::Fact)
            .map(|c| c.slack.0)
            .reduce(f64::min)
    }

    pub fn comparison(&self, name: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.name == name)
    }

    pub fn real(&self, name: &str) -> Option<f64> {
        match self.values.get(name)? {
            Value::Real(x) => Some(x.0),
            _ => None,
        }
    }

    pub fn to_json_line(&self) -> String {
        to_sorted_json(self)
    }

    pub fn csv_row(&self) -> String {
        let num = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.claim,
            num(self.params.n),
            num(self.params.p),
            num(self.params.q),
            self.verdict,
            self.margin().map(g17).unwrap_or_default()
        )
    }
}

pub const CSV_HEADER: &str = "claim,n,p,q,verdict,margin";

/// Certificates as JSON lines.
pub fn to_jsonl(certs: &[Certificate]) -> String {
    certs.iter().map(|c| c.to_json_line() + "\n").collect()
}

/// CSV summary with header.
pub fn to_csv(certs: &[Certificate]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in certs {
        out.push_str(&c.csv_row());
        out.push('\n');
    }
    out
}

struct Builder {
    cert: Certificate,
    band: f64,
    not_applicable: bool,
}

impl Builder {
    fn new(claim: &str, params: Params, cfg: &VerifyConfig) -> Self {
        let band = cfg.band();
        let timestamp = cfg.timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        });
        Self {
            cert: Certificate {
                claim: claim.to_string(),
                params,
                values: BTreeMap::new(),
                comparisons: Vec::new(),
                verdict: Verdict::Pass,
                notes: Vec::new(),
                tolerance: G17(cfg.solver.tol),
                strict_margin: G17(band),
                equality_band: G17(band),
                timestamp,
            },
            band,
            not_applicable: false,
        }
    }

    fn real(&mut self, name: &str, x: f64) -> &mut Self {
        self.cert.values.insert(name.to_string(), Value::Real(G17(x)));
        self
    }

    fn vector(&mut self, name: &str, xs: &[f64]) -> &mut Self {
        let v = xs.iter().map(|&x| G17(x)).collect();
        self.cert.values.insert(name.to_string(), Value::Vector(v));
        self
    }

    fn count(&mut self, name: &str, k: u64) -> &mut Self {
        self.cert.values.insert(name.to_string(), Value::Count(k));
        self
    }

    fn text(&mut self, name: &str, s: impl Into<String>) -> &mut Self {
        self.cert.values.insert(name.to_string(), Value::Text(s.into()));
        self
    }

    fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.cert.notes.push(s.into());
        self
    }

    fn push(&mut self, name: &str, lhs: f64, relation: Relation, rhs: f64, margin: f64, slack: f64) -> &mut Self {
        self.cert.comparisons.push(Comparison {
            name: name.to_string(),
            lhs: G17(lhs),
            relation,
            rhs: G17(rhs),
            margin: G17(margin),
            slack: G17(slack),
            holds: slack > 0.0 || (slack == 0.0 && relation != Relation::Less),
        });
        self
    }

    /// `lhs < rhs` by more than the strict margin.
    fn less(&mut self, name: &str, lhs: f64, rhs: f64) -> &mut Self {
        let m = self.band;
        self.push(name, lhs, Relation::Less, rhs, m, rhs - lhs - m)
    }

    /// `lhs <= rhs` up to the equality band.
    fn less_eq(&mut self, name: &str, lhs: f64, rhs: f64) -> &mut Self {
        let m = self.band;
        self.push(name, lhs, Relation::LessEq, rhs, m, rhs + m - lhs)
    }

    fn equal(&mut self, name: &str, lhs: f64, rhs: f64) -> &mut Self {
        let m = self.band;
        self.push(name, lhs, Relation::Equal, rhs, m, m - (lhs - rhs).abs())
    }

    fn within(&mut self, name: &str, err: f64, bound: f64) -> &mut Self {
        self.push(name, err, Relation::Within, bound, bound, bound - err)
    }

    fn holds(&mut self, name: &str, ok: bool) -> &mut Self {
        let e = if ok { 1.0 } else { 0.0 };
        self.push(name, e, Relation::Fact, 1.0, 0.0, if ok { 1.0 } else { -1.0 })
    }

    fn not_applicable(&mut self, why: impl Into<String>) -> &mut Self {
        self.not_applicable = true;
        self.note(why)
    }

    fn finish(&mut self) -> Certificate {
        let mut cert = self.cert.clone();
        cert.verdict = if self.not_applicable {
            Verdict::NotApplicable
        } else if !cert.comparisons.is_empty() && cert.comparisons.iter().all(|c| c.holds) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        cert
    }
}

fn family(f: Family, n: usize, p: usize, q: usize) -> Result<Digraph, VerifyError> {
    Ok(build(FamilySpec::new(f, n, p, q))?.digraph)
}

fn spectral(g: &Digraph, cfg: &VerifyConfig) -> Result<SpectralResult, VerifyError> {
    Ok(q_index(g, cfg.solver)?)
}

/// `G - (u,v) + (u,w)` as arc sets; the identity when `w == v`.
fn set_rotation(g: &Digraph, u: usize, v: usize, w: usize) -> Result<Digraph, VerifyError> {
    if w == v {
        return Ok(g.clone());
    }
    Ok(g.without_arc(u, v)?.with_arc(u, w)?)
}

/// `B3` by its defining arc-set formula (coincides with `B1` when `p = 1`).
pub fn b3_by_formula(n: usize, p: usize, q: usize) -> Result<Digraph, VerifyError> {
    set_rotation(&family(Family::B1, n, p, q)?, n, p, 1)
}

/// `B4` by its defining arc-set formula (coincides with `B2` when `q = 1`).
pub fn b4_by_formula(n: usize, p: usize, q: usize) -> Result<Digraph, VerifyError> {
    set_rotation(&family(Family::B2, n, p, q)?, n, p + q, p + 1)
}

fn require_parity(f: Family, n: usize, p: usize, q: usize) -> Result<(), VerifyError> {
    match FamilySpec::new(f, n, p, q).validate() {
        Ok(()) | Err(FamilyError::Degenerate { .. }) => Ok(()),
        Err(e) => Err(e.into()),
    }
}

/// `q(B1) <= q(B2)`, equality iff `p = q`, by power iteration and by the roots
/// of `f` and `g`.
pub fn check_theorem1(n: usize, p: usize, q: usize, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    require_parity(Family::B1, n, p, q)?;
    let mut b = Builder::new("thm1", Params::npq(n, p, q), cfg);
    let q1 = spectral(&family(Family::B1, n, p, q)?, cfg)?.q;
    let q2 = spectral(&family(Family::B2, n, p, q)?, cfg)?.q;
    let rf = largest_real_root(&CharPolySpec::new(PolyKind::F, n, p, q)?, cfg.solver.tol * 1e-3)?.root;
    let rg = largest_real_root(&CharPolySpec::new(PolyKind::G, n, p, q)?, cfg.solver.tol * 1e-3)?.root;
    b.real("q_b1", q1)
        .real("q_b2", q2)
        .real("root_f", rf)
        .real("root_g", rg)
        .real("abs_q_b1_minus_root_f", (q1 - rf).abs())
        .real("abs_q_b2_minus_root_g", (q2 - rg).abs());
    if p == q {
        b.equal("spectral: q(B1) = q(B2)", q1, q2)
            .equal("charpoly: root f = root g", rf, rg);
    } else {
        b.less("spectral: q(B1) < q(B2)", q1, q2)
            .less("charpoly: root f < root g", rf, rg);
    }
    Ok(b.finish())
}

/// `q(B3) > q(B1)` and the Perron-entry inequality `x_1 > x_p` on `B1`.
pub fn check_theorem2(n: usize, p: usize, q: usize, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    require_parity(Family::B1, n, p, q)?;
    let mut b = Builder::new("thm2", Params::npq(n, p, q), cfg);
    let b1 = spectral(&family(Family::B1, n, p, q)?, cfg)?;
    let b3 = spectral(&b3_by_formula(n, p, q)?, cfg)?;
    if p == 1 {
        b.note("p = 1: v_p = v_1, so the rotation (v_n, v_p) -> (v_n, v_1) leaves B1 unchanged");
    }
    b.real("q_b1", b1.q)
        .real("q_b3", b3.q)
        .real("x_1", b1.entry(1))
        .real("x_p", b1.entry(p))
        .less("q(B1) < q(B3)", b1.q, b3.q)
        .less("B1: x_p < x_1", b1.entry(p), b1.entry(1));
    Ok(b.finish())
}

/// `q(B4) > q(B2)` and `x_{p+1} > x_{p+q}` on `B2`.
pub fn check_theorem3(n: usize, p: usize, q: usize, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    require_parity(Family::B2, n, p, q)?;
    let mut b = Builder::new("thm3", Params::npq(n, p, q), cfg);
    let b2 = spectral(&family(Family::B2, n, p, q)?, cfg)?;
    let b4 = spectral(&b4_by_formula(n, p, q)?, cfg)?;
    if q == 1 {
        b.note("q = 1: v_{p+q} = v_{p+1}, so the rotation (v_n, v_{p+q}) -> (v_n, v_{p+1}) leaves B2 unchanged");
    }
    b.real("q_b2", b2.q)
        .real("q_b4", b4.q)
        .real("x_p+1", b2.entry(p + 1))
        .real("x_p+q", b2.entry(p + q))
        .less("q(B2) < q(B4)", b2.q, b4.q)
        .less("B2: x_{p+q} < x_{p+1}", b2.entry(p + q), b2.entry(p + 1));
    Ok(b.finish())
}

/// `q(B5) <= q(B6)`, equality iff `p = q`.
pub fn check_theorem4(n: usize, p: usize, q: usize, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    require_parity(Family::B5, n, p, q)?;
    let mut b = Builder::new("thm4", Params::npq(n, p, q), cfg);
    let q5 = spectral(&family(Family::B5, n, p, q)?, cfg)?.q;
    let q6 = spectral(&family(Family::B6, n, p, q)?, cfg)?.q;
    b.real("q_b5", q5).real("q_b6", q6);
    if p == q {
        b.equal("q(B5) = q(B6)", q5, q6);
    } else {
        b.less("q(B5) < q(B6)", q5, q6);
    }
    Ok(b.finish())
}

/// `q(B1_n) < q(B5_{n-1})`, recorded next to the same-order inequality against
/// `B1_n` with its last arc turned to `v_{p+1}` and the subdivision step that
/// links the two.
pub fn check_theorem5(n: usize, p: usize, q: usize, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    require_parity(Family::B1, n, p, q)?;
    let mut b = Builder::new("thm5", Params::npq(n, p, q), cfg);
    if n - p - q < 3 {
        b.not_applicable("B5_{n-1,p,q} needs p + q <= n - 2");
        return Ok(b.finish());
    }
    let b1_graph = family(Family::B1, n, p, q)?;
    let b1 = spectral(&b1_graph, cfg)?;
    let shifted_graph = set_rotation(&b1_graph, n, p, p + 1)?;
    let shifted = spectral(&shifted_graph, cfg)?;
    let smaller_graph = family(Family::B5, n - 1, p, q)?;
    let smaller = spectral(&smaller_graph, cfg)?;
    let subdivision = subdivide_arc(&smaller_graph, n - 1, p + 1)?;
    b.real("q_b1_n", b1.q)
        .real("q_b5_shape_n", shifted.q)
        .real("q_b5_n-1", smaller.q)
        .real("x_p", b1.entry(p))
        .real("x_p+1", b1.entry(p + 1))
        .less("stated: q(B1_n) < q(B5_{n-1})", b1.q, smaller.q)
        .less("same order: B1_n: x_p < x_{p+1}", b1.entry(p), b1.entry(p + 1))
        .less("same order: q(B1_n) < q(B1_n - (v_n,v_p) + (v_n,v_{p+1}))", b1.q, shifted.q)
        .holds("subdivision: B5_{n-1} with (v_{n-1},v_{p+1}) subdivided is the rotated B1_n", subdivision == shifted_graph)
        .less_eq("subdivision: q(rotated B1_n) <= q(B5_{n-1})", shifted.q, smaller.q);
    Ok(b.finish())
}

/// `q(B5_n) <= q(B1_{n-1})` with the rotation/component argument behind it.
pub fn check_theorem6(n: usize, p: usize, q: usize, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    require_parity(Family::B5, n, p, q)?;
    let mut b = Builder::new("thm6", Params::npq(n, p, q), cfg);
    let b5_graph = family(Family::B5, n, p, q)?;
    let b5 = spectral(&b5_graph, cfg)?;
    let b1_graph = family(Family::B1, n - 1, p, q)?;
    let b1 = spectral(&b1_graph, cfg)?;
    let star = set_rotation(&b5_graph, n - 1, n, p)?;
    let comps = star.strongly_connected_components();
    let mut sizes: Vec<usize> = comps.iter().map(Vec::len).collect();
    sizes.sort_unstable();
    let big = comps.iter().find(|c| c.len() == n - 1);
    let labeled_match = big.is_some_and(|c| c.iter().copied().eq(1..n))
        && star.induced(&(1..n).collect::<Vec<_>>())? == b1_graph;
    let q_star = q_index_by_component_blocks(&star, cfg.solver)?;
    let q_star_induced = q_index_by_induced_components(&star, cfg.solver)?;
    let q_star_dense = spectral_radius_eigen(&signless_laplacian(&star))?;
    b.real("q_b5_n", b5.q)
        .real("q_b1_n-1", b1.q)
        .real("q_rotated", q_star)
        .real("q_rotated_induced_components", q_star_induced)
        .real("q_rotated_dense", q_star_dense)
        .real("x_n", b5.entry(n))
        .real("x_p", b5.entry(p))
        .count("components", comps.len() as u64)
        .text("component_sizes", format!("{sizes:?}"))
        .less_eq("stated: q(B5_n) <= q(B1_{n-1})", b5.q, b1.q)
        .less_eq("B5_n: x_n <= x_p", b5.entry(n), b5.entry(p))
        .holds("rotation has components of sizes n-1 and 1", sizes == [1, n - 1])
        .holds("large component is B1_{n-1} on v_1..v_{n-1}", labeled_match)
        .equal("component maximum: q(rotated) = q(B1_{n-1})", q_star, b1.q)
        .equal("induced components: q = q(B1_{n-1})", q_star_induced, b1.q)
        .within("dense oracle: |q(rotated) - dense|", (q_star - q_star_dense).abs(), cfg.cross_tol)
        .less_eq("rotation: q(B5_n) <= q(rotated)", b5.q, q_star);
    Ok(b.finish())
}

/// Chain `q(B5_n) <= q(B1_{n-1}) <= q(B2_{n-1}) <= q(B4_{n-1})`.
pub fn check_chain(n: usize, p: usize, q: usize, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    require_parity(Family::B5, n, p, q)?;
    let mut b = Builder::new("chain", Params::npq(n, p, q), cfg);
    let q5 = spectral(&family(Family::B5, n, p, q)?, cfg)?.q;
    let q1 = spectral(&family(Family::B1, n - 1, p, q)?, cfg)?.q;
    let q2 = spectral(&family(Family::B2, n - 1, p, q)?, cfg)?.q;
    let q4 = spectral(&b4_by_formula(n - 1, p, q)?, cfg)?.q;
    b.real("q_b5_n", q5)
        .real("q_b1_n-1", q1)
        .real("q_b2_n-1", q2)
        .real("q_b4_n-1", q4)
        .less_eq("q(B5_n) <= q(B1_{n-1})", q5, q1)
        .less_eq("q(B1_{n-1}) <= q(B2_{n-1})", q1, q2)
        .less_eq("q(B2_{n-1}) <= q(B4_{n-1})", q2, q4);
    Ok(b.finish())
}

/// `x_1 > x_p` and `x_{p+1} > x_p` on `B1`.
pub fn check_lemma6(n: usize, p: usize, q: usize, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    require_parity(Family::B1, n, p, q)?;
    let mut b = Builder::new("lemma6", Params::npq(n, p, q), cfg);
    let r = spectral(&family(Family::B1, n, p, q)?, cfg)?;
    if p == 1 {
        b.note("p = 1: v_p = v_1");
    }
    b.real("x_1", r.entry(1))
        .real("x_p", r.entry(p))
        .real("x_p+1", r.entry(p + 1))
        .less("(i) x_p < x_1", r.entry(p), r.entry(1))
        .less("(ii) x_p < x_{p+1}", r.entry(p), r.entry(p + 1));
    Ok(b.finish())
}

/// Hypothesis violations for a strict Perron-entry chain along `path`.
fn lemma4_violations(g: &Digraph, path: &[usize]) -> Result<Vec<String>, VerifyError> {
    let mut violations = Vec::new();
    if path.len() < 3 {
        violations.push("path needs at least 3 vertices".to_string());
    }
    if path.iter().any(|&v| v == 0 || v > g.n()) {
        violations.push("path vertex out of range".to_string());
    } else {
        let mut seen = std::collections::BTreeSet::new();
        if !path.iter().all(|v| seen.insert(v)) {
            violations.push("path repeats a vertex".to_string());
        }
        if let Some(w) = path.windows(2).find(|w| !g.has_arc(w[0], w[1])) {
            violations.push(format!("missing arc ({}, {})", w[0], w[1]));
        }
        if path.len() >= 3 {
            for &v in &path[1..path.len() - 1] {
                let d = g.out_degree(v)?;
                if d != 1 {
                    violations.push(format!("internal vertex {v} has outdegree {d}"));
                }
            }
        }
    }
    if !g.is_strongly_connected() {
        violations.push("digraph is not strongly connected".to_string());
    }
    if g.is_directed_cycle() {
        violations.push("digraph is a directed cycle".to_string());
    }
    Ok(violations)
}

fn lemma4_chain(b: &mut Builder, r: &SpectralResult, path: &[usize]) {
    for w in path[1..].windows(2) {
        b.less(&format!("x_{} < x_{}", w[0], w[1]), r.entry(w[0]), r.entry(w[1]));
    }
}

/// Strictly increasing Perron entries along `path[1..]` when every internal
/// path vertex has outdegree 1.
pub fn check_lemma4(g: &Digraph, path: &[usize], cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    let params = Params {
        n: Some(g.n()),
        ..Params::described(format!("path {path:?}"))
    };
    let mut b = Builder::new("lemma4", params, cfg);
    let violations = lemma4_violations(g, path)?;
    if !violations.is_empty() {
        for v in violations {
            b.not_applicable(v);
        }
        return Ok(b.finish());
    }
    let r = spectral(g, cfg)?;
    let entries: Vec<f64> = path.iter().map(|&v| r.entry(v)).collect();
    b.vector("path_entries", &entries);
    lemma4_chain(&mut b, &r, path);
    Ok(b.finish())
}

/// The attached path of a constructed family member as it appears in the
/// digraph (`B3` and `B4` end at their rotated targets).
pub fn family_path(spec: &FamilySpec) -> Option<Vec<usize>> {
    let mut path = spec.attached_path()?;
    let last = path.len() - 1;
    match spec.family {
        Family::B3 => path[last] = 1,
        Family::B4 => path[last] = spec.p + 1,
        _ => {}
    }
    Some(path)
}

/// Open directed paths covering the attached path. When the attached path
/// returns to its start it is a cycle, covered by the two maximal open paths
/// `start, p+q+1, ..., n` and `p+q+1, ..., n, start`.
pub fn family_path_segments(spec: &FamilySpec) -> Vec<Vec<usize>> {
    let Some(path) = family_path(spec) else { return Vec::new() };
    let (first, last) = (path[0], path[path.len() - 1]);
    if first != last {
        return vec![path];
    }
    let inner = &path[..path.len() - 1];
    let mut rotated = inner[1..].to_vec();
    rotated.push(first);
    vec![inner.to_vec(), rotated]
}

/// Strictly increasing Perron entries along the attached path of a family member.
pub fn check_family_path(spec: FamilySpec, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    let built = build(spec)?;
    let segments = family_path_segments(&spec);
    let params = Params {
        family: Some(spec.family),
        description: Some(format!("paths {segments:?}")),
        ..Params::npq(spec.n, spec.p, spec.q)
    };
    let mut b = Builder::new("lemma4", params, cfg);
    if segments.is_empty() {
        b.not_applicable(format!("{spec} has no attached path"));
        return Ok(b.finish());
    }
    let mut usable = Vec::new();
    for seg in &segments {
        let violations = lemma4_violations(&built.digraph, seg)?;
        if violations.is_empty() {
            usable.push(seg);
        } else {
            b.note(format!("path {seg:?} skipped: {}", violations.join("; ")));
        }
    }
    if usable.is_empty() {
        b.not_applicable("no attached path satisfies the hypotheses");
        return Ok(b.finish());
    }
    let r = spectral(&built.digraph, cfg)?;
    for seg in usable {
        lemma4_chain(&mut b, &r, seg);
    }
    Ok(b.finish())
}

/// Eigen-equation structure of the Perron vector of a path family member:
/// equal entries on each side away from the path start, the per-row
/// equations, and the path relation `(q-1)^(n-p-q) x_{p+q+1} = x_end`.
pub fn check_perron_structure(spec: FamilySpec, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    let FamilySpec { family: fam, n, p, q } = spec;
    if !matches!(fam, Family::B1 | Family::B2 | Family::B5 | Family::B6) {
        return Err(VerifyError::InvalidParameters(format!("{fam} is not one of b1, b2, b5, b6")));
    }
    spec.validate()?;
    let params = Params {
        family: Some(fam),
        ..Params::npq(n, p, q)
    };
    let mut b = Builder::new("perron", params, cfg);
    let g = family(fam, n, p, q)?;
    let r = spectral(&g, cfg)?;
    let rho = r.q;
    let x = |v: usize| r.entry(v);
    let (pf, qf) = (p as f64, q as f64);
    let (start, end) = spec.path_endpoints().expect("path family");
    let tol = cfg.residual_tol;

    b.real("q", rho).vector("x", &r.x).real("row_residual", r.residual);
    b.within("max row residual", r.residual, tol);

    // Side groups: every side vertex except the path start has the same row.
    let mut group = |name: &str, side: std::ops::RangeInclusive<usize>| {
        let members: Vec<usize> = side.filter(|&v| v != start).collect();
        if members.len() >= 2 {
            let mean = members.iter().map(|&v| x(v)).sum::<f64>() / members.len() as f64;
            let spread = members.iter().map(|&v| (x(v) - mean).abs()).fold(0.0, f64::max);
            b.within(name, spread, cfg.band());
        }
    };
    if fam == Family::B1 {
        group("side V_p: x_2 = ... = x_p", 1..=p);
        group("side V_q: x_{p+1} = ... = x_{p+q}", p + 1..=p + q);
    } else {
        group("V_p group equality", 1..=p);
        group("V_q group equality", p + 1..=p + q);
    }

    let chain = (rho - 1.0).powi((n - p - q) as i32) * x(p + q + 1) - x(end);
    if fam == Family::B1 {
        let row_1 = rho * x(1) - ((qf + 1.0) * x(1) + x(p + q + 1) + qf * x(p + 1));
        let row_p1 = rho * x(p + 1) - (pf * x(p + 1) + x(1) + (pf - 1.0) * x(p));
        b.real("row_v1_residual", row_1.abs())
            .real("row_vp+1_residual", row_p1.abs())
            .real("path_residual", chain.abs())
            .within("row v_1", row_1.abs(), tol);
        if p >= 2 {
            let row_p = rho * x(p) - (qf * x(p) + qf * x(p + 1));
            let solved = (rho - qf) * x(p) - qf * x(p + 1);
            b.real("row_vp_residual", row_p.abs())
                .real("row_vp_solved_residual", solved.abs())
                .within("row v_p", row_p.abs(), tol);
            b.within("row v_{p+1}", row_p1.abs(), tol)
                .within("path: (q-1)^(n-p-q) x_{p+q+1} = x_p", chain.abs(), tol)
                .within("row v_p solved: (q - |V_q|) x_p = |V_q| x_{p+1}", solved.abs(), tol);
        } else {
            b.note("p = 1: v_p = v_1 carries the path arc, so the row of v_p is the row of v_1");
            b.within("row v_{p+1}", row_p1.abs(), tol)
                .within("path: (q-1)^(n-p-q) x_{p+q+1} = x_p", chain.abs(), tol);
        }
    } else {
        b.real("path_residual", chain.abs())
            .within("path: (q-1)^(n-p-q) x_{p+q+1} = x_end", chain.abs(), tol);
    }
    Ok(b.finish())
}

/// `|q(B1) - root(f)|` and `|q(B2) - root(g)|` within the cross tolerance, plus
/// the exact characteristic polynomial of `Q(B1)` when small enough.
pub fn check_charpoly_cross(n: usize, p: usize, q: usize, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    require_parity(Family::B1, n, p, q)?;
    let mut b = Builder::new("charpoly-cross", Params::npq(n, p, q), cfg);
    let b1_graph = family(Family::B1, n, p, q)?;
    let b2_graph = family(Family::B2, n, p, q)?;
    let q1 = spectral(&b1_graph, cfg)?.q;
    let q2 = spectral(&b2_graph, cfg)?.q;
    let rf = largest_real_root(&CharPolySpec::new(PolyKind::F, n, p, q)?, cfg.solver.tol * 1e-3)?.root;
    let rg = largest_real_root(&CharPolySpec::new(PolyKind::G, n, p, q)?, cfg.solver.tol * 1e-3)?.root;
    if p == 1 {
        b.note("p = 1: v_p = v_1 and f is not the polynomial of B1");
    }
    if q == 1 {
        b.note("q = 1: v_{p+q} = v_{p+1} and g is not the polynomial of B2");
    }
    b.real("q_b1", q1)
        .real("q_b2", q2)
        .real("root_f", rf)
        .real("root_g", rg)
        .within("|q(B1) - root f|", (q1 - rf).abs(), cfg.cross_tol)
        .within("|q(B2) - root g|", (q2 - rg).abs(), cfg.cross_tol);
    if n <= CHARPOLY_CAP {
        let d1 = q_index_via_charpoly(&b1_graph)?;
        let d2 = q_index_via_charpoly(&b2_graph)?;
        b.real("q_b1_exact_charpoly", d1)
            .real("q_b2_exact_charpoly", d2)
            .within("|q(B1) - det(xI - Q) root|", (q1 - d1).abs(), cfg.cross_tol)
            .within("|q(B2) - det(xI - Q) root|", (q2 - d2).abs(), cfg.cross_tol);
    }
    Ok(b.finish())
}

/// Exhaustive minimality of the predicted family member over the class.
pub fn check_extremal(task: &EnumerationTask, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    let (n, p, q) = (task.n, task.p, task.q);
    let claim = if (n - p - q) % 2 == 0 { "thm7" } else { "thm8" };
    let mut b = Builder::new(claim, Params::npq(n, p, q), cfg);
    let report = certify_minimum(task)?;
    b.real("min_q", report.min_q)
        .real("predicted_q", report.predicted_q)
        .text("predicted", report.predicted.to_string())
        .count("strongly_connected", report.strongly_connected)
        .count("minimizers", report.minimizers.len() as u64)
        .count("minimizer_classes", report.minimizer_classes as u64)
        .equal("q(predicted) = minimum", report.predicted_q, report.min_q)
        .holds("minimizer unique up to isomorphism", report.unique_up_to_isomorphism)
        .holds("every minimizer is isomorphic to the prediction", report.counterexample.is_none());
    if let Some(c) = &report.counterexample {
        b.text("counterexample", to_sorted_json(c));
    }
    let cert = b.finish();
    debug_assert_eq!(report.verdict == ReportVerdict::Pass, cert.passed());
    Ok(cert)
}

/// Reproducible random strongly connected digraph on `n` vertices: rejection
/// sampling at a random density, with a Hamiltonian-cycle fallback.
pub fn random_strong_digraph(rng: &mut ChaCha8Rng, n: usize) -> Digraph {
    let density: f64 = rng.gen_range(0.15..0.6);
    for _ in 0..50 {
        let arcs: Vec<(usize, usize)> = (1..=n)
            .flat_map(|i| (1..=n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .filter(|_| rng.gen_bool(density))
            .collect();
        let g = Digraph::new(n, arcs).expect("simple arcs");
        if g.is_strongly_connected() {
            return g;
        }
    }
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut arcs: Vec<(usize, usize)> = (0..n).map(|k| (order[k], order[(k + 1) % n])).collect();
    for i in 1..=n {
        for j in 1..=n {
            if i != j && rng.gen_bool(density / 2.0) {
                arcs.push((i, j));
            }
        }
    }
    arcs.sort_unstable();
    arcs.dedup();
    Digraph::new(n, arcs).expect("simple arcs")
}

/// Settings for the randomized lemma checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub samples: usize,
    pub max_n: usize,
    pub seed: u64,
    /// Transformation lemmas that only promise `<=` are checked against this bound.
    pub weak_tol: f64,
    /// `x_w - x_v` above which the strict half of the rotation lemma is asserted.
    pub strict_gap: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            max_n: 8,
            seed: 20240601,
            weak_tol: 1e-8,
            strict_gap: 1e-4,
        }
    }
}

impl SampleConfig {
    fn describe(&self, what: &str) -> String {
        format!(
            "{} random strongly connected digraphs, 3 <= n <= {}, seed {}; {what}",
            self.samples, self.max_n, self.seed
        )
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// Tracks the weakest sample per comparison kind.
struct Worst {
    name: &'static str,
    lhs: f64,
    rhs: f64,
    slack: f64,
    violations: Vec<usize>,
    witnesses: Vec<String>,
}

impl Worst {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::INFINITY,
            violations: Vec::new(),
            witnesses: Vec::new(),
        }
    }

    fn record(&mut self, sample: usize, g: &Digraph, lhs: f64, rhs: f64, slack: f64) {
        if slack <= 0.0 {
            self.violations.push(sample);
            self.witnesses.push(g.to_json(None));
        }
        if slack < self.slack {
            (self.lhs, self.rhs, self.slack) = (lhs, rhs, slack);
        }
    }

    fn emit(&self, b: &mut Builder, relation: Relation, margin: f64, count: usize) {
        b.count(&format!("{}: samples", self.name), count as u64)
            .count(&format!("{}: violations", self.name), self.violations.len() as u64);
        if !self.violations.is_empty() {
            b.note(format!("{}: violating samples {:?}", self.name, self.violations));
            for w in &self.witnesses {
                b.note(format!("{}: {w}", self.name));
            }
        }
        if count > 0 {
            let name = format!("{} (weakest sample)", self.name);
            b.push(&name, self.lhs, relation, self.rhs, margin, self.slack);
        }
    }
}

/// Rotation `(u,v) -> (u,w)` with `x_w >= x_v` never lowers the Q-index and
/// raises it strictly when the result is strongly connected and `x_w > x_v`.
pub fn check_lemma1_samples(sc: &SampleConfig, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    let mut b = Builder::new("lemma1", Params::described(sc.describe("arc rotation")), cfg);
    let mut rng = sc.rng(1);
    let band = cfg.band();
    let mut weak = Worst::new("q(G) <= q(H)");
    let mut strict = Worst::new("q(G) < q(H) when H strong and x_w > x_v");
    let (mut nw, mut ns) = (0, 0);
    for k in 0..sc.samples {
        let n = rng.gen_range(3..=sc.max_n);
        let g = random_strong_digraph(&mut rng, n);
        let r = spectral(&g, cfg)?;
        // Rotations to a vertex not already an out-neighbor keep the digraph simple.
        let options: Vec<(usize, usize, usize)> = g
            .arcs()
            .flat_map(|(u, v)| (1..=n).map(move |w| (u, v, w)))
            .filter(|&(u, v, w)| w != u && w != v && !g.has_arc(u, w) && r.entry(w) >= r.entry(v))
            .collect();
        let Some(&(u, v, w)) = options.choose(&mut rng) else { continue };
        let h = set_rotation(&g, u, v, w)?;
        let qh = q_index_by_component_blocks(&h, cfg.solver)?;
        nw += 1;
        weak.record(k, &g, r.q, qh, qh + band - r.q);
        if h.is_strongly_connected() && r.entry(w) - r.entry(v) > sc.strict_gap {
            ns += 1;
            strict.record(k, &g, r.q, qh, qh - r.q - band);
        }
    }
    weak.emit(&mut b, Relation::LessEq, band, nw);
    strict.emit(&mut b, Relation::Less, band, ns);
    b.real("strict_gap", sc.strict_gap);
    Ok(b.finish())
}

/// Spectral radius of `Q(G)` equals the maximum over the strongly connected
/// components (principal blocks of `Q(G)`), against the largest root of the
/// exact characteristic polynomial on arbitrary digraphs; and equals the maximum over induced components on
/// disjoint unions of strongly connected digraphs.
pub fn check_lemma2_samples(sc: &SampleConfig, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    let mut b = Builder::new("lemma2", Params::described(sc.describe("component maximum")), cfg);
    let mut rng = sc.rng(2);
    let mut blocks = Worst::new("|component-block maximum - exact radius|");
    let mut unions = Worst::new("|induced-component maximum - q| on disjoint unions");
    for k in 0..sc.samples {
        let n = rng.gen_range(2..=sc.max_n);
        let density: f64 = rng.gen_range(0.05..0.5);
        let arcs: Vec<(usize, usize)> = (1..=n)
            .flat_map(|i| (1..=n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .filter(|_| rng.gen_bool(density))
            .collect();
        let g = Digraph::new(n, arcs)?;
        let by_blocks = q_index_by_component_blocks(&g, cfg.solver)?;
        let dense = spectral_radius_via_charpoly(&g)?;
        let err = (by_blocks - dense).abs();
        blocks.record(k, &g, err, cfg.cross_tol, cfg.cross_tol - err);

        let n1 = rng.gen_range(2..=sc.max_n.saturating_sub(2).max(2));
        let n2 = rng.gen_range(2..=sc.max_n.saturating_sub(n1).max(2));
        let a = random_strong_digraph(&mut rng, n1);
        let c = random_strong_digraph(&mut rng, n2);
        let union_arcs = a.arcs().chain(c.arcs().map(|(i, j)| (i + n1, j + n1)));
        let u = Digraph::new(n1 + n2, union_arcs)?;
        let induced = q_index_by_induced_components(&u, cfg.solver)?;
        let whole = spectral_radius_via_charpoly(&u)?;
        let err = (induced - whole).abs();
        unions.record(k, &u, err, cfg.cross_tol, cfg.cross_tol - err);
    }
    blocks.emit(&mut b, Relation::Within, cfg.cross_tol, sc.samples);
    unions.emit(&mut b, Relation::Within, cfg.cross_tol, sc.samples);
    Ok(b.finish())
}

/// Deleting an arc whose removal leaves a strongly connected spanning
/// subdigraph strictly lowers the Q-index.
pub fn check_lemma3_samples(sc: &SampleConfig, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    let mut b = Builder::new("lemma3", Params::described(sc.describe("arc deletion")), cfg);
    let mut rng = sc.rng(3);
    let band = cfg.band();
    let mut strict = Worst::new("q(G - e) < q(G)");
    let mut valid = 0;
    for k in 0..sc.samples {
        let n = rng.gen_range(3..=sc.max_n);
        let g = random_strong_digraph(&mut rng, n);
        let removable: Vec<(usize, usize)> = g
            .arcs()
            .filter(|&(u, v)| g.without_arc(u, v).is_ok_and(|h| h.is_strongly_connected()))
            .collect();
        let Some(&(u, v)) = removable.choose(&mut rng) else { continue };
        let h = g.without_arc(u, v)?;
        let (qg, qh) = (spectral(&g, cfg)?.q, spectral(&h, cfg)?.q);
        valid += 1;
        strict.record(k, &g, qh, qg, qg - qh - band);
    }
    strict.emit(&mut b, Relation::Less, band, valid);
    Ok(b.finish())
}

/// Subdividing an arc of a strongly connected digraph other than a directed
/// cycle never raises the Q-index.
pub fn check_lemma5_samples(sc: &SampleConfig, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    let mut b = Builder::new("lemma5", Params::described(sc.describe("arc subdivision")), cfg);
    let mut rng = sc.rng(5);
    let mut weak = Worst::new("q(G^w) <= q(G)");
    let mut valid = 0;
    for k in 0..sc.samples {
        let n = rng.gen_range(3..=sc.max_n);
        let g = random_strong_digraph(&mut rng, n);
        if g.is_directed_cycle() {
            continue;
        }
        let arcs: Vec<(usize, usize)> = g.arcs().collect();
        let &(u, v) = arcs.choose(&mut rng).expect("strong digraph has arcs");
        let h = subdivide_arc(&g, u, v)?;
        let (qg, qh) = (spectral(&g, cfg)?.q, spectral(&h, cfg)?.q);
        valid += 1;
        weak.record(k, &g, qh, qg, qg + sc.weak_tol - qh);
    }
    weak.emit(&mut b, Relation::LessEq, sc.weak_tol, valid);
    Ok(b.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Claim {
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Thm5,
    Thm6,
    Thm7,
    Thm8,
    Chain,
    Lemma1,
    Lemma2,
    Lemma3,
    Lemma4,
    Lemma5,
    Lemma6,
    Perron,
    CharpolyCross,
}

impl Claim {
    pub const ALL: [Claim; 17] = [
        Claim::Thm1,
        Claim::Thm2,
        Claim::Thm3,
        Claim::Thm4,
        Claim::Thm5,
        Claim::Thm6,
        Claim::Thm7,
        Claim::Thm8,
        Claim::Chain,
        Claim::Lemma1,
        Claim::Lemma2,
        Claim::Lemma3,
        Claim::Lemma4,
        Claim::Lemma5,
        Claim::Lemma6,
        Claim::Perron,
        Claim::CharpolyCross,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Claim::Thm1 => "thm1",
            Claim::Thm2 => "thm2",
            Claim::Thm3 => "thm3",
            Claim::Thm4 => "thm4",
            Claim::Thm5 => "thm5",
            Claim::Thm6 => "thm6",
            Claim::Thm7 => "thm7",
            Claim::Thm8 => "thm8",
            Claim::Chain => "chain",
            Claim::Lemma1 => "lemma1",
            Claim::Lemma2 => "lemma2",
            Claim::Lemma3 => "lemma3",
            Claim::Lemma4 => "lemma4",
            Claim::Lemma5 => "lemma5",
            Claim::Lemma6 => "lemma6",
            Claim::Perron => "perron",
            Claim::CharpolyCross => "charpoly-cross",
        }
    }

    /// Claims checked on random samples rather than on `(n, p, q)`.
    pub fn is_sampled(self) -> bool {
        matches!(self, Claim::Lemma1 | Claim::Lemma2 | Claim::Lemma3 | Claim::Lemma5)
    }

    /// Parity of `n - p - q` the claim's families need, if any.
    fn parity(self) -> Option<usize> {
        match self {
            Claim::Thm1 | Claim::Thm2 | Claim::Thm3 | Claim::Thm5 | Claim::Thm8 | Claim::Lemma6 | Claim::CharpolyCross => {
                Some(1)
            }
            Claim::Thm4 | Claim::Thm6 | Claim::Thm7 | Claim::Chain => Some(0),
            _ => None,
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Claim {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        Claim::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or(VerifyError::UnknownClaim(s))
    }
}

/// Parameter ranges for batch verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub n_max: usize,
    pub p_max: usize,
    pub q_max: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            n_max: 16,
            p_max: 5,
            q_max: 5,
        }
    }
}

impl Grid {
    /// All `(n, p, q)` with `p >= q >= 1`, `p + q <= n - 1` and `n - p - q` of
    /// the given parity (either parity when `None`), in lexicographic order.
    pub fn points(&self, parity: Option<usize>) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for n in 3..=self.n_max {
            for p in 1..=self.p_max {
                for q in 1..=self.q_max.min(p) {
                    if p + q < n && parity.is_none_or(|r| (n - p - q) % 2 == r) {
                        out.push((n, p, q));
                    }
                }
            }
        }
        out
    }
}

/// One unit of work in a batch run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Job {
    Point(Claim, usize, usize, usize),
    Family(Claim, FamilySpec),
    Sampled(Claim),
}

/// Expand a claim over a grid, in deterministic order.
pub fn jobs(claim: Claim, grid: &Grid) -> Vec<Job> {
    match claim {
        c if c.is_sampled() => vec![Job::Sampled(c)],
        Claim::Perron | Claim::Lemma4 => {
            let families: &[Family] = if claim == Claim::Perron {
                &[Family::B1, Family::B2, Family::B5, Family::B6]
            } else {
                &[Family::B1, Family::B2, Family::B3, Family::B4, Family::B5, Family::B6]
            };
            grid.points(None)
                .into_iter()
                .flat_map(|(n, p, q)| families.iter().map(move |&f| FamilySpec::new(f, n, p, q)))
                .filter(|s| s.validate().is_ok())
                .map(|s| Job::Family(claim, s))
                .collect()
        }
        c => grid
            .points(c.parity())
            .into_iter()
            .map(|(n, p, q)| Job::Point(c, n, p, q))
            .collect(),
    }
}

/// Run one job.
pub fn run_job(job: Job, cfg: &VerifyConfig, sc: &SampleConfig) -> Result<Certificate, VerifyError> {
    match job {
        Job::Point(claim, n, p, q) => check_point(claim, n, p, q, cfg),
        Job::Family(Claim::Perron, spec) => check_perron_structure(spec, cfg),
        Job::Family(_, spec) => check_family_path(spec, cfg),
        Job::Sampled(Claim::Lemma1) => check_lemma1_samples(sc, cfg),
        Job::Sampled(Claim::Lemma2) => check_lemma2_samples(sc, cfg),
        Job::Sampled(Claim::Lemma3) => check_lemma3_samples(sc, cfg),
        Job::Sampled(_) => check_lemma5_samples(sc, cfg),
    }
}

/// Run a claim at a single `(n, p, q)`.
pub fn check_point(claim: Claim, n: usize, p: usize, q: usize, cfg: &VerifyConfig) -> Result<Certificate, VerifyError> {
    match claim {
        Claim::Thm1 => check_theorem1(n, p, q, cfg),
        Claim::Thm2 => check_theorem2(n, p, q, cfg),
        Claim::Thm3 => check_theorem3(n, p, q, cfg),
        Claim::Thm4 => check_theorem4(n, p, q, cfg),
        Claim::Thm5 => check_theorem5(n, p, q, cfg),
        Claim::Thm6 => check_theorem6(n, p, q, cfg),
        Claim::Thm7 | Claim::Thm8 => {
            let want = if claim == Claim::Thm7 { 0 } else { 1 };
            if q == 0 || p < q || p + q >= n || (n - p - q) % 2 != want {
                return Err(VerifyError::InvalidParameters(format!(
                    "{claim} needs p >= q >= 1, p + q <= n - 1 and n - p - q {}",
                    if want == 0 { "even" } else { "odd" }
                )));
            }
            let task = EnumerationTask {
                solver: cfg.solver,
                band: cfg.band(),
                ..EnumerationTask::new(n, p, q)
            };
            check_extremal(&task, cfg)
        }
        Claim::Chain => check_chain(n, p, q, cfg),
        Claim::Lemma6 => check_lemma6(n, p, q, cfg),
        Claim::CharpolyCross => check_charpoly_cross(n, p, q, cfg),
        Claim::Perron => check_perron_structure(FamilySpec::new(Family::B1, n, p, q), cfg),
        other => Err(VerifyError::InvalidParameters(format!("{other} is not checked at a single (n, p, q)"))),
    }
}

/// Run jobs on `workers` threads; results keep the job order.
pub fn run_jobs(
    jobs: &[Job],
    cfg: &VerifyConfig,
    sc: &SampleConfig,
    workers: usize,
) -> Result<Vec<Certificate>, VerifyError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| VerifyError::InvalidParameters(e.to_string()))?;
    pool.install(|| jobs.par_iter().map(|&j| run_job(j, cfg, sc)).collect())
}
