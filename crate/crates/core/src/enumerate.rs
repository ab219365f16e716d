//! Exhaustive generation of the strongly connected bipartite digraphs on `n`
//! vertices that contain the bidirected `K_{p,q}` on `{1..p | p+1..p+q}`, and
//! certification of the Q-index minimizer.
//!
//! Generation: every extra vertex `p+q+1..n` is assigned to one of the two
//! sides, the `2pq` core arcs are mandatory, and every subset of the remaining
//! cross arcs is a candidate. Candidates are pruned by in/out degree, then by
//! strong connectivity, and only then handed to the eigensolver.
//!
//! A strongly connected bipartite digraph has exactly one bipartition, and the
//! core fixes which class is which, so distinct splits never produce the same
//! labeled digraph. With isomorphism dedup on, only the splits that put the
//! left-assigned extras first are generated (any other split is a relabeling of
//! the extras) and the stream is further reduced to one digraph per
//! isomorphism class.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::digraph::{are_isomorphic, Bipartition, Digraph, DigraphDocument};
use crate::families::{build, Family, FamilyError, FamilySpec};
use crate::numfmt::ser_g17;
use crate::spectral::{perron_root, QMatrix, SolverConfig, SpectralError};

/// Default upper bound on `n`.
pub const DEFAULT_CAP: usize = 7;
/// Hard limit of the bitmask representation and of the isomorphism test.
pub const HARD_CAP: usize = 10;
/// Candidate subsets per parallel work item.
const CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnumError {
    #[error("need p >= q >= 1 and p + q <= n, got n = {n}, p = {p}, q = {q}")]
    InvalidParameters { n: usize, p: usize, q: usize },
    #[error("n = {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("could not start worker pool: {0}")]
    Workers(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationTask {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub solver: SolverConfig,
    /// Ties within this band of the minimum count as minimizers.
    pub band: f64,
    pub dedup: bool,
    pub workers: usize,
    pub cap: usize,
    /// Record wall-clock runtime in the report (off for reproducible output).
    pub timed: bool,
}

impl EnumerationTask {
    pub fn new(n: usize, p: usize, q: usize) -> Self {
        let solver = SolverConfig::default();
        Self {
            n,
            p,
            q,
            solver,
            band: 10.0 * solver.tol,
            dedup: true,
            workers: default_workers(),
            cap: DEFAULT_CAP,
            timed: false,
        }
    }

    pub fn validate(&self) -> Result<(), EnumError> {
        let Self { n, p, q, .. } = *self;
        if q == 0 || p < q || p + q > n {
            return Err(EnumError::InvalidParameters { n, p, q });
        }
        let cap = self.cap.min(HARD_CAP);
        if n > cap {
            return Err(EnumError::CapExceeded { n, cap });
        }
        Ok(())
    }

    /// The family member predicted to be the unique minimizer.
    pub fn predicted(&self) -> FamilySpec {
        let family = match self.n - self.p - self.q {
            0 => Family::Kpq,
            d if d % 2 == 0 => Family::B5,
            _ => Family::B1,
        };
        FamilySpec::new(family, self.n, self.p, self.q)
    }
}

/// Worker count from `QINDEX_WORKERS`, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var("QINDEX_WORKERS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// One side assignment of the extra vertices with its optional arcs.
#[derive(Debug, Clone)]
struct Split {
    n: usize,
    left: u16,
    base_out: Vec<u16>,
    optional: Vec<(u8, u8)>,
}

impl Split {
    fn new(n: usize, p: usize, q: usize, right_extras: u64) -> Self {
        let mut left = 0u16;
        for v in 0..p {
            left |= 1 << v;
        }
        for k in 0..n - p - q {
            if right_extras >> k & 1 == 0 {
                left |= 1 << (p + q + k);
            }
        }
        let mut base_out = vec![0u16; n];
        for u in 0..p {
            for v in p..p + q {
                base_out[u] |= 1 << v;
                base_out[v] |= 1 << u;
            }
        }
        let mut optional = Vec::new();
        for u in 0..n {
            for v in 0..n {
                let crosses = (left >> u & 1) != (left >> v & 1);
                if crosses && base_out[u] >> v & 1 == 0 {
                    optional.push((u as u8, v as u8));
                }
            }
        }
        Self {
            n,
            left,
            base_out,
            optional,
        }
    }

    fn subsets(&self) -> u64 {
        1u64 << self.optional.len()
    }

    /// Out-neighborhood masks of candidate `m`, if it survives the degree and
    /// strong-connectivity filters.
    fn candidate(&self, m: u64) -> Option<Vec<u16>> {
        let mut out = self.base_out.clone();
        let mut bits = m;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            let (u, v) = self.optional[k];
            out[u as usize] |= 1 << v;
            bits &= bits - 1;
        }
        let full = (1u16 << self.n) - 1;
        let mut has_in = 0u16;
        for &o in &out {
            if o == 0 {
                return None;
            }
            has_in |= o;
        }
        if has_in != full {
            return None;
        }
        strongly_connected(&out).then_some(out)
    }

    fn bipartition(&self) -> Bipartition {
        let left = (1..=self.n).filter(|&v| self.left >> (v - 1) & 1 == 1);
        let right = (1..=self.n).filter(|&v| self.left >> (v - 1) & 1 == 0);
        Bipartition::new(self.n, left, right).expect("split covers all vertices")
    }
}

fn strongly_connected(out: &[u16]) -> bool {
    let n = out.len();
    let full = (1u16 << n) - 1;
    let mut inc = vec![0u16; n];
    for (u, &o) in out.iter().enumerate() {
        let mut bits = o;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            inc[v] |= 1 << u;
            bits &= bits - 1;
        }
    }
    reach(out, full) && reach(&inc, full)
}

fn reach(adj: &[u16], full: u16) -> bool {
    let mut seen = 1u16;
    let mut frontier = 1u16;
    while frontier != 0 {
        let mut next = 0u16;
        let mut bits = frontier;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            next |= adj[v];
            bits &= bits - 1;
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == full
}

fn masks_to_digraph(out: &[u16]) -> Digraph {
    let n = out.len();
    let arcs = (0..n).flat_map(|u| (0..n).filter(move |&v| out[u] >> v & 1 == 1).map(move |v| (u + 1, v + 1)));
    Digraph::new(n, arcs).expect("masks describe a simple digraph")
}

fn masks_to_matrix(out: &[u16]) -> QMatrix {
    let n = out.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|u| {
            let mut row: Vec<f64> = (0..n).map(|v| f64::from(out[u] >> v & 1)).collect();
            row[u] = f64::from(out[u].count_ones());
            row
        })
        .collect();
    QMatrix::from_rows(&rows)
}

fn splits(task: &EnumerationTask) -> Vec<Split> {
    let extra = task.n - task.p - task.q;
    let assignments: Vec<u64> = if task.dedup {
        // Right-assigned extras occupy the highest labels.
        (0..=extra).map(|b| ((1u64 << b) - 1) << (extra - b)).collect()
    } else {
        (0..1u64 << extra).collect()
    };
    assignments
        .into_iter()
        .map(|a| Split::new(task.n, task.p, task.q, a))
        .collect()
}

/// A member of the enumerated class with its (unique) bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub digraph: Digraph,
    pub bipartition: Bipartition,
}

/// Stream of class members in deterministic order; one per isomorphism class
/// when `task.dedup` is set.
pub fn enumerate_gnpq(task: &EnumerationTask) -> Result<Box<dyn Iterator<Item = Member>>, EnumError> {
    task.validate()?;
    let labeled = splits(task).into_iter().flat_map(|split| {
        (0..split.subsets()).filter_map(move |m| {
            split.candidate(m).map(|out| Member {
                digraph: masks_to_digraph(&out),
                bipartition: split.bipartition(),
            })
        })
    });
    if !task.dedup {
        return Ok(Box::new(labeled));
    }
    let mut classes = IsoClasses::default();
    Ok(Box::new(labeled.filter(move |m| classes.insert(&m.digraph))))
}

/// Isomorphism-class representatives bucketed by a relabeling-invariant key.
#[derive(Default)]
pub struct IsoClasses {
    buckets: HashMap<Vec<u32>, Vec<Digraph>>,
    count: usize,
}

impl IsoClasses {
    /// Returns true when `g` starts a new class.
    pub fn insert(&mut self, g: &Digraph) -> bool {
        let reps = self.buckets.entry(invariant_key(g)).or_default();
        if reps.iter().any(|r| are_isomorphic(r, g).expect("order within isomorphism cap")) {
            return false;
        }
        reps.push(g.clone());
        self.count += 1;
        true
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Sorted per-vertex signatures: own (out, in) degree plus the sorted degree
/// pairs of out- and in-neighbors.
fn invariant_key(g: &Digraph) -> Vec<u32> {
    let out = g.out_degrees();
    let inc = g.in_degrees();
    let code = |v: usize| (out[v] * 16 + inc[v]) as u32;
    let mut succ = vec![Vec::new(); g.n()];
    let mut pred = vec![Vec::new(); g.n()];
    for (i, j) in g.arcs() {
        succ[i - 1].push(code(j - 1));
        pred[j - 1].push(code(i - 1));
    }
    let mut sigs: Vec<Vec<u32>> = (0..g.n())
        .map(|v| {
            succ[v].sort_unstable();
            pred[v].sort_unstable();
            let mut s = vec![code(v)];
            s.extend(&succ[v]);
            s.push(u32::MAX);
            s.extend(&pred[v]);
            s.push(u32::MAX);
            s
        })
        .collect();
    sigs.sort_unstable();
    sigs.concat()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportVerdict {
    Pass,
    Fail,
}

/// A minimizing digraph in the JSON digraph schema with its Q-index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimizer {
    pub digraph: DigraphDocument,
    #[serde(serialize_with = "ser_g17")]
    pub q: f64,
    pub isomorphic_to_predicted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalReport {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub dedup: bool,
    pub predicted: FamilySpec,
    #[serde(serialize_with = "ser_g17")]
    pub predicted_q: f64,
    #[serde(serialize_with = "ser_g17")]
    pub min_q: f64,
    #[serde(serialize_with = "ser_g17")]
    pub band: f64,
    /// Candidate arc subsets examined over all generated splits.
    pub candidates: u64,
    /// Candidates that are strongly connected (labeled class members generated).
    pub strongly_connected: u64,
    /// Isomorphism classes among the members, when dedup is on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isomorphism_classes: Option<usize>,
    /// Every labeled minimizer, sorted by arc list.
    pub minimizers: Vec<Minimizer>,
    pub minimizer_classes: usize,
    pub unique_up_to_isomorphism: bool,
    pub predicted_attains_minimum: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<DigraphDocument>,
    pub verdict: ReportVerdict,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_g17")]
    pub runtime_seconds: Option<f64>,
}

fn ser_opt_g17<S: serde::Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_g17(v, s),
        None => s.serialize_none(),
    }
}

impl ExtremalReport {
    pub fn to_json(&self) -> String {
        crate::numfmt::to_sorted_json_pretty(self)
    }
}

#[derive(Default)]
struct ChunkResult {
    candidates: u64,
    members: u64,
    min_q: f64,
    /// (q, out masks) within the band of the chunk minimum.
    near_min: Vec<(f64, Vec<u16>)>,
    /// All members, kept only when classes are counted.
    all: Vec<Vec<u16>>,
}

/// Enumerate the class, find every labeled minimizer and check it against the
/// predicted family member.
pub fn certify_minimum(task: &EnumerationTask) -> Result<ExtremalReport, EnumError> {
    task.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(task.workers.max(1))
        .build()
        .map_err(|e| EnumError::Workers(e.to_string()))?;

    let plan = splits(task);
    let items: Vec<(usize, u64, u64)> = plan
        .iter()
        .enumerate()
        .flat_map(|(s, split)| {
            let total = split.subsets();
            (0..total.div_ceil(CHUNK)).map(move |c| (s, c * CHUNK, ((c + 1) * CHUNK).min(total)))
        })
        .collect();

    let results: Vec<Result<ChunkResult, SpectralError>> = pool.install(|| {
        items
            .par_iter()
            .map(|&(s, lo, hi)| {
                let split = &plan[s];
                let mut res = ChunkResult {
                    min_q: f64::INFINITY,
                    ..Default::default()
                };
                for m in lo..hi {
                    res.candidates += 1;
                    let Some(out) = split.candidate(m) else { continue };
                    res.members += 1;
                    let q = perron_root(&masks_to_matrix(&out), task.solver)?.q;
                    if q < res.min_q {
                        res.min_q = q;
                        res.near_min.retain(|(v, _)| *v <= q + task.band);
                    }
                    if q <= res.min_q + task.band {
                        res.near_min.push((q, out.clone()));
                    }
                    if task.dedup {
                        res.all.push(out);
                    }
                }
                Ok(res)
            })
            .collect()
    });

    let mut candidates = 0;
    let mut members = 0;
    let mut min_q = f64::INFINITY;
    let mut near = Vec::new();
    let mut all = Vec::new();
    for r in results {
        let r = r?;
        candidates += r.candidates;
        members += r.members;
        min_q = min_q.min(r.min_q);
        near.extend(r.near_min);
        all.extend(r.all);
    }

    let isomorphism_classes = task.dedup.then(|| count_classes(&pool, &all));

    let predicted = task.predicted();
    let predicted_graph = build(predicted)?.digraph;
    let predicted_q = perron_root(&crate::spectral::signless_laplacian(&predicted_graph), task.solver)?.q;

    let mut minimizers: Vec<(Digraph, f64)> = near
        .into_iter()
        .filter(|(q, _)| *q <= min_q + task.band)
        .map(|(q, out)| (masks_to_digraph(&out), q))
        .collect();
    minimizers.sort_by(|a, b| a.0.arc_set().iter().cmp(b.0.arc_set().iter()));

    let mut classes = IsoClasses::default();
    let mut docs = Vec::with_capacity(minimizers.len());
    let mut counterexample = None;
    for (g, q) in &minimizers {
        classes.insert(g);
        let iso = are_isomorphic(g, &predicted_graph).expect("order within isomorphism cap");
        if !iso && counterexample.is_none() {
            counterexample = Some(g.to_document(None));
        }
        docs.push(Minimizer {
            digraph: g.to_document(None),
            q: *q,
            isomorphic_to_predicted: iso,
        });
    }
    let minimizer_classes = classes.len();
    let unique = minimizer_classes == 1;
    let attains = (predicted_q - min_q).abs() <= task.band && docs.iter().any(|m| m.isomorphic_to_predicted);
    let verdict = if unique && attains && counterexample.is_none() {
        ReportVerdict::Pass
    } else {
        ReportVerdict::Fail
    };

    Ok(ExtremalReport {
        n: task.n,
        p: task.p,
        q: task.q,
        dedup: task.dedup,
        predicted,
        predicted_q,
        min_q,
        band: task.band,
        candidates,
        strongly_connected: members,
        isomorphism_classes,
        minimizers: docs,
        minimizer_classes,
        unique_up_to_isomorphism: unique,
        predicted_attains_minimum: attains,
        counterexample,
        verdict,
        runtime_seconds: task.timed.then(|| start.elapsed().as_secs_f64()),
    })
}

fn count_classes(pool: &rayon::ThreadPool, all: &[Vec<u16>]) -> usize {
    pool.install(|| {
        let mut keyed: Vec<(Vec<u32>, Digraph)> = all
            .par_iter()
            .map(|out| {
                let g = masks_to_digraph(out);
                (invariant_key(&g), g)
            })
            .collect();
        keyed.par_sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let groups: Vec<&[(Vec<u32>, Digraph)]> = keyed.chunk_by(|a, b| a.0 == b.0).collect();
        groups
            .par_iter()
            .map(|group| {
                let mut reps: Vec<&Digraph> = Vec::new();
                for (_, g) in group.iter() {
                    if !reps.iter().any(|r| are_isomorphic(r, g).expect("within cap")) {
                        reps.push(g);
                    }
                }
                reps.len()
            })
            .sum()
    })
}

/// Adding any absent cross arc to a member must strictly raise the Q-index.
/// Checks every `stride`-th member of the labeled stream and returns
/// `(arc additions checked, violations)`.
pub fn monotonicity_spot_check(task: &EnumerationTask, stride: usize) -> Result<(usize, usize), EnumError> {
    let labeled = EnumerationTask { dedup: false, ..*task };
    let mut checked = 0;
    let mut violations = 0;
    for member in enumerate_gnpq(&labeled)?.step_by(stride.max(1)) {
        let g = &member.digraph;
        let base = crate::spectral::q_index(g, task.solver)?.q;
        for u in 1..=g.n() {
            for v in 1..=g.n() {
                if member.bipartition.is_left(u) == member.bipartition.is_left(v) || g.has_arc(u, v) {
                    continue;
                }
                let h = g.with_arc(u, v).expect("absent cross arc");
                let bigger = crate::spectral::q_index(&h, task.solver)?.q;
                checked += 1;
                if !(bigger - base > task.band) {
                    violations += 1;
                }
            }
        }
    }
    Ok((checked, violations))
}
