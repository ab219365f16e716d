//! Labeled simple digraphs on vertices `1..=n`.
//!
//! Vertices are 1-indexed so that family builders and Perron-entry checks can
//! refer to `v_1, ..., v_n` directly. Arcs live in a sorted set, which keeps
//! serialization and iteration order deterministic.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest order accepted by [`are_isomorphic`].
pub const ISOMORPHISM_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("arc ({0}, {1}) listed more than once")]
    MultiArc(usize, usize),
    #[error("arc ({0}, {1}) not present")]
    MissingArc(usize, usize),
    #[error("malformed bipartition: {0}")]
    MalformedBipartition(String),
    #[error("isomorphism test limited to n <= {cap}, got n = {n}")]
    SizeCapExceeded { n: usize, cap: usize },
    #[error("invalid digraph document: {0}")]
    Document(String),
}

/// A simple digraph: no loops, no parallel arcs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digraph {
    n: usize,
    arcs: BTreeSet<(usize, usize)>,
}

impl Digraph {
    /// Build a digraph, rejecting loops, out-of-range endpoints and repeated arcs.
    pub fn new<I>(n: usize, arcs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (i, j) in arcs {
            check_vertex(i, n)?;
            check_vertex(j, n)?;
            if i == j {
                return Err(GraphError::Loop(i));
            }
            if !set.insert((i, j)) {
                return Err(GraphError::MultiArc(i, j));
            }
        }
        Ok(Self { n, arcs: set })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            arcs: BTreeSet::new(),
        }
    }

    /// Directed cycle `1 -> 2 -> ... -> n -> 1`.
    pub fn directed_cycle(n: usize) -> Self {
        assert!(n >= 2, "directed cycle needs at least two vertices");
        Self::new(n, (1..=n).map(|i| (i, i % n + 1))).expect("cycle arcs are valid")
    }

    /// Directed path `1 -> 2 -> ... -> n`.
    pub fn directed_path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i, i + 1))).expect("path arcs are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Arcs in lexicographic order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn arc_set(&self) -> &BTreeSet<(usize, usize)> {
        &self.arcs
    }

    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        self.arcs.contains(&(i, j))
    }

    pub fn vertices(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n
    }

    pub fn out_degree(&self, i: usize) -> Result<usize, GraphError> {
        check_vertex(i, self.n)?;
        Ok(self.arcs.range((i, 0)..(i + 1, 0)).count())
    }

    pub fn in_degree(&self, j: usize) -> Result<usize, GraphError> {
        check_vertex(j, self.n)?;
        Ok(self.arcs.iter().filter(|&&(_, h)| h == j).count())
    }

    /// Out-neighborhood `N_i^+` in increasing order.
    pub fn out_neighbors(&self, i: usize) -> Result<Vec<usize>, GraphError> {
        check_vertex(i, self.n)?;
        Ok(self.arcs.range((i, 0)..(i + 1, 0)).map(|&(_, j)| j).collect())
    }

    /// Outdegrees indexed from zero (entry `k` belongs to vertex `k + 1`).
    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, _) in &self.arcs {
            deg[i - 1] += 1;
        }
        deg
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(_, j) in &self.arcs {
            deg[j - 1] += 1;
        }
        deg
    }

    /// Zero-indexed out-adjacency lists.
    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.arcs {
            adj[i - 1].push(j - 1);
        }
        adj
    }

    pub fn with_arc(&self, i: usize, j: usize) -> Result<Self, GraphError> {
        check_vertex(i, self.n)?;
        check_vertex(j, self.n)?;
        if i == j {
            return Err(GraphError::Loop(i));
        }
        let mut arcs = self.arcs.clone();
        if !arcs.insert((i, j)) {
            return Err(GraphError::MultiArc(i, j));
        }
        Ok(Self { n: self.n, arcs })
    }

    pub fn without_arc(&self, i: usize, j: usize) -> Result<Self, GraphError> {
        let mut arcs = self.arcs.clone();
        if !arcs.remove(&(i, j)) {
            return Err(GraphError::MissingArc(i, j));
        }
        Ok(Self { n: self.n, arcs })
    }

    /// Apply a relabeling: vertex `v` becomes `perm[v - 1]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, GraphError> {
        if perm.len() != self.n {
            return Err(GraphError::Document(format!(
                "permutation has length {}, expected {}",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &v in perm {
            check_vertex(v, self.n)?;
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(GraphError::Document(format!("vertex {v} repeated in permutation")));
            }
        }
        Self::new(self.n, self.arcs.iter().map(|&(i, j)| (perm[i - 1], perm[j - 1])))
    }

    /// Subdigraph induced on `vertices` (any order), relabeled `1..=k` by increasing
    /// original label.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self, GraphError> {
        let mut keep: Vec<usize> = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut index = vec![0usize; self.n + 1];
        for (k, &v) in keep.iter().enumerate() {
            check_vertex(v, self.n)?;
            index[v] = k + 1;
        }
        Self::new(
            keep.len(),
            self.arcs
                .iter()
                .filter(|&&(i, j)| index[i] != 0 && index[j] != 0)
                .map(|&(i, j)| (index[i], index[j])),
        )
    }

    /// Maximal strongly connected components. Each component is sorted and the
    /// components are ordered by their smallest vertex.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let mut comps: Vec<Vec<usize>> = tarjan(&self.adjacency())
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|v| v + 1).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort_unstable_by_key(|c| c[0]);
        comps
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.n > 0 && self.strongly_connected_components().len() == 1
    }

    /// True iff the digraph is exactly one directed cycle through all vertices.
    pub fn is_directed_cycle(&self) -> bool {
        self.n >= 2
            && self.arcs.len() == self.n
            && self.out_degrees().iter().all(|&d| d == 1)
            && self.in_degrees().iter().all(|&d| d == 1)
            && self.is_strongly_connected()
    }

    /// Two-coloring of the underlying graph, if one exists. Isolated vertices and
    /// the first vertex of every weak component go to the left class.
    pub fn find_bipartition(&self) -> Option<Bipartition> {
        let mut und = vec![Vec::new(); self.n];
        for &(i, j) in &self.arcs {
            und[i - 1].push(j - 1);
            und[j - 1].push(i - 1);
        }
        let mut side: Vec<Option<bool>> = vec![None; self.n];
        for start in 0..self.n {
            if side[start].is_some() {
                continue;
            }
            side[start] = Some(false);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                let s = side[v].unwrap();
                for &w in &und[v] {
                    match side[w] {
                        None => {
                            side[w] = Some(!s);
                            stack.push(w);
                        }
                        Some(t) if t == s => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        let left = (1..=self.n).filter(|&v| side[v - 1] == Some(false));
        let right = (1..=self.n).filter(|&v| side[v - 1] == Some(true));
        Some(Bipartition::new(self.n, left, right).expect("coloring covers every vertex"))
    }

    /// Graphviz rendering, one arc per line in sorted order.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph {\n");
        for v in 1..=self.n {
            if self.out_degree(v).unwrap() == 0 && self.in_degree(v).unwrap() == 0 {
                let _ = writeln!(out, "  {v};");
            }
        }
        for &(i, j) in &self.arcs {
            let _ = writeln!(out, "  {i} -> {j};");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_document(&self, bipartition: Option<&Bipartition>) -> DigraphDocument {
        DigraphDocument {
            n: self.n,
            arcs: self.arcs.iter().map(|&(i, j)| [i, j]).collect(),
            bipartition: bipartition.map(|b| BipartitionDocument {
                left: b.left.iter().copied().collect(),
                right: b.right.iter().copied().collect(),
            }),
        }
    }

    pub fn to_json(&self, bipartition: Option<&Bipartition>) -> String {
        crate::numfmt::to_sorted_json(&self.to_document(bipartition))
    }

    /// Parse the JSON digraph schema. A bipartition, when present, is validated
    /// against the digraph.
    pub fn from_json(text: &str) -> Result<(Self, Option<Bipartition>), GraphError> {
        let doc: DigraphDocument =
            serde_json::from_str(text).map_err(|e| GraphError::Document(e.to_string()))?;
        doc.into_digraph()
    }
}

fn check_vertex(v: usize, n: usize) -> Result<(), GraphError> {
    if v == 0 || v > n {
        Err(GraphError::VertexOutOfRange { vertex: v, n })
    } else {
        Ok(())
    }
}

/// Iterative Tarjan over zero-indexed adjacency lists.
fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    // (vertex, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos == 0 && index[v] == UNSEEN {
                index[v] = next;
                low[v] = next;
                next += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}

/// Two disjoint vertex classes covering `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    left: BTreeSet<usize>,
    right: BTreeSet<usize>,
}

impl Bipartition {
    pub fn new<L, R>(n: usize, left: L, right: R) -> Result<Self, GraphError>
    where
        L: IntoIterator<Item = usize>,
        R: IntoIterator<Item = usize>,
    {
        let left: BTreeSet<usize> = left.into_iter().collect();
        let right: BTreeSet<usize> = right.into_iter().collect();
        if let Some(v) = left.intersection(&right).next() {
            return Err(GraphError::MalformedBipartition(format!(
                "vertex {v} is in both classes"
            )));
        }
        for &v in left.iter().chain(&right) {
            if v == 0 || v > n {
                return Err(GraphError::MalformedBipartition(format!(
                    "vertex {v} outside 1..={n}"
                )));
            }
        }
        if left.len() + right.len() != n {
            let missing = (1..=n).find(|v| !left.contains(v) && !right.contains(v)).unwrap();
            return Err(GraphError::MalformedBipartition(format!(
                "vertex {missing} is in neither class"
            )));
        }
        Ok(Self { left, right })
    }

    pub fn left(&self) -> &BTreeSet<usize> {
        &self.left
    }

    pub fn right(&self) -> &BTreeSet<usize> {
        &self.right
    }

    pub fn order(&self) -> usize {
        self.left.len() + self.right.len()
    }

    /// True iff `v` is in the left class.
    pub fn is_left(&self, v: usize) -> bool {
        self.left.contains(&v)
    }
}

/// True iff every arc of `g` joins the two classes of `b`.
pub fn check_bipartition(g: &Digraph, b: &Bipartition) -> Result<bool, GraphError> {
    if b.order() != g.n() {
        return Err(GraphError::MalformedBipartition(format!(
            "covers {} vertices, digraph has {}",
            b.order(),
            g.n()
        )));
    }
    Ok(g.arcs().all(|(i, j)| b.is_left(i) != b.is_left(j)))
}

/// Backtracking isomorphism test with outdegree/indegree pruning, for `n <= 10`.
pub fn are_isomorphic(g: &Digraph, h: &Digraph) -> Result<bool, GraphError> {
    for x in [g, h] {
        if x.n() > ISOMORPHISM_CAP {
            return Err(GraphError::SizeCapExceeded {
                n: x.n(),
                cap: ISOMORPHISM_CAP,
            });
        }
    }
    if g.n() != h.n() || g.arc_count() != h.arc_count() {
        return Ok(false);
    }
    let gp = degree_profile(g);
    let hp = degree_profile(h);
    let mut gs = gp.clone();
    let mut hs = hp.clone();
    gs.sort_unstable();
    hs.sort_unstable();
    if gs != hs {
        return Ok(false);
    }
    let n = g.n();
    let gm = masks(g);
    let hm = masks(h);

    // Map rarer degree classes first; ties broken by label.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (gs.iter().filter(|&&p| p == gp[v]).count(), v));

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(extend(0, &order, &gp, &hp, &gm, &hm, &mut map, &mut used))
}

type Masks = (Vec<u32>, Vec<u32>);

fn masks(g: &Digraph) -> Masks {
    let mut out = vec![0u32; g.n()];
    let mut inc = vec![0u32; g.n()];
    for (i, j) in g.arcs() {
        out[i - 1] |= 1 << (j - 1);
        inc[j - 1] |= 1 << (i - 1);
    }
    (out, inc)
}

fn degree_profile(g: &Digraph) -> Vec<(usize, usize)> {
    g.out_degrees().into_iter().zip(g.in_degrees()).collect()
}

#[allow(clippy::too_many_arguments)]
fn extend(
    depth: usize,
    order: &[usize],
    gp: &[(usize, usize)],
    hp: &[(usize, usize)],
    gm: &Masks,
    hm: &Masks,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    for cand in 0..hp.len() {
        if used[cand] || hp[cand] != gp[v] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&u| {
            let w = map[u];
            (gm.0[v] >> u & 1) == (hm.0[cand] >> w & 1) && (gm.1[v] >> u & 1) == (hm.1[cand] >> w & 1)
        });
        if !consistent {
            continue;
        }
        map[v] = cand;
        used[cand] = true;
        if extend(depth + 1, order, gp, hp, gm, hm, map, used) {
            return true;
        }
        used[cand] = false;
        map[v] = usize::MAX;
    }
    false
}

/// JSON form: `{"arcs": [[i, j], ...], "bipartition": {"left": [...], "right": [...]}, "n": n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigraphDocument {
    pub n: usize,
    pub arcs: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bipartition: Option<BipartitionDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartitionDocument {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl DigraphDocument {
    pub fn into_digraph(self) -> Result<(Digraph, Option<Bipartition>), GraphError> {
        let g = Digraph::new(self.n, self.arcs.iter().map(|a| (a[0], a[1])))?;
        let b = match self.bipartition {
            None => None,
            Some(doc) => {
                let b = Bipartition::new(self.n, doc.left, doc.right)?;
                if !check_bipartition(&g, &b)? {
                    return Err(GraphError::MalformedBipartition(
                        "an arc lies inside one class".into(),
                    ));
                }
                Some(b)
            }
        };
        Ok((g, b))
    }
}
