//! Signless Laplacian `Q(G) = D(G) + A(G)` and its Perron root.
//!
//! The Q-index is computed by power iteration. For a strongly connected digraph
//! every outdegree is at least one, so `Q` is irreducible with a positive
//! diagonal, hence primitive, and the iteration converges from the all-ones
//! start vector. The stopping rule is the Collatz–Wielandt bracket
//! `min_i (Qx)_i / x_i <= rho <= max_i (Qx)_i / x_i`, which encloses the
//! spectral radius at every step.

use serde::Serialize;
use thiserror::Error;

use crate::digraph::Digraph;
use crate::numfmt::{ser_g17, ser_g17_vec};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("digraph is not strongly connected ({components} components)")]
    NotStronglyConnected { components: usize },
    #[error("digraph has no vertices")]
    Empty,
    #[error("no convergence after {iterations} iterations (bracket [{lower}, {upper}])")]
    NoConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("vector component {index} is not strictly positive ({value})")]
    NonPositiveComponent { index: usize, value: f64 },
    #[error("dimension mismatch: matrix is {matrix}x{matrix}, vector has {vector} entries")]
    DimensionMismatch { matrix: usize, vector: usize },
}

/// Power-iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Target width of the Collatz–Wielandt bracket.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl SolverConfig {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self { tol, max_iter }
    }
}

/// Dense square nonnegative matrix, row-major. Built from a digraph it is the
/// signless Laplacian; principal submatrices keep the parent's diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl QMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self {
            n,
            entries: rows.concat(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at 1-indexed `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.chunks(self.n.max(1)).take(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.n.max(1))
            .take(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Principal submatrix on the given 1-indexed vertices (in the given order).
    pub fn principal(&self, vertices: &[usize]) -> Self {
        let k = vertices.len();
        let mut entries = Vec::with_capacity(k * k);
        for &i in vertices {
            for &j in vertices {
                entries.push(self.entry(i, j));
            }
        }
        Self { n: k, entries }
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }
}

/// `Q(G) = D(G) + A(G)`: outdegrees on the diagonal, adjacency off it.
pub fn signless_laplacian(g: &Digraph) -> QMatrix {
    let n = g.n();
    let mut entries = vec![0.0; n * n];
    for (i, j) in g.arcs() {
        entries[(i - 1) * n + (j - 1)] = 1.0;
        entries[(i - 1) * n + (i - 1)] += 1.0;
    }
    QMatrix { n, entries }
}

/// Q-index estimate with its Perron vector and convergence record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralResult {
    /// Midpoint of the final Collatz–Wielandt bracket.
    #[serde(serialize_with = "ser_g17")]
    pub q: f64,
    /// Positive Perron vector with unit Euclidean norm; `x[k]` belongs to vertex `k + 1`.
    #[serde(serialize_with = "ser_g17_vec")]
    pub x: Vec<f64>,
    /// `max_i |(Qx)_i - q x_i|`.
    #[serde(serialize_with = "ser_g17")]
    pub residual: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub lower: f64,
    #[serde(skip)]
    pub upper: f64,
}

impl SpectralResult {
    /// Perron entry of 1-indexed vertex `v`.
    pub fn entry(&self, v: usize) -> f64 {
        self.x[v - 1]
    }
}

/// `(min_i (Qx)_i / x_i, max_i (Qx)_i / x_i)` for strictly positive `x`.
pub fn collatz_wielandt_bounds(m: &QMatrix, x: &[f64]) -> Result<(f64, f64), SpectralError> {
    if x.len() != m.n() {
        return Err(SpectralError::DimensionMismatch {
            matrix: m.n(),
            vector: x.len(),
        });
    }
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(SpectralError::NonPositiveComponent { index: index + 1, value });
    }
    Ok(bracket(&m.mul_vec(x), x))
}

fn bracket(y: &[f64], x: &[f64]) -> (f64, f64) {
    y.iter().zip(x).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
        let r = a / b;
        (lo.min(r), hi.max(r))
    })
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    for a in v.iter_mut() {
        *a /= norm;
    }
}

/// Perron root of a primitive nonnegative matrix by power iteration.
///
/// The caller guarantees primitivity; for reducible input the bracket may fail
/// to close and the call ends in [`SpectralError::NoConvergence`].
pub fn perron_root(m: &QMatrix, cfg: SolverConfig) -> Result<SpectralResult, SpectralError> {
    if !(cfg.tol > 0.0) {
        return Err(SpectralError::InvalidTolerance(cfg.tol));
    }
    let n = m.n();
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let (mut lower, mut upper) = (f64::NAN, f64::NAN);
    for iterations in 1..=cfg.max_iter {
        let y = m.mul_vec(&x);
        (lower, upper) = bracket(&y, &x);
        if upper - lower <= cfg.tol {
            let q = 0.5 * (lower + upper);
            let residual = y
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - q * b).abs())
                .fold(0.0, f64::max);
            return Ok(SpectralResult {
                q,
                x,
                residual,
                iterations,
                lower,
                upper,
            });
        }
        x = y;
        normalize(&mut x);
        // An all-zero row sends a component to zero; the bracket is then
        // undefined for this matrix class.
        if x.iter().any(|&a| !(a > 0.0)) {
            break;
        }
    }
    Err(SpectralError::NoConvergence {
        iterations: cfg.max_iter,
        lower,
        upper,
    })
}

/// Q-index of a strongly connected digraph.
pub fn q_index(g: &Digraph, cfg: SolverConfig) -> Result<SpectralResult, SpectralError> {
    if g.n() == 0 {
        return Err(SpectralError::Empty);
    }
    let comps = g.strongly_connected_components();
    if comps.len() != 1 {
        return Err(SpectralError::NotStronglyConnected {
            components: comps.len(),
        });
    }
    perron_root(&signless_laplacian(g), cfg)
}

/// Positive unit Perron vector of a strongly connected digraph.
pub fn perron_vector(g: &Digraph, cfg: SolverConfig) -> Result<Vec<f64>, SpectralError> {
    q_index(g, cfg).map(|r| r.x)
}

/// Spectral radius of `Q(G)` for an arbitrary digraph as the maximum over the
/// strongly connected components of the Perron root of the corresponding
/// principal block of `Q(G)`. A block keeps the full outdegree of its vertices
/// on the diagonal, including arcs that leave the component.
pub fn q_index_by_component_blocks(g: &Digraph, cfg: SolverConfig) -> Result<f64, SpectralError> {
    if g.n() == 0 {
        return Err(SpectralError::Empty);
    }
    let qm = signless_laplacian(g);
    let mut best: f64 = 0.0;
    for comp in g.strongly_connected_components() {
        let value = if comp.len() == 1 {
            qm.entry(comp[0], comp[0])
        } else {
            perron_root(&qm.principal(&comp), cfg)?.q
        };
        best = best.max(value);
    }
    Ok(best)
}

/// Maximum Q-index over the components taken as induced subdigraphs (outdegrees
/// counted inside the component; a single vertex contributes 0).
pub fn q_index_by_induced_components(g: &Digraph, cfg: SolverConfig) -> Result<f64, SpectralError> {
    if g.n() == 0 {
        return Err(SpectralError::Empty);
    }
    let mut best: f64 = 0.0;
    for comp in g.strongly_connected_components() {
        if comp.len() > 1 {
            let sub = g.induced(&comp).expect("component vertices are in range");
            best = best.max(q_index(&sub, cfg)?.q);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kpq(p: usize, q: usize) -> Digraph {
        let mut arcs = Vec::new();
        for u in 1..=p {
            for v in p + 1..=p + q {
                arcs.push((u, v));
                arcs.push((v, u));
            }
        }
        Digraph::new(p + q, arcs).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let digon = Digraph::new(2, [(1, 2), (2, 1)]).unwrap();
        assert_eq!(signless_laplacian(&digon).rows(), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);

        let c3 = Digraph::directed_cycle(3);
        assert_eq!(
            signless_laplacian(&c3).rows(),
            vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0]]
        );

        let k21 = signless_laplacian(&kpq(2, 1));
        assert_eq!(
            k21.rows(),
            vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 2.0]]
        );
    }

    #[test]
    fn row_sums_are_twice_outdegree() {
        let g = Digraph::new(5, [(1, 2), (1, 3), (2, 5), (5, 1), (3, 4), (4, 1), (4, 2)]).unwrap();
        let sums = signless_laplacian(&g).row_sums();
        let deg = g.out_degrees();
        for (s, d) in sums.iter().zip(deg) {
            assert_eq!(*s, 2.0 * d as f64);
        }
    }

    #[test]
    fn collatz_wielandt_examples() {
        let digon = signless_laplacian(&Digraph::new(2, [(1, 2), (2, 1)]).unwrap());
        assert_eq!(collatz_wielandt_bounds(&digon, &[1.0, 1.0]), Ok((2.0, 2.0)));
        let k21 = signless_laplacian(&kpq(2, 1));
        assert_eq!(collatz_wielandt_bounds(&k21, &[1.0, 1.0, 2.0]), Ok((3.0, 3.0)));
        assert_eq!(collatz_wielandt_bounds(&k21, &[1.0, 1.0, 1.0]), Ok((2.0, 4.0)));
        assert!(matches!(
            collatz_wielandt_bounds(&k21, &[1.0, 0.0, 1.0]),
            Err(SpectralError::NonPositiveComponent { index: 2, .. })
        ));
        assert!(matches!(
            collatz_wielandt_bounds(&k21, &[1.0, 1.0]),
            Err(SpectralError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn q_index_of_complete_bipartite_and_cycle() {
        let cfg = SolverConfig::default();
        let r = q_index(&kpq(2, 3), cfg).unwrap();
        assert!((r.q - 5.0).abs() <= 1e-10, "{}", r.q);
        assert!(r.lower <= 5.0 + 1e-12 && 5.0 - 1e-12 <= r.upper);
        let c5 = q_index(&Digraph::directed_cycle(5), cfg).unwrap();
        assert!((c5.q - 2.0).abs() <= 1e-10);
        assert!(r.x.iter().all(|&v| v > 0.0));
        let norm: f64 = r.x.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perron_vector_of_k21_matches_side_ratio() {
        // Sides satisfy p a = q b with a on the 2-side, b on the 1-side.
        let x = perron_vector(&kpq(2, 1), SolverConfig::default()).unwrap();
        assert!((x[0] - x[1]).abs() < 1e-10);
        assert!((x[2] / x[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_disconnected_and_bad_tolerance() {
        let arc = Digraph::new(2, [(1, 2)]).unwrap();
        assert_eq!(
            q_index(&arc, SolverConfig::default()),
            Err(SpectralError::NotStronglyConnected { components: 2 })
        );
        let c3 = Digraph::directed_cycle(3);
        assert_eq!(
            q_index(&c3, SolverConfig::new(0.0, 10)),
            Err(SpectralError::InvalidTolerance(0.0))
        );
        assert!(matches!(
            q_index(
                &Digraph::directed_cycle(40).with_arc(1, 3).unwrap(),
                SolverConfig::new(1e-12, 5)
            ),
            Err(SpectralError::NoConvergence { iterations: 5, .. })
        ));
        assert_eq!(q_index(&Digraph::empty(0), SolverConfig::default()), Err(SpectralError::Empty));
    }

    #[test]
    fn component_rules() {
        let cfg = SolverConfig::default();
        // Single arc: the block rule sees the tail's outdegree, the induced rule does not.
        let arc = Digraph::new(2, [(1, 2)]).unwrap();
        assert_eq!(q_index_by_component_blocks(&arc, cfg), Ok(1.0));
        assert_eq!(q_index_by_induced_components(&arc, cfg), Ok(0.0));
        // Disjoint union of a digon and a directed triangle.
        let g = Digraph::new(5, [(1, 2), (2, 1), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert!((q_index_by_component_blocks(&g, cfg).unwrap() - 2.0).abs() < 1e-10);
        assert!((q_index_by_induced_components(&g, cfg).unwrap() - 2.0).abs() < 1e-10);
    }
}
