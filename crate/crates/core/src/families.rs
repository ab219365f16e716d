//! Named digraphs and the two local transformations used to compare them.
//!
//! Labeling is fixed for every bipartite family: the complete bipartite core has
//! `V_p = {1..p}` and `V_q = {p+1..p+q}`; the attached directed path runs through
//! `p+q+1, ..., n` in increasing order. The four path families differ only in
//! where the path starts and ends:
//!
//! | family | path                               |
//! |--------|------------------------------------|
//! | `B1`   | `1 -> p+q+1 -> ... -> n -> p`      |
//! | `B2`   | `p+1 -> p+q+1 -> ... -> n -> p+q`  |
//! | `B5`   | `1 -> p+q+1 -> ... -> n -> p+1`    |
//! | `B6`   | `p+1 -> p+q+1 -> ... -> n -> 1`    |
//!
//! `B3` is `B1` with its last arc `(n, p)` turned into `(n, 1)`, and `B4` is `B2`
//! with `(n, p+q)` turned into `(n, p+1)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{check_bipartition, Bipartition, Digraph, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Kpq,
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    #[serde(rename = "path")]
    DirectedPath,
    #[serde(rename = "cycle")]
    DirectedCycle,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Kpq,
        Family::B1,
        Family::B2,
        Family::B3,
        Family::B4,
        Family::B5,
        Family::B6,
        Family::DirectedPath,
        Family::DirectedCycle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Kpq => "kpq",
            Family::B1 => "b1",
            Family::B2 => "b2",
            Family::B3 => "b3",
            Family::B4 => "b4",
            Family::B5 => "b5",
            Family::B6 => "b6",
            Family::DirectedPath => "path",
            Family::DirectedCycle => "cycle",
        }
    }

    /// Required parity of `n - p - q` for the path families.
    pub fn path_parity(self) -> Option<Parity> {
        match self {
            Family::B1 | Family::B2 | Family::B3 | Family::B4 => Some(Parity::Odd),
            Family::B5 | Family::B6 => Some(Parity::Even),
            _ => None,
        }
    }

    fn uses_sides(self) -> bool {
        !matches!(self, Family::DirectedPath | Family::DirectedCycle)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| FamilyError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(k: usize) -> Self {
        if k % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("unknown family '{0}' (expected one of kpq, b1..b6, path, cycle)")]
    UnknownFamily(String),
    #[error("{family}: need p >= q >= 1, got p = {p}, q = {q}")]
    SideOrder { family: Family, p: usize, q: usize },
    #[error("{family}: n = {n} does not fit p = {p}, q = {q} ({requirement})")]
    Order {
        family: Family,
        n: usize,
        p: usize,
        q: usize,
        requirement: &'static str,
    },
    #[error("{family}: n - p - q = {diff} must be {required}")]
    ParityViolation {
        family: Family,
        diff: usize,
        required: Parity,
    },
    #[error("{family}: rotation is degenerate for p = {p}, q = {q} ({reason})")]
    Degenerate {
        family: Family,
        p: usize,
        q: usize,
        reason: &'static str,
    },
    #[error("rotation of ({u}, {v}) onto ({u}, {w}): {reason}")]
    Rotation {
        u: usize,
        v: usize,
        w: usize,
        reason: &'static str,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Family name plus order and side sizes. `p` and `q` are ignored by the path and
/// cycle families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

impl FamilySpec {
    pub fn new(family: Family, n: usize, p: usize, q: usize) -> Self {
        Self { family, n, p, q }
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        let Self { family, n, p, q } = *self;
        match family {
            Family::DirectedPath if n == 0 => Err(FamilyError::Order {
                family,
                n,
                p,
                q,
                requirement: "n >= 1",
            }),
            Family::DirectedCycle if n < 2 => Err(FamilyError::Order {
                family,
                n,
                p,
                q,
                requirement: "n >= 2",
            }),
            Family::DirectedPath | Family::DirectedCycle => Ok(()),
            _ if q == 0 || p < q => Err(FamilyError::SideOrder { family, p, q }),
            Family::Kpq if n != p + q => Err(FamilyError::Order {
                family,
                n,
                p,
                q,
                requirement: "n = p + q",
            }),
            Family::Kpq => Ok(()),
            _ if p + q + 1 > n => Err(FamilyError::Order {
                family,
                n,
                p,
                q,
                requirement: "p + q <= n - 1",
            }),
            _ => {
                let diff = n - p - q;
                let required = family.path_parity().expect("path family");
                if Parity::of(diff) != required {
                    return Err(FamilyError::ParityViolation {
                        family,
                        diff,
                        required,
                    });
                }
                if family == Family::B3 && p == 1 {
                    return Err(FamilyError::Degenerate {
                        family,
                        p,
                        q,
                        reason: "v_p = v_1, so the arc (v_n, v_p) would be rotated onto itself",
                    });
                }
                if family == Family::B4 && q == 1 {
                    return Err(FamilyError::Degenerate {
                        family,
                        p,
                        q,
                        reason: "v_{p+q} = v_{p+1}, so the arc (v_n, v_{p+q}) would be rotated onto itself",
                    });
                }
                Ok(())
            }
        }
    }

    /// First and last vertex of the attached path, for the four path families.
    pub fn path_endpoints(&self) -> Option<(usize, usize)> {
        let (p, q) = (self.p, self.q);
        match self.family {
            Family::B1 => Some((1, p)),
            Family::B2 => Some((p + 1, p + q)),
            Family::B5 => Some((1, p + 1)),
            Family::B6 => Some((p + 1, 1)),
            _ => None,
        }
    }

    /// Full attached path `start, p+q+1, ..., n, end` for the path families
    /// (for `B3`/`B4` the path of the digraph they are rotated from).
    pub fn attached_path(&self) -> Option<Vec<usize>> {
        let base = match self.family {
            Family::B3 => FamilySpec { family: Family::B1, ..*self },
            Family::B4 => FamilySpec { family: Family::B2, ..*self },
            _ => *self,
        };
        let (start, end) = base.path_endpoints()?;
        let mut path = vec![start];
        path.extend(self.p + self.q + 1..=self.n);
        path.push(end);
        Some(path)
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.family.uses_sides() {
            write!(f, "{}(n={}, p={}, q={})", self.family, self.n, self.p, self.q)
        } else {
            write!(f, "{}(n={})", self.family, self.n)
        }
    }
}

/// A constructed family member. `bipartition` is `None` only when no
/// two-coloring exists (odd directed cycles).
#[derive(Debug, Clone, PartialEq)]
pub struct Built {
    pub spec: FamilySpec,
    pub digraph: Digraph,
    pub bipartition: Option<Bipartition>,
}

/// The `2pq` arcs of the bidirected complete bipartite core.
pub fn complete_bipartite_arcs(p: usize, q: usize) -> Vec<(usize, usize)> {
    let mut arcs = Vec::with_capacity(2 * p * q);
    for u in 1..=p {
        for v in p + 1..=p + q {
            arcs.push((u, v));
            arcs.push((v, u));
        }
    }
    arcs
}

pub fn build(spec: FamilySpec) -> Result<Built, FamilyError> {
    spec.validate()?;
    let FamilySpec { family, n, p, q } = spec;
    let digraph = match family {
        Family::DirectedPath => Digraph::directed_path(n),
        Family::DirectedCycle => Digraph::directed_cycle(n),
        Family::Kpq => Digraph::new(n, complete_bipartite_arcs(p, q))?,
        Family::B1 | Family::B2 | Family::B5 | Family::B6 => {
            let path = spec.attached_path().expect("path family");
            let mut arcs = complete_bipartite_arcs(p, q);
            arcs.extend(path.windows(2).map(|w| (w[0], w[1])));
            Digraph::new(n, arcs)?
        }
        Family::B3 => {
            let b1 = build(FamilySpec { family: Family::B1, ..spec })?;
            rotate_arc(&b1.digraph, n, p, 1)?
        }
        Family::B4 => {
            let b2 = build(FamilySpec { family: Family::B2, ..spec })?;
            rotate_arc(&b2.digraph, n, p + q, p + 1)?
        }
    };
    let bipartition = if family.uses_sides() {
        Some(side_bipartition(&spec))
    } else {
        digraph.find_bipartition()
    };
    if let Some(b) = &bipartition {
        assert!(
            check_bipartition(&digraph, b)?,
            "{spec}: constructed bipartition has an arc inside a class"
        );
    }
    if family != Family::DirectedPath {
        assert!(digraph.is_strongly_connected(), "{spec}: construction is not strongly connected");
    }
    Ok(Built {
        spec,
        digraph,
        bipartition,
    })
}

/// `V_p` on the left, `V_q` on the right, path vertices alternating starting from
/// the class opposite the path's initial vertex.
fn side_bipartition(spec: &FamilySpec) -> Bipartition {
    let (p, q, n) = (spec.p, spec.q, spec.n);
    let mut left: Vec<usize> = (1..=p).collect();
    let mut right: Vec<usize> = (p + 1..=p + q).collect();
    if let Some(path) = spec.attached_path() {
        let start_left = path[0] <= p;
        for (k, &v) in path[1..path.len() - 1].iter().enumerate() {
            // k = 0 is one step from the start.
            if (k % 2 == 0) == start_left {
                right.push(v);
            } else {
                left.push(v);
            }
        }
    }
    Bipartition::new(n, left, right).expect("side classes cover 1..=n")
}

/// `G - (u, v) + (u, w)`. The result must stay simple: `w` must differ from `u`
/// and `v`, and `(u, w)` must not already be an arc.
pub fn rotate_arc(g: &Digraph, u: usize, v: usize, w: usize) -> Result<Digraph, FamilyError> {
    let err = |reason| FamilyError::Rotation { u, v, w, reason };
    if !g.has_arc(u, v) {
        return Err(err("source arc is missing"));
    }
    if w == u {
        return Err(err("target would be a loop"));
    }
    if w == v {
        return Err(err("target equals the removed head"));
    }
    if w == 0 || w > g.n() {
        return Err(GraphError::VertexOutOfRange { vertex: w, n: g.n() }.into());
    }
    if g.has_arc(u, w) {
        return Err(err("target arc already present (would create a multiarc)"));
    }
    Ok(g.without_arc(u, v)?.with_arc(u, w)?)
}

/// Replace `(u, v)` by `(u, w), (w, v)` through a new vertex `w = n + 1`.
pub fn subdivide_arc(g: &Digraph, u: usize, v: usize) -> Result<Digraph, FamilyError> {
    if !g.has_arc(u, v) {
        return Err(GraphError::MissingArc(u, v).into());
    }
    let w = g.n() + 1;
    let arcs = g
        .arcs()
        .filter(|&a| a != (u, v))
        .chain([(u, w), (w, v)]);
    Ok(Digraph::new(w, arcs)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: Family, n: usize, p: usize, q: usize) -> FamilySpec {
        FamilySpec::new(family, n, p, q)
    }

    fn arcs(g: &Digraph) -> Vec<(usize, usize)> {
        g.arcs().collect()
    }

    #[test]
    fn kpq_arcs() {
        let b = build(spec(Family::Kpq, 3, 2, 1)).unwrap();
        assert_eq!(arcs(&b.digraph), vec![(1, 3), (2, 3), (3, 1), (3, 2)]);
        assert_eq!(build(spec(Family::Kpq, 5, 3, 2)).unwrap().digraph.arc_count(), 12);
    }

    #[test]
    fn b1_small() {
        let b = build(spec(Family::B1, 4, 2, 1)).unwrap();
        assert_eq!(
            arcs(&b.digraph),
            vec![(1, 3), (1, 4), (2, 3), (3, 1), (3, 2), (4, 2)]
        );
        assert_eq!(b.digraph.out_degree(1), Ok(2));
        let sides = b.bipartition.unwrap();
        assert_eq!(sides.left().iter().copied().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn b5_small() {
        let b = build(spec(Family::B5, 6, 2, 2)).unwrap();
        let mut expected = complete_bipartite_arcs(2, 2);
        expected.extend([(1, 5), (5, 6), (6, 3)]);
        expected.sort_unstable();
        assert_eq!(arcs(&b.digraph), expected);
        assert!(check_bipartition(&b.digraph, b.bipartition.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn b2_and_b6_paths() {
        let b2 = build(spec(Family::B2, 6, 2, 1)).unwrap();
        // q = 1: the path closes into a cycle through v_3.
        assert!(b2.digraph.has_arc(3, 4) && b2.digraph.has_arc(6, 3));
        let b6 = build(spec(Family::B6, 7, 3, 2)).unwrap();
        assert!(b6.digraph.has_arc(4, 6) && b6.digraph.has_arc(6, 7) && b6.digraph.has_arc(7, 1));
    }

    #[test]
    fn b3_and_b4_are_rotations() {
        let b1 = build(spec(Family::B1, 7, 3, 1)).unwrap();
        let b3 = build(spec(Family::B3, 7, 3, 1)).unwrap();
        assert_eq!(b3.digraph, rotate_arc(&b1.digraph, 7, 3, 1).unwrap());
        assert!(b3.bipartition.is_some());

        let b2 = build(spec(Family::B2, 6, 3, 2)).unwrap();
        let b4 = build(spec(Family::B4, 6, 3, 2)).unwrap();
        assert_eq!(b4.digraph, rotate_arc(&b2.digraph, 6, 5, 4).unwrap());
    }

    #[test]
    fn degenerate_rotations_rejected() {
        assert!(matches!(
            build(spec(Family::B3, 5, 1, 1)),
            Err(FamilyError::Degenerate { .. })
        ));
        assert!(matches!(
            build(spec(Family::B4, 4, 2, 1)),
            Err(FamilyError::Degenerate { .. })
        ));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(matches!(
            build(spec(Family::B1, 5, 2, 1)),
            Err(FamilyError::ParityViolation { required: Parity::Odd, diff: 2, .. })
        ));
        assert!(matches!(
            build(spec(Family::B5, 5, 2, 2)),
            Err(FamilyError::ParityViolation { required: Parity::Even, diff: 1, .. })
        ));
        assert!(matches!(build(spec(Family::B1, 6, 1, 2)), Err(FamilyError::SideOrder { .. })));
        assert!(matches!(build(spec(Family::B1, 3, 2, 1)), Err(FamilyError::Order { .. })));
        assert!(matches!(build(spec(Family::Kpq, 4, 2, 1)), Err(FamilyError::Order { .. })));
        assert!(build(spec(Family::B5, 5, 2, 1)).is_ok());
        assert!("b7".parse::<Family>().is_err());
        assert_eq!("B5".parse::<Family>(), Ok(Family::B5));
        assert_eq!("cycle".parse::<Family>(), Ok(Family::DirectedCycle));
    }

    #[test]
    fn rotation_examples() {
        let b1 = build(spec(Family::B1, 6, 2, 1)).unwrap().digraph;
        let b5_shaped = rotate_arc(&b1, 6, 2, 3).unwrap();
        assert!(b5_shaped.has_arc(6, 3) && !b5_shaped.has_arc(6, 2));
        let back = rotate_arc(&b5_shaped, 6, 3, 2).unwrap();
        assert_eq!(back, b1);

        assert!(matches!(rotate_arc(&b1, 6, 1, 3), Err(FamilyError::Rotation { .. })));
        assert!(matches!(rotate_arc(&b1, 6, 2, 6), Err(FamilyError::Rotation { .. })));
        assert!(matches!(rotate_arc(&b1, 6, 2, 2), Err(FamilyError::Rotation { .. })));
        // (1, 3) already exists.
        assert!(matches!(rotate_arc(&b1, 1, 4, 3), Err(FamilyError::Rotation { .. })));
    }

    #[test]
    fn subdivision_examples() {
        let c3 = Digraph::directed_cycle(3);
        let c4 = subdivide_arc(&c3, 3, 1).unwrap();
        assert!(c4.is_directed_cycle() && c4.n() == 4);

        // Subdividing the last path arc twice lengthens B1 with its own labeling.
        let b1 = build(spec(Family::B1, 4, 2, 1)).unwrap().digraph;
        let once = subdivide_arc(&b1, 4, 2).unwrap();
        let twice = subdivide_arc(&once, 5, 2).unwrap();
        assert_eq!(twice, build(spec(Family::B1, 6, 2, 1)).unwrap().digraph);

        let mut g = c3.clone();
        for k in 1..=5 {
            let (u, v) = g.arcs().next().unwrap();
            g = subdivide_arc(&g, u, v).unwrap();
            assert_eq!(g.n(), 3 + k);
            assert!(g.is_strongly_connected());
        }
        assert!(matches!(
            subdivide_arc(&c3, 1, 3),
            Err(FamilyError::Graph(GraphError::MissingArc(1, 3)))
        ));
    }

    #[test]
    fn every_family_on_a_grid_is_strongly_connected_and_bipartite() {
        for n in 3..=12 {
            for p in 1..=5 {
                for q in 1..=p {
                    for family in [Family::B1, Family::B2, Family::B3, Family::B4, Family::B5, Family::B6] {
                        let s = spec(family, n, p, q);
                        if s.validate().is_err() {
                            continue;
                        }
                        let b = build(s).unwrap();
                        assert!(b.digraph.is_strongly_connected(), "{s}");
                        let sides = b.bipartition.as_ref().expect("two-colorable");
                        assert!(check_bipartition(&b.digraph, sides).unwrap(), "{s}");
                        assert_eq!(b.digraph.arc_count(), 2 * p * q + n - p - q + 1, "{s}");
                    }
                }
            }
        }
    }
}
