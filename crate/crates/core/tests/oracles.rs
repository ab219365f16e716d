//! Hand-derived values and brute-force recomputations checked against the
//! library.

use qindex::charpoly::{largest_real_root, CharPolySpec, PolyKind};
use qindex::dense::{characteristic_polynomial, spectral_radius_eigen, spectral_radius_via_charpoly};
use qindex::digraph::{are_isomorphic, Digraph};
use qindex::enumerate::{certify_minimum, enumerate_gnpq, EnumerationTask};
use qindex::families::{build, Family, FamilySpec};
use qindex::spectral::{q_index, signless_laplacian, SolverConfig};
use qindex::verify::Grid;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn member(f: Family, n: usize, p: usize, q: usize) -> Digraph {
    build(FamilySpec::new(f, n, p, q)).unwrap().digraph
}

#[test]
fn b1_4_2_1_polynomial_by_hand() {
    // Expanding det(xI - Q) by cofactors gives x (x^3 - 6x^2 + 11x - 7).
    let g = member(Family::B1, 4, 2, 1);
    assert_eq!(characteristic_polynomial(&g).unwrap(), vec![0, -7, 11, -6, 1]);

    // Largest root of the cubic by bisection on a sign change written out here.
    let cubic = |x: f64| ((x - 6.0) * x + 11.0) * x - 7.0;
    let (mut lo, mut hi) = (3.0, 4.0);
    assert!(cubic(lo) < 0.0 && cubic(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cubic(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = q_index(&g, cfg()).unwrap().q;
    assert!((q - lo).abs() < 1e-9, "{q} vs {lo}");
    let f = largest_real_root(&CharPolySpec::new(PolyKind::F, 4, 2, 1).unwrap(), 1e-13).unwrap();
    assert!((f.root - lo).abs() < 1e-9);
}

#[test]
fn complete_bipartite_perron_vector() {
    // Symmetry gives constant a on V_p and b on V_q with (p+q) a = q a + q b,
    // so a / b = q / p.
    for (p, q) in [(2, 1), (3, 2), (5, 5), (7, 3)] {
        let r = q_index(&member(Family::Kpq, p + q, p, q), cfg()).unwrap();
        assert!((r.q - (p + q) as f64).abs() < 1e-9);
        let (a, b) = (r.entry(1), r.entry(p + 1));
        assert!((a / b - q as f64 / p as f64).abs() < 1e-9);
        let norm: f64 = r.x.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
    // K_{2,1}: x proportional to (1, 1, 2).
    let r = q_index(&member(Family::Kpq, 3, 2, 1), cfg()).unwrap();
    assert!((r.entry(3) / r.entry(1) - 2.0).abs() < 1e-9);
}

#[test]
fn directed_cycle_and_digon() {
    for n in 2..=9 {
        let r = q_index(&Digraph::directed_cycle(n), cfg()).unwrap();
        assert!((r.q - 2.0).abs() < 1e-10);
        let first = r.x[0];
        assert!(r.x.iter().all(|v| (v - first).abs() < 1e-10));
    }
}

#[test]
fn families_agree_with_dense_and_exact_routes() {
    let grid = Grid { n_max: 10, p_max: 4, q_max: 4 };
    let mut checked = 0;
    for (n, p, q) in grid.points(None) {
        for f in [Family::B1, Family::B2, Family::B3, Family::B4, Family::B5, Family::B6] {
            let Ok(built) = build(FamilySpec::new(f, n, p, q)) else { continue };
            let g = built.digraph;
            let power = q_index(&g, cfg()).unwrap().q;
            let dense = spectral_radius_eigen(&signless_laplacian(&g)).unwrap();
            let exact = spectral_radius_via_charpoly(&g).unwrap();
            assert!((power - dense).abs() < 1e-7, "{f} {n} {p} {q}: {power} vs {dense}");
            assert!((power - exact).abs() < 1e-7, "{f} {n} {p} {q}: {power} vs {exact}");
            checked += 1;
        }
    }
    assert!(checked > 100);
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n);
            out.push(p);
        }
    }
    out
}

fn brute_isomorphic(g: &Digraph, h: &Digraph) -> bool {
    g.n() == h.n()
        && g.arc_count() == h.arc_count()
        && permutations(g.n())
            .iter()
            .any(|perm| g.arcs().all(|(i, j)| h.has_arc(perm[i - 1], perm[j - 1])))
}

#[test]
fn isomorphism_matches_bijection_search() {
    let b1 = member(Family::B1, 4, 2, 1);
    let b2 = member(Family::B2, 4, 2, 1);
    let mut d1 = b1.out_degrees();
    let mut d2 = b2.out_degrees();
    d1.sort_unstable();
    d2.sort_unstable();
    assert_ne!(d1, d2);
    assert!(!are_isomorphic(&b1, &b2).unwrap());
    assert!(!brute_isomorphic(&b1, &b2));

    let task = EnumerationTask {
        dedup: false,
        ..EnumerationTask::new(5, 2, 1)
    };
    let members: Vec<Digraph> = enumerate_gnpq(&task).unwrap().map(|m| m.digraph).take(40).collect();
    for g in &members {
        for h in &members {
            assert_eq!(are_isomorphic(g, h).unwrap(), brute_isomorphic(g, h));
        }
    }
}

fn strongly_connected(n: usize, arcs: &[(usize, usize)]) -> bool {
    let reach = |forward: bool| {
        let mut seen = vec![false; n + 1];
        let mut stack = vec![1];
        seen[1] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in arcs {
                let (from, to) = if forward { (a, b) } else { (b, a) };
                if from == v && !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen[1..].iter().all(|&s| s)
    };
    reach(true) && reach(false)
}

/// Every labeled digraph on `n` vertices that contains the bidirected
/// `K_{p,q}` on `{1..p | p+1..p+q}`, is strongly connected and has a
/// bipartition separating the two sides, by scanning all arc subsets.
fn brute_force_class(n: usize, p: usize, q: usize) -> Vec<Digraph> {
    let side = |v: usize| v > p && v <= p + q;
    let mut fixed = Vec::new();
    let mut optional = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            if i <= p + q && j <= p + q {
                if side(i) != side(j) {
                    fixed.push((i, j));
                }
            } else {
                optional.push((i, j));
            }
        }
    }
    let mut out = Vec::new();
    for mask in 0u64..(1 << optional.len()) {
        let mut arcs = fixed.clone();
        arcs.extend(optional.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &a)| a));
        if !strongly_connected(n, &arcs) {
            continue;
        }
        // Two-colour from vertex 1 along the underlying graph.
        let mut colour = vec![None; n + 1];
        colour[1] = Some(false);
        let mut ok = true;
        let mut changed = true;
        while changed && ok {
            changed = false;
            for &(a, b) in &arcs {
                match (colour[a], colour[b]) {
                    (Some(x), None) => (colour[b], changed) = (Some(!x), true),
                    (None, Some(y)) => (colour[a], changed) = (Some(!y), true),
                    (Some(x), Some(y)) if x == y => ok = false,
                    _ => {}
                }
            }
        }
        if ok {
            out.push(Digraph::new(n, arcs).unwrap());
        }
    }
    out
}

#[test]
fn enumeration_matches_brute_force() {
    for (n, p, q) in [(4, 2, 1), (5, 2, 1), (5, 1, 1), (4, 1, 1)] {
        let brute = brute_force_class(n, p, q);
        let task = EnumerationTask {
            dedup: false,
            ..EnumerationTask::new(n, p, q)
        };
        let mut mine: Vec<Digraph> = enumerate_gnpq(&task).unwrap().map(|m| m.digraph).collect();
        let mut want = brute.clone();
        mine.sort_by(|a, b| a.arc_set().cmp(b.arc_set()));
        want.sort_by(|a, b| a.arc_set().cmp(b.arc_set()));
        assert_eq!(mine.len(), want.len(), "({n},{p},{q})");
        assert!(mine == want, "({n},{p},{q}) member sets differ");

        let min = brute
            .iter()
            .map(|g| q_index(g, cfg()).unwrap().q)
            .fold(f64::INFINITY, f64::min);
        let report = certify_minimum(&task).unwrap();
        assert!((report.min_q - min).abs() < 1e-9);
    }
}

#[test]
fn recorded_minima() {
    // Values found by an independent exhaustive search with a separate
    // eigen-solver.
    for ((n, p, q), want) in [
        ((4, 2, 1), 3.324717957244748),
        ((5, 2, 1), 3.324717957244748),
        ((5, 3, 1), 4.147899035704786),
        ((6, 2, 2), 4.369205407092458),
        ((6, 3, 1), 4.147899035704785),
        ((5, 1, 1), 2.7548776662466867),
    ] {
        let report = certify_minimum(&EnumerationTask::new(n, p, q)).unwrap();
        assert!((report.min_q - want).abs() < 1e-9, "({n},{p},{q}) {}", report.min_q);
    }
}
