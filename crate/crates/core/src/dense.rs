//! Dense reference routes that do not use power iteration: the exact integer
//! characteristic polynomial of `Q(G)` (Faddeev–LeVerrier) with a root scan,
//! and a general eigenvalue solve for reducible matrices.

use nalgebra::{DMatrix, Dyn, Schur};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::digraph::Digraph;
use crate::spectral::QMatrix;

/// Largest order for the exact characteristic polynomial.
pub const CHARPOLY_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DenseError {
    #[error("characteristic polynomial limited to n <= {cap}, got n = {n}")]
    SizeCapExceeded { n: usize, cap: usize },
    #[error("integer overflow while expanding the characteristic polynomial")]
    Overflow,
    #[error("no real root found in [{lower}, {upper}]")]
    NoRoot { lower: String, upper: String },
    #[error("Schur decomposition did not converge")]
    NoSchur,
}

/// Coefficients `c[0..=n]` of `det(xI - Q(G)) = sum_k c[k] x^k`, computed exactly
/// in integer arithmetic.
pub fn characteristic_polynomial(g: &Digraph) -> Result<Vec<i128>, DenseError> {
    let n = g.n();
    if n > CHARPOLY_CAP {
        return Err(DenseError::SizeCapExceeded { n, cap: CHARPOLY_CAP });
    }
    let mut a = vec![vec![0i128; n]; n];
    for (i, j) in g.arcs() {
        a[i - 1][j - 1] = 1;
        a[i - 1][i - 1] += 1;
    }
    let mut coeffs = vec![0i128; n + 1];
    coeffs[n] = 1;
    // M_0 = 0; M_k = A M_{k-1} + c_{n-k+1} I; c_{n-k} = -tr(A M_k) / k.
    let mut m = vec![vec![0i128; n]; n];
    for k in 1..=n {
        let mut next = matmul(&a, &m)?;
        for (i, row) in next.iter_mut().enumerate() {
            row[i] = row[i].checked_add(coeffs[n - k + 1]).ok_or(DenseError::Overflow)?;
        }
        let am = matmul(&a, &next)?;
        let trace = (0..n).try_fold(0i128, |acc, i| acc.checked_add(am[i][i]))
            .ok_or(DenseError::Overflow)?;
        debug_assert_eq!(trace % k as i128, 0);
        coeffs[n - k] = -trace / k as i128;
        m = next;
    }
    Ok(coeffs)
}

fn matmul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Result<Vec<Vec<i128>>, DenseError> {
    let n = a.len();
    let mut out = vec![vec![0i128; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..n {
                let t = a[i][k].checked_mul(b[k][j]).ok_or(DenseError::Overflow)?;
                out[i][j] = out[i][j].checked_add(t).ok_or(DenseError::Overflow)?;
            }
        }
    }
    Ok(out)
}

/// Horner evaluation of integer coefficients (lowest degree first).
pub fn eval_int_poly(coeffs: &[i128], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
}

/// Largest real root of a monic polynomial with a sign change at that root:
/// scan down from `upper` in steps of `step`, then bisect the first bracket.
pub fn largest_sign_change_root(
    coeffs: &[i128],
    lower: f64,
    upper: f64,
    step: f64,
    tol: f64,
) -> Result<f64, DenseError> {
    let as_f64: Vec<f64> = coeffs.iter().map(|&c| c as f64).collect();
    largest_sign_change_root_f64(&as_f64, lower, upper, step, tol)
}

/// [`largest_sign_change_root`] for real coefficients.
pub fn largest_sign_change_root_f64(
    coeffs: &[f64],
    lower: f64,
    upper: f64,
    step: f64,
    tol: f64,
) -> Result<f64, DenseError> {
    let sign = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c) > 0.0;
    let mut hi = upper;
    let hi_sign = sign(hi);
    while hi > lower {
        let lo = (hi - step).max(lower);
        if sign(lo) != hi_sign {
            return Ok(bisect(|x| sign(x) == hi_sign, lo, hi, tol));
        }
        hi = lo;
    }
    Err(DenseError::NoRoot {
        lower: format!("{lower}"),
        upper: format!("{upper}"),
    })
}

/// Bisection on a predicate that holds at `hi` and fails at `lo`.
pub(crate) fn bisect(mut holds: impl FnMut(f64) -> bool, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Q-index through the characteristic polynomial. Valid when the Perron root is
/// a simple root, which holds for strongly connected digraphs.
pub fn q_index_via_charpoly(g: &Digraph) -> Result<f64, DenseError> {
    let coeffs = characteristic_polynomial(g)?;
    let max_deg = g.out_degrees().into_iter().max().unwrap_or(0) as f64;
    // rho <= max row sum = 2 * max outdegree; the small offset keeps the
    // starting point strictly above a root sitting on the bound.
    let upper = 2.0 * max_deg + 0.5;
    largest_sign_change_root(&coeffs, -0.5, upper, 1e-3, 1e-13)
}

/// Spectral radius of `Q(G)` for any digraph of order at most
/// [`CHARPOLY_CAP`]: the Perron root of a nonnegative matrix is its largest real
/// eigenvalue, found as the largest root of the square-free part of the exact
/// characteristic polynomial (every root simple, so every root is a sign change).
pub fn spectral_radius_via_charpoly(g: &Digraph) -> Result<f64, DenseError> {
    let reduced = square_free_part(&characteristic_polynomial(g)?);
    let max_deg = g.out_degrees().into_iter().max().unwrap_or(0) as f64;
    largest_sign_change_root_f64(&reduced, -0.5, 2.0 * max_deg + 0.5, 1e-4, 1e-13)
}

/// `p / gcd(p, p')` with positive leading coefficient, as `f64` coefficients
/// (lowest degree first). Intermediate arithmetic is exact.
pub fn square_free_part(p: &[i128]) -> Vec<f64> {
    let p = trim(p.iter().map(|&c| BigInt::from(c)).collect());
    let d = derivative(&p);
    let reduced = if d.is_empty() {
        primitive(p)
    } else {
        primitive(exact_div(&p, &poly_gcd(&p, &d)))
    };
    reduced.iter().map(|c| c.to_f64().expect("finite coefficient")).collect()
}

fn trim(mut a: Vec<BigInt>) -> Vec<BigInt> {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
    a
}

fn derivative(a: &[BigInt]) -> Vec<BigInt> {
    trim(a.iter().enumerate().skip(1).map(|(k, c)| c * k).collect())
}

fn primitive(a: Vec<BigInt>) -> Vec<BigInt> {
    let a = trim(a);
    let content = a.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if content.is_zero() {
        return a;
    }
    let content = if a.last().expect("nonzero polynomial").is_negative() { -content } else { content };
    a.into_iter().map(|c| c / &content).collect()
}

/// Primitive part of the pseudo-remainder of `a` by `b`.
fn prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let lb = b.last().expect("nonzero divisor");
    while r.len() >= b.len() {
        let lr = r.last().expect("nonempty").clone();
        let shift = r.len() - b.len();
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (k, bk) in b.iter().enumerate() {
            r[k + shift] -= &lr * bk;
        }
        r = trim(r);
    }
    primitive(r)
}

fn poly_gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let (mut a, mut b) = (primitive(a.to_vec()), primitive(b.to_vec()));
    while !b.is_empty() {
        let r = prem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// Quotient of `a` by a divisor `b`.
fn exact_div(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let lb = b.last().expect("nonzero divisor");
    let mut q = vec![BigInt::zero(); a.len() + 1 - b.len()];
    for shift in (0..q.len()).rev() {
        let c = &r[shift + b.len() - 1] / lb;
        for (k, bk) in b.iter().enumerate() {
            r[k + shift] -= &c * bk;
        }
        q[shift] = c;
    }
    debug_assert!(r.iter().all(Zero::is_zero));
    q
}

const SCHUR_MAX_ITER: usize = 100_000;

/// Spectral radius of a nonnegative square matrix via a full (complex)
/// eigenvalue solve. If the Schur iteration stalls, the matrix is shifted by the
/// identity, which moves the Perron root by exactly 1.
pub fn spectral_radius_eigen(m: &QMatrix) -> Result<f64, DenseError> {
    if m.rows().iter().flatten().all(|&a| a == 0.0) {
        return Ok(0.0);
    }
    let a = m.to_nalgebra();
    let radius = |schur: Schur<f64, Dyn>| schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        return Ok(radius(s));
    }
    let n = m.n();
    let shifted = a + DMatrix::<f64>::identity(n, n);
    Schur::try_new(shifted, f64::EPSILON, SCHUR_MAX_ITER)
        .map(|s| radius(s) - 1.0)
        .ok_or(DenseError::NoSchur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::signless_laplacian;

    #[test]
    fn digon_charpoly() {
        // Q = [[1,1],[1,1]]: x^2 - 2x.
        let g = Digraph::new(2, [(1, 2), (2, 1)]).unwrap();
        assert_eq!(characteristic_polynomial(&g).unwrap(), vec![0, -2, 1]);
    }

    #[test]
    fn cycle_charpoly() {
        // Q(C_3) = I + P: (x - 1)^3 - 1 = x^3 - 3x^2 + 3x - 2.
        let g = Digraph::directed_cycle(3);
        assert_eq!(characteristic_polynomial(&g).unwrap(), vec![-2, 3, -3, 1]);
        assert!((q_index_via_charpoly(&g).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trace_and_determinant_coefficients() {
        let g = Digraph::new(4, [(1, 3), (3, 1), (2, 3), (3, 2), (1, 4), (4, 2)]).unwrap();
        let c = characteristic_polynomial(&g).unwrap();
        // -c[n-1] is the trace = number of arcs.
        assert_eq!(-c[3], 6);
        let det = signless_laplacian(&g).to_nalgebra().determinant();
        assert!((c[0] as f64 - det).abs() < 1e-9);
    }

    #[test]
    fn square_free_part_drops_repeated_roots() {
        // (x-2)^3 (x-1) = x^4 - 7x^3 + 18x^2 - 20x + 8
        assert_eq!(square_free_part(&[8, -20, 18, -7, 1]), vec![2.0, -3.0, 1.0]);
        assert_eq!(square_free_part(&[0, 0, 0, 1]), vec![0.0, 1.0]);
    }

    #[test]
    fn repeated_perron_root() {
        // Two disjoint digons: Q has the double eigenvalue 2, no sign change in det(xI - Q).
        let g = Digraph::new(4, [(1, 2), (2, 1), (3, 4), (4, 3)]).unwrap();
        assert!((spectral_radius_via_charpoly(&g).unwrap() - 2.0).abs() < 1e-12);
        assert!(spectral_radius_via_charpoly(&Digraph::empty(3)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn size_cap() {
        let g = Digraph::directed_cycle(11);
        assert_eq!(
            characteristic_polynomial(&g),
            Err(DenseError::SizeCapExceeded { n: 11, cap: CHARPOLY_CAP })
        );
    }

    #[test]
    fn eigen_route_on_reducible_matrix() {
        let arc = Digraph::new(2, [(1, 2)]).unwrap();
        assert!((spectral_radius_eigen(&signless_laplacian(&arc)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(spectral_radius_eigen(&signless_laplacian(&Digraph::empty(3))), Ok(0.0));
    }
}
