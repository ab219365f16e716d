//! Closed-form polynomials whose largest real roots are the Q-indices of `B1`
//! and `B2`:
//!
//! ```text
//! f(x) = (x-1)^(n-p-q) [x^3 - (p+2q+1) x^2 + (q^2+pq+p+q) x - q] - q
//! g(x) = (x-1)^(n-p-q) [x^3 - (q+2p+1) x^2 + (p^2+pq+p+q) x - p] - p
//! ```
//!
//! Roots are isolated by a downward sign scan over `[p+q, 2n]` followed by
//! bisection, so no eigen-solver is involved.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::dense::bisect;
use crate::numfmt::ser_g17;

/// Number of equal steps used by the downward sign scan.
pub const SCAN_STEPS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyKind {
    F,
    G,
}

impl fmt::Display for PolyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolyKind::F => "f",
            PolyKind::G => "g",
        })
    }
}

impl FromStr for PolyKind {
    type Err = CharPolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f" | "F" => Ok(PolyKind::F),
            "g" | "G" => Ok(PolyKind::G),
            other => Err(CharPolyError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharPolyError {
    #[error("unknown polynomial kind '{0}' (expected f or g)")]
    UnknownKind(String),
    #[error("need p >= q >= 1 and p + q <= n - 1, got n = {n}, p = {p}, q = {q}")]
    InvalidParameters { n: usize, p: usize, q: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("{spec}: no sign change on [{lower}, {upper}]")]
    NoSignChange {
        spec: CharPolySpec,
        lower: f64,
        upper: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CharPolySpec {
    pub kind: PolyKind,
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

impl fmt::Display for CharPolySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={}, p={}, q={})", self.kind, self.n, self.p, self.q)
    }
}

impl CharPolySpec {
    pub fn new(kind: PolyKind, n: usize, p: usize, q: usize) -> Result<Self, CharPolyError> {
        if q == 0 || p < q || p + q + 1 > n {
            return Err(CharPolyError::InvalidParameters { n, p, q });
        }
        Ok(Self { kind, n, p, q })
    }

    /// Bisection bracket `[p+q, 2n]`.
    pub fn bracket(&self) -> (f64, f64) {
        ((self.p + self.q) as f64, (2 * self.n) as f64)
    }
}

/// Evaluate `f` or `g` in factored form.
pub fn eval_poly(spec: &CharPolySpec, x: f64) -> f64 {
    let (n, p, q) = (spec.n, spec.p as f64, spec.q as f64);
    // g is f with the side sizes exchanged.
    let (a, b) = match spec.kind {
        PolyKind::F => (p, q),
        PolyKind::G => (q, p),
    };
    let cubic = ((x - (a + 2.0 * b + 1.0)) * x + (b * b + a * b + a + b)) * x - b;
    let power = (x - 1.0).powi((n - spec.p - spec.q) as i32);
    power * cubic - b
}

/// Outcome of the root search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReport {
    pub spec: CharPolySpec,
    #[serde(serialize_with = "ser_g17")]
    pub root: f64,
    /// Sign changes seen on the scan grid over the whole bracket.
    pub sign_changes: usize,
    /// Whether the polynomial has opposite signs at the two bracket ends.
    pub endpoints_straddle: bool,
    #[serde(serialize_with = "ser_g17")]
    pub lower: f64,
    #[serde(serialize_with = "ser_g17")]
    pub upper: f64,
}

/// Largest real root in `(p+q, 2n]`, refined to width `tol`.
pub fn largest_real_root(spec: &CharPolySpec, tol: f64) -> Result<RootReport, CharPolyError> {
    if !(tol > 0.0) {
        return Err(CharPolyError::InvalidTolerance(tol));
    }
    let (lower, upper) = spec.bracket();
    let eval = |x: f64| eval_poly(spec, x);
    let positive = |x: f64| eval(x) > 0.0;

    let step = (upper - lower) / SCAN_STEPS as f64;
    let grid = |k: usize| if k == SCAN_STEPS { lower } else { upper - step * k as f64 };
    let mut top_bracket = None;
    let mut sign_changes = 0;
    let mut prev = positive(upper);
    for k in 1..=SCAN_STEPS {
        let cur = positive(grid(k));
        if cur != prev {
            sign_changes += 1;
            top_bracket.get_or_insert((grid(k), grid(k - 1)));
        }
        prev = cur;
    }
    let endpoints_straddle = positive(upper) != positive(lower);
    let (lo, hi) = top_bracket.ok_or(CharPolyError::NoSignChange {
        spec: *spec,
        lower,
        upper,
    })?;
    let hi_positive = positive(hi);
    let root = bisect(|x| positive(x) == hi_positive, lo, hi, tol);
    Ok(RootReport {
        spec: *spec,
        root,
        sign_changes,
        endpoints_straddle,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: PolyKind, n: usize, p: usize, q: usize) -> CharPolySpec {
        CharPolySpec::new(kind, n, p, q).unwrap()
    }

    #[test]
    fn direct_evaluation() {
        // (3-1)^1 (27 - 45 + 18 - 1) - 1 = -3
        assert_eq!(eval_poly(&spec(PolyKind::F, 4, 2, 1), 3.0), -3.0);
        // g(4,2,1) at 3: (2)(27 - 6*9 + 9*3 - 2) - 2 = -6
        assert_eq!(eval_poly(&spec(PolyKind::G, 4, 2, 1), 3.0), -6.0);
    }

    #[test]
    fn f_equals_g_when_sides_match() {
        for x in [0.0, 1.5, 4.0, 7.25, 13.0] {
            let f = eval_poly(&spec(PolyKind::F, 7, 2, 2), x);
            let g = eval_poly(&spec(PolyKind::G, 7, 2, 2), x);
            assert_eq!(f, g);
        }
    }

    #[test]
    fn difference_identity() {
        // f - g = (x-1)^(n-p-q) (p-q) [x^2 - (p+q) x + 1] + (p-q), positive beyond p+q.
        for &(n, p, q) in &[(4, 2, 1), (8, 4, 1), (9, 5, 3), (12, 3, 2)] {
            let f = spec(PolyKind::F, n, p, q);
            let g = spec(PolyKind::G, n, p, q);
            for k in 1..=50 {
                let x = (p + q) as f64 + (2 * n - p - q) as f64 * k as f64 / 50.0;
                let diff = eval_poly(&f, x) - eval_poly(&g, x);
                let m = (n - p - q) as i32;
                let (pf, qf) = (p as f64, q as f64);
                let closed = (x - 1.0).powi(m) * (pf - qf) * (x * x - (pf + qf) * x + 1.0) + (pf - qf);
                assert!((diff - closed).abs() <= 1e-9 * closed.abs().max(1.0), "{n} {p} {q} {x}");
                assert!(diff > 0.0);
            }
        }
    }

    #[test]
    fn root_examples() {
        let r = largest_real_root(&spec(PolyKind::F, 4, 2, 1), 1e-13).unwrap();
        assert!(r.root > 3.0);
        assert!(eval_poly(&r.spec, r.root).abs() < 1e-9);
        assert_eq!(r.sign_changes, 1);
        assert!(r.endpoints_straddle);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CharPolySpec::new(PolyKind::F, 3, 2, 1).is_err());
        assert!(CharPolySpec::new(PolyKind::F, 6, 1, 2).is_err());
        assert!(CharPolySpec::new(PolyKind::F, 6, 2, 0).is_err());
        assert!(largest_real_root(&spec(PolyKind::F, 4, 2, 1), 0.0).is_err());
        assert_eq!("g".parse::<PolyKind>(), Ok(PolyKind::G));
        assert!("h".parse::<PolyKind>().is_err());
    }
}
