//! Exact linear algebra over arbitrary-precision rationals.
//!
//! Structure-constant work (Jacobi checks, Killing determinants,
//! prolongation kernels) must distinguish "exactly zero" from "numerically
//! tiny", so everything here stays in [`BigRational`] and never rounds.
//! Matrices are dense row-major `Vec<Vec<Rat>>`; the dimensions involved
//! are single or low double digits, so exactness beats cleverness.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar used for all structure-constant arithmetic.
pub type Rat = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Builds `n/d`. Panics on `d = 0`; intended for literals in code.
pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer rational `n`.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"p"` or `"p/q"` with optional leading sign into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRatError::Empty);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| ParseRatError::Invalid(s.to_string()))?;
    let d: BigInt = match den {
        Some(d) => d.parse().map_err(|_| ParseRatError::Invalid(s.to_string()))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(ParseRatError::ZeroDenominator(s.to_string()));
    }
    Ok(Rat::new(n, d))
}

/// Formats a rational as `"p"` or `"p/q"`, always in lowest terms.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Vector of `n` exact zeros.
pub fn zeros(n: usize) -> Vec<Rat> {
    vec![Rat::zero(); n]
}

/// Exact identity matrix.
pub fn identity(n: usize) -> Vec<Vec<Rat>> {
    let mut m = vec![zeros(n); n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Rat::one();
    }
    m
}

/// Matrix times vector.
pub fn mat_vec(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
        })
        .collect()
}

/// Matrix product.
pub fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let cols = b[0].len();
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .enumerate()
                        .fold(Rat::zero(), |acc, (k, v)| acc + v * &b[k][j])
                })
                .collect()
        })
        .collect()
}

/// Reduces `m` to reduced row echelon form in place and returns the pivot
/// column indices in order.
pub fn rref(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] = &m[i][j] - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact rank.
pub fn rank(mut m: Vec<Vec<Rat>>) -> usize {
    rref(&mut m).len()
}

/// Basis of the row space: the nonzero rows of the RREF.
pub fn row_space_basis(mut m: Vec<Vec<Rat>>) -> Vec<Vec<Rat>> {
    let npiv = rref(&mut m).len();
    m.truncate(npiv);
    m
}

/// Basis of `{x : Ax = 0}` for the matrix with the given rows, each of
/// length `ncols`. Returned vectors follow the standard RREF free-variable
/// construction, so they are reduced and deterministic.
pub fn kernel_basis(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    for row in &m {
        assert_eq!(row.len(), ncols, "ragged kernel input");
    }
    let pivots = rref(&mut m);
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivot_set.contains(c)) {
        let mut v = zeros(ncols);
        v[free] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Exact determinant by fraction-preserving Gaussian elimination.
pub fn det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut result = Rat::one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rat::zero();
        };
        if pr != c {
            a.swap(c, pr);
            result = -result;
        }
        result *= a[c][c].clone();
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] * &inv;
                for j in c..n {
                    let sub = &f * &a[c][j];
                    a[i][j] = &a[i][j] - sub;
                }
            }
        }
    }
    result
}

/// Solves `Ax = b` and returns the solution only when it exists and is
/// unique. `A` need not be square.
pub fn solve_unique(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let rows = a.len();
    assert_eq!(rows, b.len(), "shape mismatch");
    if rows == 0 {
        return None;
    }
    let cols = a[0].len();
    let mut aug: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None; // inconsistent
    }
    if pivots.len() != cols {
        return None; // underdetermined
    }
    let mut x = zeros(cols);
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

/// Monic characteristic polynomial of a square matrix via the
/// Faddeev-LeVerrier recursion. Returns coefficients
/// `[1, c1, ..., cn]` of `λⁿ + c1·λⁿ⁻¹ + ... + cn`.
pub fn char_poly(a: &[Vec<Rat>]) -> Vec<Rat> {
    let n = a.len();
    let mut coeffs = vec![Rat::one()];
    let mut m = identity(n);
    for k in 1..=n {
        m = mat_mul(a, &m);
        let tr = (0..n).fold(Rat::zero(), |acc, i| acc + &m[i][i]);
        let c = -tr / rat_int(k as i64);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = &row[i] + &c;
        }
        coeffs.push(c);
    }
    coeffs
}

/// Signature `(positive, negative, zero)` of a symmetric rational matrix,
/// read off the exact characteristic polynomial. All eigenvalues of a
/// symmetric matrix are real, so Descartes' sign rule counts them exactly.
pub fn symmetric_signature(a: &[Vec<Rat>]) -> (usize, usize, usize) {
    let n = a.len();
    let coeffs = char_poly(a);
    let mut trailing_zeros = 0;
    for c in coeffs.iter().rev() {
        if c.is_zero() {
            trailing_zeros += 1;
        } else {
            break;
        }
    }
    let nonzero_part = &coeffs[..coeffs.len() - trailing_zeros];
    let sign_changes = |signs: &[i8]| {
        signs
            .windows(2)
            .filter(|w| w[0] != w[1])
            .count()
    };
    let pos_signs: Vec<i8> = nonzero_part
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| if c.is_positive() { 1 } else { -1 })
        .collect();
    let pos = sign_changes(&pos_signs);
    // p(−λ): coefficient of λ^{n−k} picks up (−1)^{n−k}.
    let neg_signs: Vec<i8> = nonzero_part
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| {
            let flip = (n - k) % 2 == 1;
            let positive = c.is_positive() != flip;
            if positive {
                1
            } else {
                -1
            }
        })
        .collect();
    let neg = sign_changes(&neg_signs);
    (pos, neg, trailing_zeros)
}
