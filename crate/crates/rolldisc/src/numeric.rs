//! Small dense `f64` helpers shared by the numerical modules.
//!
//! Dimensions never exceed a dozen here, so plain Gaussian elimination with
//! partial pivoting and normal-equation least squares are entirely adequate.

/// Solves `Ax = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is singular to working precision.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    assert_eq!(n, b.len(), "shape mismatch");
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), n, "solve expects a square matrix");
            let mut r = row.clone();
            r.push(*rhs);
            r
        })
        .collect();
    for c in 0..n {
        let (pr, pv) = (c..n)
            .map(|i| (i, m[i][c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pv == 0.0 || !pv.is_finite() {
            return None;
        }
        m.swap(c, pr);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            if f != 0.0 {
                for j in c..=n {
                    m[i][j] -= f * m[c][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = m[i][n];
        for j in i + 1..n {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}

/// Determinant by LU factorization with partial pivoting.
pub fn det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut result = 1.0;
    for c in 0..n {
        let (pr, pv) = (c..n)
            .map(|i| (i, m[i][c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pv == 0.0 {
            return 0.0;
        }
        if pr != c {
            m.swap(c, pr);
            result = -result;
        }
        result *= m[c][c];
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            if f != 0.0 {
                for j in c..n {
                    m[i][j] -= f * m[c][j];
                }
            }
        }
    }
    result
}

/// Numerical rank of the given rows: Gaussian elimination with pivots below
/// `tol` (relative to the largest absolute entry) treated as zero.
pub fn rank_tol(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let cutoff = tol * scale;
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut rank = 0;
    for c in 0..cols {
        if rank == m.len() {
            break;
        }
        let (pr, pv) = (rank..m.len())
            .map(|i| (i, m[i][c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pv <= cutoff {
            continue;
        }
        m.swap(rank, pr);
        for i in rank + 1..m.len() {
            let f = m[i][c] / m[rank][c];
            if f != 0.0 {
                for j in c..cols {
                    m[i][j] -= f * m[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Least-squares solution of the overdetermined system with the given rows,
/// via normal equations. Returns the coefficient vector and the maximum
/// absolute residual of `Ax − b`, or `None` when the normal matrix is
/// singular (rank-deficient column space).
pub fn lstsq(rows: &[Vec<f64>], rhs: &[f64]) -> Option<(Vec<f64>, f64)> {
    assert_eq!(rows.len(), rhs.len(), "shape mismatch");
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut ata = vec![vec![0.0; ncols]; ncols];
    let mut atb = vec![0.0; ncols];
    for (row, &b) in rows.iter().zip(rhs) {
        for i in 0..ncols {
            atb[i] += row[i] * b;
            for j in 0..ncols {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let x = solve(&ata, &atb)?;
    let max_resid = rows
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let pred: f64 = row.iter().zip(&x).map(|(a, c)| a * c).sum();
            (pred - b).abs()
        })
        .fold(0.0f64, f64::max);
    Some((x, max_resid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn solve_well_conditioned() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[5.0, 10.0]).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn solve_singular_is_none() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&a, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        let a = vec![
            vec![1.0, 2.0, 3.0],
            vec![0.0, 4.0, 5.0],
            vec![1.0, 0.0, 6.0],
        ];
        assert_abs_diff_eq!(det(&a), 22.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_with_tolerance() {
        let rows = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 1e-12],
        ];
        assert_eq!(rank_tol(&rows, 1e-9), 2);
        assert_eq!(rank_tol(&rows, 1e-15), 3);
        assert_eq!(rank_tol(&[], 1e-9), 0);
    }

    #[test]
    fn lstsq_recovers_exact_combination() {
        // b = 2·col0 − 3·col1 exactly.
        let rows = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![2.0, -1.0],
        ];
        let rhs: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] - 3.0 * r[1]).collect();
        let (x, resid) = lstsq(&rows, &rhs).unwrap();
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], -3.0, epsilon = 1e-12);
        assert!(resid < 1e-12);
    }

    #[test]
    fn lstsq_reports_nonzero_residual_off_span() {
        let rows = vec![vec![1.0], vec![1.0]];
        let (x, resid) = lstsq(&rows, &[0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(resid, 1.0, epsilon = 1e-12);
    }
}
