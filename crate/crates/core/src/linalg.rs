//! Cyclic Jacobi eigensolver for small real symmetric matrices.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Ascending eigenpairs of a real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`; the first component
    /// with magnitude above `1e-12` is positive.
    pub eigenvectors: Vec<Vec<f64>>,
}

/// Largest `|a_ij - a_ji|` of a square row-major matrix.
pub fn asymmetry(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((a[i][j] - a[j][i]).abs());
        }
    }
    worst
}

/// Diagonalizes `a` by cyclic Jacobi rotations. Rejects matrices whose
/// asymmetry exceeds `symmetry_tolerance`; the symmetric part is used.
pub fn jacobi_eigen(a: &[Vec<f64>], symmetry_tolerance: f64) -> Result<SymmetricEigen> {
    let n = a.len();
    if n == 0 {
        return Err(Error::Empty("matrix"));
    }
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: row.len(),
        });
    }
    if a.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix entry"));
    }
    let deviation = asymmetry(a);
    if deviation > symmetry_tolerance {
        return Err(Error::NonSymmetric { deviation });
    }

    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale = m
        .iter()
        .flatten()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[x][x].total_cmp(&m[y][y]));
    let eigenvalues = order.iter().map(|&k| m[k][k]).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = v.iter().map(|row| row[k]).collect();
            if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            col
        })
        .collect();
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
    })
}
