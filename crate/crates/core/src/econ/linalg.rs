//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{DMatrix, DVector};

use super::EconError;

/// Relative residual norm below which a column counts as a linear
/// combination of the columns before it.
pub const RANK_TOL: f64 = 1e-10;

/// Checks that `x` has full column rank. On failure the error names the
/// first dependent column and the earlier columns it is a combination of.
pub fn check_full_rank(x: &DMatrix<f64>, names: &[String]) -> Result<(), EconError> {
    let (n, k) = x.shape();
    if n < k {
        return Err(EconError::RankDeficient {
            columns: names.to_vec(),
        });
    }
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut kept: Vec<usize> = Vec::with_capacity(k);
    for j in 0..k {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        let mut r = col.clone();
        // two passes of modified Gram-Schmidt for stability
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let rn = r.norm();
        if norm == 0.0 || rn <= RANK_TOL * norm {
            let mut columns = Vec::new();
            if norm > 0.0 && !kept.is_empty() {
                let sub = DMatrix::from_fn(n, kept.len(), |i, c| x[(i, kept[c])]);
                if let Ok((coef, _)) = lstsq(&sub, &col) {
                    for (c, &idx) in kept.iter().enumerate() {
                        let scale = x.column(idx).norm();
                        if (coef[c] * scale).abs() > 1e-8 * norm {
                            columns.push(names[idx].clone());
                        }
                    }
                }
            }
            columns.push(names[j].clone());
            return Err(EconError::RankDeficient { columns });
        }
        basis.push(r / rn);
        kept.push(j);
    }
    Ok(())
}

/// Least squares by Householder QR. Returns the coefficients and
/// `(X'X)^{-1} = R^{-1} R^{-T}`.
pub fn lstsq(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>), EconError> {
    let k = x.ncols();
    let qr = x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| EconError::RankDeficient { columns: vec![] })?;
    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| EconError::RankDeficient { columns: vec![] })?;
    let xtx_inv = &rinv * rinv.transpose();
    Ok((beta, xtx_inv))
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = m.clone().cholesky()?;
    Some(symmetrize(chol.inverse()))
}

/// Averages a matrix with its transpose.
pub fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// `X' diag(w) X`.
pub fn weighted_gram(x: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let k = x.ncols();
    let mut g = DMatrix::zeros(k, k);
    for (i, &wi) in w.iter().enumerate() {
        if wi == 0.0 {
            continue;
        }
        let row = x.row(i);
        for a in 0..k {
            let ra = wi * row[a];
            for b in a..k {
                g[(a, b)] += ra * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            g[(a, b)] = g[(b, a)];
        }
    }
    g
}

/// `X' v`.
pub fn xt_vec(x: &DMatrix<f64>, v: &[f64]) -> DVector<f64> {
    x.transpose() * DVector::from_column_slice(v)
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn detects_collinear_set() {
        let x = DMatrix::from_row_slice(4, 3, &[1.0, 1.0, 2.0, 1.0, 2.0, 3.0, 1.0, 3.0, 4.0, 1.0, 5.0, 6.0]);
        match check_full_rank(&x, &names(3)) {
            Err(EconError::RankDeficient { columns }) => assert_eq!(columns, ["x0", "x1", "x2"]),
            other => panic!("{other:?}"),
        }
        let zero = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        match check_full_rank(&zero, &names(2)) {
            Err(EconError::RankDeficient { columns }) => assert_eq!(columns, ["x1"]),
            other => panic!("{other:?}"),
        }
        let ok = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        assert!(check_full_rank(&ok, &names(2)).is_ok());
    }

    #[test]
    fn lstsq_line() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let y = DVector::from_vec(vec![0.0, 1.0]);
        let (b, _) = lstsq(&x, &y).unwrap();
        assert!(b[0].abs() < 1e-14 && (b[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gram_matches_product() {
        let x = DMatrix::from_fn(5, 3, |i, j| ((i + 1) * (j + 2)) as f64 + (i as f64).sin());
        let w = [0.5, 1.0, 2.0, 0.0, 3.0];
        let g = weighted_gram(&x, &w);
        let direct = x.transpose() * DMatrix::from_diagonal(&DVector::from_column_slice(&w)) * &x;
        assert!((g - direct).amax() < 1e-12);
    }
}
