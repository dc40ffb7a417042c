use nalgebra::{DMatrix, DVector};

use super::design::DesignMatrix;
use super::fit::{CoefBlock, Estimator, Extras, FitResult};
use super::linalg::lstsq;
use super::EconError;

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub beta: DVector<f64>,
    /// Classical covariance `s^2 (X'X)^{-1}` with `s^2 = e'e / (n - k)`.
    pub cov: DMatrix<f64>,
    pub resid: DVector<f64>,
    pub xtx_inv: DMatrix<f64>,
    pub s2: f64,
}

pub fn ols_matrix(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<OlsFit, EconError> {
    let (n, k) = x.shape();
    if n == 0 {
        return Err(EconError::EmptySample("no observations".into()));
    }
    let (beta, xtx_inv) = lstsq(x, y)?;
    let resid = y - x * &beta;
    let dof = n.saturating_sub(k).max(1) as f64;
    let s2 = resid.norm_squared() / dof;
    Ok(OlsFit {
        cov: &xtx_inv * s2,
        beta,
        resid,
        xtx_inv,
        s2,
    })
}

pub fn ols(dm: &DesignMatrix) -> Result<FitResult, EconError> {
    let f = ols_matrix(&dm.y, &dm.x)?;
    let n = dm.n_obs() as f64;
    let ssr = f.resid.norm_squared();
    let loglik = -0.5 * n * (1.0 + (2.0 * std::f64::consts::PI * ssr / n).ln());
    Ok(FitResult {
        estimator: Estimator::Ols,
        main: CoefBlock::new(dm.dependent.clone(), dm.names.clone(), f.beta, f.cov),
        n_obs: dm.n_obs(),
        loglik: Some(loglik),
        iterations: None,
        extras: Extras::None,
        warnings: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_closed_form_simple_regression() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [2.1, 3.9, 6.2, 7.8, 10.1];
        let x = DMatrix::from_fn(5, 2, |i, j| if j == 0 { xs[i] } else { 1.0 });
        let y = DVector::from_column_slice(&ys);
        let f = ols_matrix(&y, &x).unwrap();
        let xm = xs.iter().sum::<f64>() / 5.0;
        let ym = ys.iter().sum::<f64>() / 5.0;
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - xm) * (b - ym)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - xm).powi(2)).sum();
        let slope = sxy / sxx;
        assert_relative_eq!(f.beta[0], slope, epsilon = 1e-12);
        assert_relative_eq!(f.beta[1], ym - slope * xm, epsilon = 1e-12);
        let s2: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(a, b)| (b - f.beta[1] - slope * a).powi(2))
            .sum::<f64>()
            / 3.0;
        assert_relative_eq!(f.cov[(0, 0)], s2 / sxx, epsilon = 1e-12);
    }
}
