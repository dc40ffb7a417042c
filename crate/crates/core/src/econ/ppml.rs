//! Poisson pseudo-maximum likelihood with heteroskedasticity-robust (HC0)
//! standard errors.

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use super::design::DesignMatrix;
use super::fit::{CoefBlock, Estimator, Extras, FitResult};
use super::linalg::{lstsq, max_abs, spd_inverse, symmetrize, weighted_gram, xt_vec};
use super::EconError;

pub const MAX_ITER: usize = 100;
pub const COEF_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PoissonFit {
    pub beta: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub loglik: f64,
    pub iterations: usize,
}

/// Weighted Poisson pseudo-log-likelihood without the `ln y!` constant.
pub(crate) fn pseudo_loglik(y: &DVector<f64>, eta: &DVector<f64>, w: Option<&[f64]>) -> f64 {
    y.iter()
        .zip(eta.iter())
        .enumerate()
        .map(|(i, (&yi, &e))| w.map_or(1.0, |w| w[i]) * (yi * e - e.exp()))
        .sum()
}

pub(crate) fn check_counts(y: &DVector<f64>) -> Result<(), EconError> {
    if let Some(v) = y.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(EconError::InvalidData(format!(
            "PPML needs a nonnegative outcome (found {v}); use the level of trade, not its log"
        )));
    }
    if y.iter().all(|&v| v == 0.0) {
        return Err(EconError::ZeroVariance("outcome is identically zero".into()));
    }
    Ok(())
}

/// Weighted Poisson fit by Newton-Raphson (IRLS) with step halving.
/// `w = None` means unit weights. Returns the coefficients, the iteration
/// count and the final information matrix `X' diag(w mu) X`.
pub(crate) fn poisson_irls(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    w: Option<&[f64]>,
    start: DVector<f64>,
) -> Result<(DVector<f64>, usize, DMatrix<f64>), EconError> {
    let n = y.len();
    let weight = |i: usize| w.map_or(1.0, |w| w[i]);
    let mut beta = start;
    let mut eta = x * &beta;
    let mut ll = pseudo_loglik(y, &eta, w);
    let mut last_change = f64::INFINITY;
    for iter in 1..=MAX_ITER {
        let mu: Vec<f64> = eta.iter().map(|e| e.exp()).collect();
        let score: Vec<f64> = (0..n).map(|i| weight(i) * (y[i] - mu[i])).collect();
        let wmu: Vec<f64> = (0..n).map(|i| weight(i) * mu[i]).collect();
        let info = weighted_gram(x, &wmu);
        let info_inv = spd_inverse(&info).ok_or(EconError::Singular("Poisson information matrix"))?;
        let step = &info_inv * xt_vec(x, &score);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &beta + &step * t;
            let cand_eta = x * &cand;
            let cand_ll = pseudo_loglik(y, &cand_eta, w);
            if cand_ll.is_finite() && cand_ll >= ll - 1e-12 * ll.abs() {
                last_change = max_abs(&(&cand - &beta));
                beta = cand;
                eta = cand_eta;
                ll = cand_ll;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || last_change < COEF_TOL {
            let mu: Vec<f64> = (0..n).map(|i| weight(i) * eta[i].exp()).collect();
            return Ok((beta, iter, weighted_gram(x, &mu)));
        }
        if eta.iter().any(|&e| e < -50.0) && iter > 25 {
            return Err(EconError::Separation(
                "fitted means collapse to zero for some observations; a regressor separates the zero outcomes".into(),
            ));
        }
    }
    Err(EconError::NotConverged {
        estimator: "ppml",
        iterations: MAX_ITER,
        last_change,
    })
}

/// PPML on raw matrices: IRLS started from OLS on `ln(1 + y)`, HC0
/// sandwich covariance.
pub fn ppml_matrix(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<PoissonFit, EconError> {
    check_counts(y)?;
    let start = lstsq(x, &y.map(|v| v.ln_1p()))?.0;
    let (beta, iterations, bread) = poisson_irls(y, x, None, start)?;
    let eta = x * &beta;
    let e2: Vec<f64> = (0..y.len()).map(|i| (y[i] - eta[i].exp()).powi(2)).collect();
    let meat = weighted_gram(x, &e2);
    let bread_inv = spd_inverse(&bread).ok_or(EconError::Singular("Poisson information matrix"))?;
    let cov = symmetrize(&bread_inv * meat * &bread_inv);
    let loglik = pseudo_loglik(y, &eta, None) - y.iter().map(|&v| ln_gamma(v + 1.0)).sum::<f64>();
    Ok(PoissonFit {
        beta,
        cov,
        loglik,
        iterations,
    })
}

pub fn ppml(dm: &DesignMatrix) -> Result<FitResult, EconError> {
    let f = ppml_matrix(&dm.y, &dm.x)?;
    Ok(FitResult {
        estimator: Estimator::Ppml,
        main: CoefBlock::new(dm.dependent.clone(), dm.names.clone(), f.beta, f.cov),
        n_obs: dm.n_obs(),
        loglik: Some(f.loglik),
        iterations: Some(f.iterations),
        extras: Extras::None,
        warnings: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::testutil::Rng;
    use approx::assert_relative_eq;

    #[test]
    fn dummy_model_reproduces_group_means() {
        let ys = [0.0, 3.0, 5.0, 1.0, 10.0, 12.0, 0.0, 20.0];
        let g = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let x = DMatrix::from_fn(8, 2, |i, j| if j == 0 { g[i] } else { 1.0 });
        let f = ppml_matrix(&DVector::from_column_slice(&ys), &x).unwrap();
        assert_relative_eq!(f.beta[1], (9.0f64 / 4.0).ln(), epsilon = 1e-10);
        assert_relative_eq!(f.beta[0], (42.0f64 / 4.0).ln() - (9.0f64 / 4.0).ln(), epsilon = 1e-10);
    }

    #[test]
    fn first_order_conditions_and_sandwich() {
        let n = 500;
        let mut rng = Rng::new(11);
        let a = rng.normals(n);
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { a[i] } else { 1.0 });
        let y = DVector::from_fn(n, |i, _| rng.poisson((0.5 + 0.8 * a[i]).exp()));
        let f = ppml_matrix(&y, &x).unwrap();
        let mu = (&x * &f.beta).map(f64::exp);
        let foc = x.transpose() * (&y - &mu);
        assert!(foc.amax() < 1e-8 * y.sum(), "{foc}");

        // explicit dense sandwich
        let w = DMatrix::from_diagonal(&mu);
        let e2 = DMatrix::from_diagonal(&(&y - &mu).map(|v| v * v));
        let b = (x.transpose() * w * &x).try_inverse().unwrap();
        let v = &b * (x.transpose() * e2 * &x) * &b;
        for k in 0..4 {
            assert_relative_eq!(v[k], f.cov[k], max_relative = 1e-8);
        }
    }

    #[test]
    fn rejects_negative_outcomes() {
        let x = DMatrix::from_element(3, 1, 1.0);
        let y = DVector::from_column_slice(&[1.0, -2.0, 3.0]);
        assert!(matches!(ppml_matrix(&y, &x), Err(EconError::InvalidData(_))));
    }
}
