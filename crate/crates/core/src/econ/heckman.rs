//! Heckman two-step selection model: probit on the full sample, then OLS on
//! the selected rows with the inverse Mills ratio as an extra regressor.

use nalgebra::{DMatrix, DVector};

use super::design::DesignMatrix;
use super::fit::{CoefBlock, Estimator, Extras, FitResult, LAMBDA};
use super::linalg::{check_full_rank, lstsq, symmetrize};
use super::normal::inverse_mills;
use super::probit::{probit, ProbitFit};
use super::EconError;

/// Name of the selection block in results.
pub const SELECTION_EQUATION: &str = "trade_dummy";

#[derive(Debug, Clone)]
pub struct HeckmanFit {
    /// Outcome coefficients followed by the `lambda` coefficient.
    pub beta: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub probit: ProbitFit,
    pub rho: f64,
    pub sigma: f64,
    pub rho_clipped: bool,
    pub n_selected: usize,
}

/// Two-step estimates on raw matrices. `y` is only read where `d = 1`.
/// `x` and `z` should both contain their intercept columns.
pub fn heckman_matrix(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    x_names: &[String],
    d: &DVector<f64>,
    z: &DMatrix<f64>,
) -> Result<HeckmanFit, EconError> {
    let pf = probit(d, z)?;
    let index = z * &pf.gamma;
    let sel: Vec<usize> = (0..d.len()).filter(|&i| d[i] > 0.5).collect();
    let n1 = sel.len();
    let kx = x.ncols();

    let lam: Vec<f64> = sel.iter().map(|&i| inverse_mills(index[i])).collect();
    let delta: Vec<f64> = sel
        .iter()
        .zip(&lam)
        .map(|(&i, &l)| l * (l + index[i]))
        .collect();
    let xs = DMatrix::from_fn(n1, kx + 1, |r, c| if c < kx { x[(sel[r], c)] } else { lam[r] });
    let mut names: Vec<String> = x_names.to_vec();
    names.push(LAMBDA.into());
    check_full_rank(&xs, &names)?;
    let ys = DVector::from_fn(n1, |r, _| y[sel[r]]);
    let zs = DMatrix::from_fn(n1, z.ncols(), |r, c| z[(sel[r], c)]);

    let (beta, xtx_inv) = lstsq(&xs, &ys)?;
    let resid = &ys - &xs * &beta;
    let b_lambda = beta[kx];
    let mean_delta = delta.iter().sum::<f64>() / n1 as f64;
    let sigma2 = resid.norm_squared() / n1 as f64 + b_lambda * b_lambda * mean_delta;
    let mut sigma = sigma2.sqrt();
    let mut rho = b_lambda / sigma;
    let mut rho_clipped = false;
    if rho.abs() > 1.0 {
        // same convention as Stata: truncate rho and let sigma absorb it
        rho = rho.signum();
        sigma = b_lambda.abs();
        rho_clipped = true;
    }
    let sigma2 = sigma * sigma;
    let rho2 = rho * rho;

    // X*'(I - rho^2 Delta)X* + rho^2 (X*'Delta Z) V_gamma (Z'Delta X*)
    let mut middle = xs.transpose() * &xs;
    let mut xdz = DMatrix::zeros(kx + 1, z.ncols());
    for r in 0..n1 {
        let xr = xs.row(r);
        let zr = zs.row(r);
        for a in 0..=kx {
            let xa = xr[a] * delta[r];
            for b in 0..=kx {
                middle[(a, b)] -= rho2 * xa * xr[b];
            }
            for c in 0..z.ncols() {
                xdz[(a, c)] += xa * zr[c];
            }
        }
    }
    middle += (&xdz * &pf.cov * xdz.transpose()) * rho2;
    let cov = symmetrize(&xtx_inv * middle * &xtx_inv * sigma2);
    Ok(HeckmanFit {
        beta,
        cov,
        probit: pf,
        rho,
        sigma,
        rho_clipped,
        n_selected: n1,
    })
}

pub fn heckman(dm: &DesignMatrix) -> Result<FitResult, EconError> {
    if dm.z.ncols() == 0 {
        return Err(EconError::InvalidSpec("heckman2s needs a selection equation".into()));
    }
    if dm.d.iter().all(|&v| v < 0.5) {
        return Err(EconError::EmptySample("no positive outcomes for the second step".into()));
    }
    let f = heckman_matrix(&dm.y, &dm.x, &dm.names, &dm.d, &dm.z)?;
    let mut names = dm.names.clone();
    names.push(LAMBDA.into());
    let mut warnings = vec![];
    if f.rho_clipped {
        warnings.push(format!("implied rho outside [-1, 1]; truncated to {}", f.rho));
    }
    Ok(FitResult {
        estimator: Estimator::Heckman2s,
        main: CoefBlock::new(dm.dependent.clone(), names, f.beta, f.cov),
        n_obs: dm.n_obs(),
        loglik: None,
        iterations: Some(f.probit.iterations),
        extras: Extras::Heckman {
            selection: CoefBlock::new(SELECTION_EQUATION, dm.z_names.clone(), f.probit.gamma, f.probit.cov),
            rho: f.rho,
            sigma: f.sigma,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::normal::{cdf, pdf};
    use crate::econ::testutil::Rng;
    use approx::assert_relative_eq;

    fn data(n: usize) -> (DVector<f64>, DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
        let mut rng = Rng::new(7);
        let a = rng.normals(n);
        let b = rng.normals(n);
        let e1 = rng.normals(n);
        let e2 = rng.normals(n);
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { a[i] } else { 1.0 });
        let z = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => a[i],
            1 => b[i],
            _ => 1.0,
        });
        let rho = 0.6;
        let mut y = DVector::zeros(n);
        let mut d = DVector::zeros(n);
        for i in 0..n {
            let u = e1[i];
            let eps = rho * u + (1.0 - rho * rho).sqrt() * e2[i];
            if 0.3 + 0.5 * a[i] + 1.0 * b[i] + u > 0.0 {
                d[i] = 1.0;
                y[i] = 1.0 + 2.0 * a[i] + eps;
            }
        }
        (y, x, d, z)
    }

    #[test]
    fn covariance_matches_explicit_matrix_form() {
        let (y, x, d, z) = data(400);
        let names = vec!["a".to_string(), "_cons".to_string()];
        let f = heckman_matrix(&y, &x, &names, &d, &z).unwrap();

        // rebuild with dense diagonal matrices, independently of the loop
        let sel: Vec<usize> = (0..400).filter(|&i| d[i] > 0.5).collect();
        let n1 = sel.len();
        let idx = &z * &f.probit.gamma;
        let lam: Vec<f64> = sel.iter().map(|&i| pdf(idx[i]) / cdf(idx[i])).collect();
        let xs = DMatrix::from_fn(n1, 3, |r, c| if c < 2 { x[(sel[r], c)] } else { lam[r] });
        let zs = DMatrix::from_fn(n1, 3, |r, c| z[(sel[r], c)]);
        let delta = DMatrix::from_diagonal(&DVector::from_fn(n1, |r, _| lam[r] * (lam[r] + idx[sel[r]])));
        let ys = DVector::from_fn(n1, |r, _| y[sel[r]]);
        let xtx_inv = (xs.transpose() * &xs).try_inverse().unwrap();
        let b = &xtx_inv * xs.transpose() * &ys;
        for k in 0..3 {
            assert_relative_eq!(b[k], f.beta[k], epsilon = 1e-10);
        }
        let e = &ys - &xs * &b;
        let s2 = e.norm_squared() / n1 as f64 + b[2] * b[2] * delta.trace() / n1 as f64;
        let rho = (b[2] / s2.sqrt()).clamp(-1.0, 1.0);
        let i_minus = DMatrix::identity(n1, n1) - &delta * (rho * rho);
        let q = (xs.transpose() * &delta * &zs) * &f.probit.cov * (zs.transpose() * &delta * &xs) * (rho * rho);
        let v = &xtx_inv * (xs.transpose() * i_minus * &xs + q) * &xtx_inv * s2;
        for k in 0..9 {
            assert_relative_eq!(v[k], f.cov[k], max_relative = 1e-9);
        }
        assert_relative_eq!(f.rho, rho, epsilon = 1e-12);
    }

    #[test]
    fn recovers_parameters_with_exclusion_restriction() {
        let (y, x, d, z) = data(20_000);
        let names = vec!["a".to_string(), "_cons".to_string()];
        let f = heckman_matrix(&y, &x, &names, &d, &z).unwrap();
        assert!((f.beta[0] - 2.0).abs() < 0.05, "{}", f.beta[0]);
        assert!((f.beta[1] - 1.0).abs() < 0.05, "{}", f.beta[1]);
        assert!((f.beta[2] - 0.6).abs() < 0.1, "lambda {}", f.beta[2]);
        assert!((f.probit.gamma[1] - 1.0).abs() < 0.05);
    }
}
