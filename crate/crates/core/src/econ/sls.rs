//! Two- and three-stage least squares for systems of simultaneous
//! equations, and the reduced form.

use nalgebra::{DMatrix, DVector};

use super::design::SystemDesign;
use super::fit::{CoefBlock, Estimator, Extras, FitResult};
use super::linalg::{lstsq, symmetrize};
use super::ols::ols_matrix;
use super::EconError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaMode {
    /// `E'E / n` from the 2SLS residuals.
    #[default]
    Estimated,
    /// Identity cross-equation covariance (stacked 2SLS).
    Identity,
}

/// Projects the columns of `x` onto the column space of `w`.
pub fn project(w: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>, EconError> {
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for c in 0..x.ncols() {
        let col = x.column(c).into_owned();
        let (coef, _) = lstsq(w, &col)?;
        out.set_column(c, &(w * coef));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TwoSls {
    pub beta: DVector<f64>,
    /// `s^2 (X_hat' X_hat)^{-1}` with `s^2 = e'e / n`.
    pub cov: DMatrix<f64>,
    /// Structural residuals `y - X b` (with the actual regressors).
    pub resid: DVector<f64>,
    pub x_hat: DMatrix<f64>,
}

pub fn two_sls(y: &DVector<f64>, x: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<TwoSls, EconError> {
    let x_hat = project(w, x)?;
    let (beta, xtx_inv) = lstsq(&x_hat, y)?;
    let resid = y - x * &beta;
    let s2 = resid.norm_squared() / y.len() as f64;
    Ok(TwoSls {
        cov: xtx_inv * s2,
        beta,
        resid,
        x_hat,
    })
}

pub fn three_sls(sd: &SystemDesign, mode: SigmaMode) -> Result<FitResult, EconError> {
    let m = sd.xs.len();
    let n = sd.n_obs();
    let stage2: Vec<TwoSls> = (0..m)
        .map(|e| two_sls(&sd.ys[e], &sd.xs[e], &sd.instruments))
        .collect::<Result<_, _>>()?;
    let sigma = match mode {
        SigmaMode::Estimated => {
            let e = DMatrix::from_fn(n, m, |i, j| stage2[j].resid[i]);
            (e.transpose() * &e) / n as f64
        }
        SigmaMode::Identity => DMatrix::identity(m, m),
    };
    let sigma_inv = sigma
        .clone()
        .try_inverse()
        .ok_or(EconError::Singular("cross-equation residual covariance"))?;

    let sizes: Vec<usize> = sd.xs.iter().map(|x| x.ncols()).collect();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &k| {
            let o = *acc;
            *acc += k;
            Some(o)
        })
        .collect();
    let total: usize = sizes.iter().sum();
    let mut lhs = DMatrix::zeros(total, total);
    let mut rhs = DVector::zeros(total);
    for a in 0..m {
        let xa_t = stage2[a].x_hat.transpose();
        for b in 0..m {
            let s = sigma_inv[(a, b)];
            let block = &xa_t * &stage2[b].x_hat * s;
            lhs.view_mut((offsets[a], offsets[b]), (sizes[a], sizes[b])).copy_from(&block);
            let r = &xa_t * &sd.ys[b] * s;
            let mut seg = rhs.rows_mut(offsets[a], sizes[a]);
            seg += r;
        }
    }
    let cov = symmetrize(
        lhs.clone()
            .try_inverse()
            .ok_or(EconError::Singular("3SLS normal equations"))?,
    );
    let beta = &cov * rhs;

    let mut names = Vec::with_capacity(total);
    let mut blocks = Vec::with_capacity(m);
    for e in 0..m {
        for t in &sd.x_names[e] {
            names.push(format!("{}:{}", sd.equations[e], t));
        }
        blocks.push(CoefBlock::new(
            sd.equations[e].clone(),
            sd.x_names[e].clone(),
            beta.rows(offsets[e], sizes[e]).into_owned(),
            cov.view((offsets[e], offsets[e]), (sizes[e], sizes[e])).into_owned(),
        ));
    }
    Ok(FitResult {
        estimator: Estimator::ThreeSls,
        main: CoefBlock::new("system", names, beta, cov),
        n_obs: n,
        loglik: None,
        iterations: None,
        extras: Extras::System {
            equations: blocks,
            sigma,
        },
        warnings: vec![],
    })
}

/// Each endogenous variable regressed by OLS on all exogenous variables.
pub fn reduced_form(sd: &SystemDesign) -> Result<FitResult, EconError> {
    let n = sd.n_obs();
    let m = sd.endogenous.ncols();
    let mut blocks = Vec::with_capacity(m);
    let mut resid = DMatrix::zeros(n, m);
    for e in 0..m {
        let y = sd.endogenous.column(e).into_owned();
        let f = ols_matrix(&y, &sd.instruments)?;
        resid.set_column(e, &f.resid);
        blocks.push(CoefBlock::new(
            sd.endogenous_names[e].clone(),
            sd.instrument_names.clone(),
            f.beta,
            f.cov,
        ));
    }
    let k = sd.instruments.ncols();
    let total = k * m;
    let mut names = Vec::with_capacity(total);
    let mut beta = DVector::zeros(total);
    let mut cov = DMatrix::zeros(total, total);
    for (e, b) in blocks.iter().enumerate() {
        for t in &b.names {
            names.push(format!("{}:{}", b.equation, t));
        }
        beta.rows_mut(e * k, k).copy_from(&b.coef);
        cov.view_mut((e * k, e * k), (k, k)).copy_from(&b.cov);
    }
    Ok(FitResult {
        estimator: Estimator::ReducedForm,
        main: CoefBlock::new("system", names, beta, cov),
        n_obs: n,
        loglik: None,
        iterations: None,
        extras: Extras::System {
            equations: blocks,
            sigma: (resid.transpose() * &resid) / n as f64,
        },
        warnings: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::design::DropCounts;
    use crate::econ::testutil::Rng;
    use approx::assert_relative_eq;

    /// Two equations: y1 = 1 + 0.5 y2 + 1.0 x1 + e1, y2 = -1 + 0.3 y1 + 0.8 x2 + e2.
    fn system(n: usize) -> SystemDesign {
        let mut rng = Rng::new(21);
        let x1 = rng.normals(n);
        let x2 = rng.normals(n);
        let mut y1 = vec![0.0; n];
        let mut y2 = vec![0.0; n];
        for i in 0..n {
            let e1 = rng.normal();
            let e2 = 0.5 * e1 + rng.normal();
            // solve the 2x2 structural system
            let (a, b) = (0.5, 0.3);
            let c1 = 1.0 + x1[i] + e1;
            let c2 = -1.0 + 0.8 * x2[i] + e2;
            y1[i] = (c1 + a * c2) / (1.0 - a * b);
            y2[i] = c2 + b * y1[i];
        }
        let w = DMatrix::from_fn(n, 3, |i, j| [x1[i], x2[i], 1.0][j]);
        let xa = DMatrix::from_fn(n, 3, |i, j| [y2[i], x1[i], 1.0][j]);
        let xb = DMatrix::from_fn(n, 3, |i, j| [y1[i], x2[i], 1.0][j]);
        SystemDesign {
            equations: vec!["y1".into(), "y2".into()],
            ys: vec![DVector::from_vec(y1.clone()), DVector::from_vec(y2.clone())],
            xs: vec![xa, xb],
            x_names: vec![
                vec!["y2".into(), "x1".into(), "_cons".into()],
                vec!["y1".into(), "x2".into(), "_cons".into()],
            ],
            instruments: w,
            instrument_names: vec!["x1".into(), "x2".into(), "_cons".into()],
            endogenous: DMatrix::from_fn(n, 2, |i, j| if j == 0 { y1[i] } else { y2[i] }),
            endogenous_names: vec!["y1".into(), "y2".into()],
            row_keys: vec![],
            dropped: DropCounts::default(),
        }
    }

    #[test]
    fn matches_kronecker_gls_formula() {
        let sd = system(150);
        let fit = three_sls(&sd, SigmaMode::Estimated).unwrap();
        let Extras::System { sigma, .. } = &fit.extras else { panic!() };
        // Oracle: beta = [X_hat'(S^-1 (x) I)X_hat]^-1 X_hat'(S^-1 (x) I) y
        // with block-diagonal X_hat.
        let n = sd.n_obs();
        let w = &sd.instruments;
        let p = w * (w.transpose() * w).try_inverse().unwrap() * w.transpose();
        let xh = [&p * &sd.xs[0], &p * &sd.xs[1]];
        let mut big_x = DMatrix::zeros(2 * n, 6);
        big_x.view_mut((0, 0), (n, 3)).copy_from(&xh[0]);
        big_x.view_mut((n, 3), (n, 3)).copy_from(&xh[1]);
        let mut y = DVector::zeros(2 * n);
        y.rows_mut(0, n).copy_from(&sd.ys[0]);
        y.rows_mut(n, n).copy_from(&sd.ys[1]);
        let omega_inv = sigma.clone().try_inverse().unwrap().kronecker(&DMatrix::identity(n, n));
        let v = (big_x.transpose() * &omega_inv * &big_x).try_inverse().unwrap();
        let b = &v * big_x.transpose() * &omega_inv * y;
        for k in 0..6 {
            assert_relative_eq!(b[k], fit.main.coef[k], epsilon = 1e-9);
            for l in 0..6 {
                assert_relative_eq!(v[(k, l)], fit.main.cov[(k, l)], epsilon = 1e-10, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn consistent_in_large_samples() {
        let fit = three_sls(&system(20_000), SigmaMode::Estimated).unwrap();
        let c = &fit.main;
        assert!((c.coef_of("y1:y2").unwrap() - 0.5).abs() < 0.05);
        assert!((c.coef_of("y2:y1").unwrap() - 0.3).abs() < 0.05);
        assert!((c.coef_of("y1:x1").unwrap() - 1.0).abs() < 0.05);
        assert!((c.coef_of("y2:x2").unwrap() - 0.8).abs() < 0.05);
    }

    #[test]
    fn identity_sigma_equals_per_equation_2sls() {
        let sd = system(200);
        let fit = three_sls(&sd, SigmaMode::Identity).unwrap();
        for e in 0..2 {
            let t = two_sls(&sd.ys[e], &sd.xs[e], &sd.instruments).unwrap();
            for k in 0..3 {
                assert_relative_eq!(fit.main.coef[3 * e + k], t.beta[k], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn reduced_form_is_ols_on_instruments() {
        let sd = system(200);
        let fit = reduced_form(&sd).unwrap();
        let y1 = sd.endogenous.column(0).into_owned();
        let w = &sd.instruments;
        let b = (w.transpose() * w).try_inverse().unwrap() * w.transpose() * y1;
        for k in 0..3 {
            assert_relative_eq!(fit.main.coef[k], b[k], epsilon = 1e-10);
        }
    }
}
