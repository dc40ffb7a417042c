//! Zero-inflated Poisson pseudo-ML: a logit for the probability of a
//! structural zero and a Poisson count model, fitted by EM.

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use super::design::DesignMatrix;
use super::fit::{CoefBlock, Estimator, Extras, FitResult};
use super::linalg::{lstsq, max_abs, spd_inverse, symmetrize, weighted_gram, xt_vec};
use super::ppml::{check_counts, poisson_irls};
use super::EconError;

pub const EM_MAX_ITER: usize = 500;
pub const EM_TOL: f64 = 1e-8;
pub const INFLATE_EQUATION: &str = "inflate";

#[derive(Debug, Clone)]
pub struct ZipFit {
    pub beta: DVector<f64>,
    pub gamma: DVector<f64>,
    /// Joint covariance of `[beta; gamma]`.
    pub cov: DMatrix<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Full log-likelihood, including the `ln y!` constant.
pub fn loglik(y: &DVector<f64>, x: &DMatrix<f64>, z: &DMatrix<f64>, beta: &DVector<f64>, gamma: &DVector<f64>) -> f64 {
    let eta = x * beta;
    let zeta = z * gamma;
    let mut ll = 0.0;
    for i in 0..y.len() {
        let (e, g) = (eta[i], zeta[i]);
        let ln_pi = -softplus(-g);
        let ln_1m_pi = -softplus(g);
        let mu = e.exp();
        if y[i] == 0.0 {
            // ln(pi + (1 - pi) e^{-mu})
            let a = ln_pi;
            let b = ln_1m_pi - mu;
            let m = a.max(b);
            ll += m + ((a - m).exp() + (b - m).exp()).ln();
        } else {
            ll += ln_1m_pi + y[i] * e - mu - ln_gamma(y[i] + 1.0);
        }
    }
    ll
}

/// Analytic score with respect to `[beta; gamma]`.
pub fn gradient(y: &DVector<f64>, x: &DMatrix<f64>, z: &DMatrix<f64>, beta: &DVector<f64>, gamma: &DVector<f64>) -> DVector<f64> {
    let eta = x * beta;
    let zeta = z * gamma;
    let n = y.len();
    let mut gx = vec![0.0; n];
    let mut gz = vec![0.0; n];
    for i in 0..n {
        let pi = logistic(zeta[i]);
        let mu = eta[i].exp();
        if y[i] == 0.0 {
            let emu = (-mu).exp();
            let p0 = pi + (1.0 - pi) * emu;
            gz[i] = pi * (1.0 - pi) * (1.0 - emu) / p0;
            gx[i] = -(1.0 - pi) * emu * mu / p0;
        } else {
            gz[i] = -pi;
            gx[i] = y[i] - mu;
        }
    }
    let a = xt_vec(x, &gx);
    let b = xt_vec(z, &gz);
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// Logit with fractional responses `tau`, by Newton from `start`.
fn fractional_logit(tau: &[f64], z: &DMatrix<f64>, start: DVector<f64>) -> Result<DVector<f64>, EconError> {
    let obj = |g: &DVector<f64>| -> f64 {
        let zeta = z * g;
        tau.iter().zip(zeta.iter()).map(|(&t, &v)| t * v - softplus(v)).sum()
    };
    let mut g = start;
    let mut f = obj(&g);
    for _ in 0..100 {
        let zeta = z * &g;
        let p: Vec<f64> = zeta.iter().map(|&v| logistic(v)).collect();
        let s: Vec<f64> = tau.iter().zip(&p).map(|(t, p)| t - p).collect();
        let w: Vec<f64> = p.iter().map(|p| (p * (1.0 - p)).max(1e-300)).collect();
        let Some(hinv) = spd_inverse(&weighted_gram(z, &w)) else {
            break;
        };
        let step = hinv * xt_vec(z, &s);
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand = &g + &step * t;
            let cf = obj(&cand);
            if cf.is_finite() && cf >= f {
                g = cand;
                f = cf;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved || max_abs(&step) * t < 1e-10 {
            break;
        }
    }
    Ok(g)
}

/// Negative Hessian by central differences of the analytic score.
fn neg_hessian(y: &DVector<f64>, x: &DMatrix<f64>, z: &DMatrix<f64>, beta: &DVector<f64>, gamma: &DVector<f64>) -> DMatrix<f64> {
    let (kx, kz) = (beta.len(), gamma.len());
    let k = kx + kz;
    let mut theta = DVector::from_iterator(k, beta.iter().chain(gamma.iter()).copied());
    let mut hess = DMatrix::zeros(k, k);
    for j in 0..k {
        let h = 1e-5 * (1.0 + theta[j].abs());
        let orig = theta[j];
        theta[j] = orig + h;
        let gp = gradient(y, x, z, &theta.rows(0, kx).into_owned(), &theta.rows(kx, kz).into_owned());
        theta[j] = orig - h;
        let gm = gradient(y, x, z, &theta.rows(0, kx).into_owned(), &theta.rows(kx, kz).into_owned());
        theta[j] = orig;
        hess.set_column(j, &(-(gp - gm) / (2.0 * h)));
    }
    symmetrize(hess)
}

/// One Newton step with step-halving; `None` unless the likelihood rises.
fn newton_step(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    z: &DMatrix<f64>,
    beta: &DVector<f64>,
    gamma: &DVector<f64>,
    ll: f64,
) -> Option<(DVector<f64>, DVector<f64>, f64)> {
    let (kx, kz) = (beta.len(), gamma.len());
    let hinv = spd_inverse(&neg_hessian(y, x, z, beta, gamma))?;
    let step = hinv * gradient(y, x, z, beta, gamma);
    let mut t = 1.0;
    for _ in 0..30 {
        let b = beta + step.rows(0, kx) * t;
        let g = gamma + step.rows(kx, kz) * t;
        let l = loglik(y, x, z, &b, &g);
        if l.is_finite() && l > ll {
            return Some((b, g, l));
        }
        t *= 0.5;
    }
    None
}

/// ZIP by EM with Newton acceleration on raw matrices. `x` is the count
/// design, `z` the inflation design; both should contain an intercept.
pub fn zip_matrix(y: &DVector<f64>, x: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<ZipFit, EconError> {
    check_counts(y)?;
    let n = y.len();
    if !y.iter().any(|&v| v == 0.0) {
        return Err(EconError::NoZeros);
    }
    let (kx, kz) = (x.ncols(), z.ncols());
    let mut warnings = Vec::new();

    let mut tau: Vec<f64> = y.iter().map(|&v| if v == 0.0 { 0.5 } else { 0.0 }).collect();
    let start = lstsq(x, &y.map(|v| v.ln_1p()))?.0;
    let weights: Vec<f64> = tau.iter().map(|t| 1.0 - t).collect();
    let mut beta = poisson_irls(y, x, Some(&weights), start)?.0;
    let mut gamma = fractional_logit(&tau, z, DVector::zeros(kz))?;
    let mut ll = loglik(y, x, z, &beta, &gamma);
    let mut iterations = 0;
    let mut converged = false;
    let mut change = f64::INFINITY;
    for iter in 1..=EM_MAX_ITER {
        iterations = iter;
        let eta = x * &beta;
        let zeta = z * &gamma;
        for i in 0..n {
            tau[i] = if y[i] == 0.0 {
                let pi = logistic(zeta[i]);
                let p0 = pi + (1.0 - pi) * (-eta[i].exp()).exp();
                pi / p0
            } else {
                0.0
            };
        }
        let weights: Vec<f64> = tau.iter().map(|t| 1.0 - t).collect();
        beta = poisson_irls(y, x, Some(&weights), beta)?.0;
        gamma = fractional_logit(&tau, z, gamma)?;
        let mut new_ll = loglik(y, x, z, &beta, &gamma);
        // EM alone crawls when the likelihood is flat; a guarded Newton step
        // on the joint likelihood finishes the job
        if let Some((b, g, l)) = newton_step(y, x, z, &beta, &gamma, new_ll) {
            beta = b;
            gamma = g;
            new_ll = l;
        }
        change = (new_ll - ll).abs();
        ll = new_ll;
        if change < EM_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(EconError::NotConverged {
            estimator: "zippml",
            iterations,
            last_change: change,
        });
    }
    if max_abs(&(z * &gamma)) > 30.0 {
        warnings.push("inflation probabilities reach 0 or 1; the inflation equation is near a boundary".into());
    }

    let k = kx + kz;
    let cov = match spd_inverse(&neg_hessian(y, x, z, &beta, &gamma)) {
        Some(c) => c,
        None => {
            warnings.push("information matrix is not positive definite; standard errors unavailable".into());
            DMatrix::from_element(k, k, f64::NAN)
        }
    };
    Ok(ZipFit {
        beta,
        gamma,
        cov,
        loglik: ll,
        iterations,
        warnings,
    })
}

pub fn zip_pml(dm: &DesignMatrix) -> Result<FitResult, EconError> {
    if dm.z.ncols() == 0 {
        return Err(EconError::InvalidSpec("zippml needs an inflation equation".into()));
    }
    let f = zip_matrix(&dm.y, &dm.x, &dm.z)?;
    let (kx, kz) = (dm.x.ncols(), dm.z.ncols());
    Ok(FitResult {
        estimator: Estimator::Zippml,
        main: CoefBlock::new(
            dm.dependent.clone(),
            dm.names.clone(),
            f.beta,
            f.cov.view((0, 0), (kx, kx)).into_owned(),
        ),
        n_obs: dm.n_obs(),
        loglik: Some(f.loglik),
        iterations: Some(f.iterations),
        extras: Extras::Zip {
            inflation: CoefBlock::new(
                INFLATE_EQUATION,
                dm.z_names.clone(),
                f.gamma,
                f.cov.view((kx, kx), (kz, kz)).into_owned(),
            ),
        },
        warnings: f.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::testutil::Rng;

    fn data(n: usize, seed: u64) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
        let mut rng = Rng::new(seed);
        let a = rng.normals(n);
        let b = rng.normals(n);
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { a[i] } else { 1.0 });
        let z = DMatrix::from_fn(n, 2, |i, j| if j == 0 { b[i] } else { 1.0 });
        let y = DVector::from_fn(n, |i, _| {
            let pi = logistic(-0.5 + 1.0 * b[i]);
            if rng.uniform() < pi {
                0.0
            } else {
                rng.poisson((1.0 + 0.5 * a[i]).exp())
            }
        });
        (y, x, z)
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let (y, x, z) = data(300, 3);
        let beta = DVector::from_column_slice(&[0.3, 0.7]);
        let gamma = DVector::from_column_slice(&[-0.2, 0.4]);
        let g = gradient(&y, &x, &z, &beta, &gamma);
        let h = 1e-6;
        for j in 0..4 {
            let mut bp = beta.clone();
            let mut gp = gamma.clone();
            let mut bm = beta.clone();
            let mut gm = gamma.clone();
            if j < 2 {
                bp[j] += h;
                bm[j] -= h;
            } else {
                gp[j - 2] += h;
                gm[j - 2] -= h;
            }
            let fd = (loglik(&y, &x, &z, &bp, &gp) - loglik(&y, &x, &z, &bm, &gm)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-5 * (1.0 + fd.abs()), "{j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn recovers_parameters_and_stationary_point() {
        let (y, x, z) = data(8000, 5);
        let f = zip_matrix(&y, &x, &z).unwrap();
        assert!((f.beta[0] - 0.5).abs() < 0.05, "{}", f.beta);
        assert!((f.beta[1] - 1.0).abs() < 0.05, "{}", f.beta);
        assert!((f.gamma[0] - 1.0).abs() < 0.15, "{}", f.gamma);
        assert!((f.gamma[1] + 0.5).abs() < 0.1, "{}", f.gamma);
        let g = gradient(&y, &x, &z, &f.beta, &f.gamma);
        assert!(g.amax() < 1e-2, "{g}");
        assert!(f.cov.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn needs_zeros() {
        let x = DMatrix::from_element(3, 1, 1.0);
        let y = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        assert!(matches!(zip_matrix(&y, &x, &x), Err(EconError::NoZeros)));
    }
}
