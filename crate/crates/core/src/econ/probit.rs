use nalgebra::{DMatrix, DVector};

use super::linalg::{max_abs, spd_inverse, weighted_gram, xt_vec};
use super::normal::{inverse_mills, ln_cdf};
use super::EconError;

pub const MAX_ITER: usize = 100;
pub const GRAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ProbitFit {
    pub gamma: DVector<f64>,
    /// Inverse of the negative Hessian at the optimum.
    pub cov: DMatrix<f64>,
    pub loglik: f64,
    pub iterations: usize,
}

pub fn loglik(d: &DVector<f64>, z: &DMatrix<f64>, gamma: &DVector<f64>) -> f64 {
    let idx = z * gamma;
    d.iter()
        .zip(idx.iter())
        .map(|(&di, &v)| if di > 0.5 { ln_cdf(v) } else { ln_cdf(-v) })
        .sum()
}

/// Score and Hessian weights. With `q = 2d - 1` and `v = q z'g`, the score
/// contribution is `q lambda(v) z` and the negative Hessian weight is
/// `lambda(v) (lambda(v) + v)`.
fn score_weights(d: &DVector<f64>, z: &DMatrix<f64>, gamma: &DVector<f64>) -> (Vec<f64>, Vec<f64>) {
    let idx = z * gamma;
    let mut s = Vec::with_capacity(d.len());
    let mut w = Vec::with_capacity(d.len());
    for (&di, &xb) in d.iter().zip(idx.iter()) {
        let q = if di > 0.5 { 1.0 } else { -1.0 };
        let v = q * xb;
        let lam = inverse_mills(v);
        s.push(q * lam);
        w.push(lam * (lam + v));
    }
    (s, w)
}

/// Analytic score of [`loglik`].
pub fn gradient(d: &DVector<f64>, z: &DMatrix<f64>, gamma: &DVector<f64>) -> DVector<f64> {
    xt_vec(z, &score_weights(d, z, gamma).0)
}

/// Probit maximum likelihood by Newton-Raphson with step halving, started
/// at zero.
pub fn probit(d: &DVector<f64>, z: &DMatrix<f64>) -> Result<ProbitFit, EconError> {
    let (n, k) = z.shape();
    if n == 0 {
        return Err(EconError::EmptySample("probit has no observations".into()));
    }
    let ones = d.iter().filter(|&&v| v > 0.5).count();
    if ones == 0 || ones == n {
        return Err(EconError::ZeroVariance(
            "selection indicator (all outcomes are on one side)".into(),
        ));
    }
    let mut gamma = DVector::zeros(k);
    let mut ll = loglik(d, z, &gamma);
    let mut last_change = f64::INFINITY;
    for iter in 1..=MAX_ITER {
        let (s, w) = score_weights(d, z, &gamma);
        let grad = xt_vec(z, &s);
        let info = weighted_gram(z, &w);
        if max_abs(&grad) < GRAD_TOL {
            return finish(gamma, &info, ll, iter - 1);
        }
        let info_inv = spd_inverse(&info).ok_or(EconError::Singular("probit information matrix"))?;
        let step = &info_inv * &grad;
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand = &gamma + &step * t;
            let cand_ll = loglik(d, z, &cand);
            if cand_ll.is_finite() && cand_ll >= ll {
                last_change = max_abs(&(&cand - &gamma));
                gamma = cand;
                ll = cand_ll;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        let idx_max = max_abs(&(z * &gamma));
        if idx_max > 30.0 {
            return Err(EconError::Separation(format!(
                "probit index reached {idx_max:.1}: the selection outcome is (quasi-)perfectly predicted"
            )));
        }
        // Once the likelihood cannot improve in floating point, the
        // remaining gradient is rounding noise.
        if !improved || last_change < 1e-14 * (1.0 + max_abs(&gamma)) {
            let (_, w) = score_weights(d, z, &gamma);
            return finish(gamma, &weighted_gram(z, &w), ll, iter);
        }
    }
    Err(EconError::NotConverged {
        estimator: "probit",
        iterations: MAX_ITER,
        last_change,
    })
}

fn finish(gamma: DVector<f64>, info: &DMatrix<f64>, ll: f64, iterations: usize) -> Result<ProbitFit, EconError> {
    let cov = spd_inverse(info).ok_or(EconError::Singular("probit information matrix"))?;
    Ok(ProbitFit {
        gamma,
        cov,
        loglik: ll,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::normal::quantile;
    use approx::assert_relative_eq;

    #[test]
    fn saturated_dummy_model_matches_group_shares() {
        // z = [dummy, 1]; MLE has Phi(g1 + g0) = share in group 1 and
        // Phi(g0) = share in group 0.
        let mut rows = Vec::new();
        let mut ds = Vec::new();
        for i in 0..40 {
            rows.push((0.0, 1.0));
            ds.push(if i < 10 { 1.0 } else { 0.0 });
        }
        for i in 0..30 {
            rows.push((1.0, 1.0));
            ds.push(if i < 21 { 1.0 } else { 0.0 });
        }
        let z = DMatrix::from_fn(rows.len(), 2, |i, j| if j == 0 { rows[i].0 } else { rows[i].1 });
        let d = DVector::from_vec(ds);
        let f = probit(&d, &z).unwrap();
        let g0 = quantile(0.25);
        let g1 = quantile(0.7) - g0;
        assert_relative_eq!(f.gamma[1], g0, epsilon = 1e-9);
        assert_relative_eq!(f.gamma[0], g1, epsilon = 1e-9);
    }

    #[test]
    fn gradient_vanishes_and_matches_finite_difference_hessian() {
        let n = 200;
        let z = DMatrix::from_fn(n, 2, |i, j| if j == 0 { ((i * 37 % 101) as f64) / 50.0 - 1.0 } else { 1.0 });
        let d = DVector::from_fn(n, |i, _| if (i * 53 % 7) as f64 / 7.0 < 0.5 + 0.3 * z[(i, 0)] { 1.0 } else { 0.0 });
        let f = probit(&d, &z).unwrap();
        let h = 1e-5;
        for a in 0..2 {
            let mut up = f.gamma.clone();
            up[a] += h;
            let mut dn = f.gamma.clone();
            dn[a] -= h;
            let g = (loglik(&d, &z, &up) - loglik(&d, &z, &dn)) / (2.0 * h);
            assert!(g.abs() < 1e-5, "gradient {g}");
        }
        // numerical negative Hessian, inverted, against the reported cov
        let mut hess = DMatrix::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                let f2 = |da: f64, db: f64| {
                    let mut g = f.gamma.clone();
                    g[a] += da;
                    g[b] += db;
                    loglik(&d, &z, &g)
                };
                let hh = 1e-4;
                hess[(a, b)] = -(f2(hh, hh) - f2(hh, -hh) - f2(-hh, hh) + f2(-hh, -hh)) / (4.0 * hh * hh);
            }
        }
        let cov = hess.try_inverse().unwrap();
        for i in 0..4 {
            assert_relative_eq!(cov[i], f.cov[i], max_relative = 1e-4);
        }
    }

    #[test]
    fn perfect_prediction_is_reported() {
        let z = DMatrix::from_fn(20, 2, |i, j| if j == 0 { i as f64 } else { 1.0 });
        let d = DVector::from_fn(20, |i, _| if i >= 10 { 1.0 } else { 0.0 });
        assert!(matches!(probit(&d, &z), Err(EconError::Separation(_))));
        let d1 = DVector::from_element(20, 1.0);
        assert!(matches!(probit(&d1, &z), Err(EconError::ZeroVariance(_))));
    }
}
