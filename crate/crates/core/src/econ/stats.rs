//! Summary statistics, pairwise correlations and the critical-distance
//! diagnostic.

use std::io::Write;

use nalgebra::DMatrix;

use super::design::evaluate_term;
use super::spec::{LogPolicy, Term};
use super::EconError;
use crate::measures::MeasureTable;
use crate::netcore::DyadPanel;

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (divisor `n - 1`); 0 for `n < 2`.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

/// One-pass (Welford) summary over the present values.
pub fn summarize_values(name: &str, values: &[Option<f64>]) -> Summary {
    let mut n = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values.iter().flatten() {
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
        min = min.min(*v);
        max = max.max(*v);
    }
    if n == 0 {
        return Summary {
            name: name.into(),
            n,
            mean: f64::NAN,
            sd: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
        };
    }
    let sd = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { 0.0 };
    Summary {
        name: name.into(),
        n,
        mean,
        // a constant column reports exactly zero
        sd: if min == max { 0.0 } else { sd },
        min,
        max,
    }
}

/// Level variables summarised by default.
pub fn default_summary_terms(measures: &MeasureTable) -> Vec<Term> {
    let mut names = vec!["trade", "cc", "spl", "cmb"];
    if measures.has_diff() {
        names.push("diff");
    }
    names.extend([
        "gdp_o", "gdp_d", "pop_o", "pop_d", "dist", "contig", "colony", "smctry", "comlang", "rta",
    ]);
    names.iter().map(|n| Term::parse(n).expect("known variable")).collect()
}

/// Transformed variables correlated by default.
pub fn default_correlation_terms(measures: &MeasureTable) -> Vec<Term> {
    let mut names = vec!["ln_trade", "ln_cc", "ln_spl", "ln_cmb"];
    if measures.has_diff() {
        names.push("ln_diff");
    }
    names.extend(["ln_dist", "ln_gdp_o", "ln_gdp_d"]);
    names.iter().map(|n| Term::parse(n).expect("known variable")).collect()
}

pub fn summarize(panel: &DyadPanel, measures: &MeasureTable, terms: &[Term]) -> Vec<Summary> {
    terms
        .iter()
        .map(|t| summarize_values(&t.to_string(), &evaluate_term(panel, measures, t, LogPolicy::Shift1)))
        .collect()
}

pub fn write_summary_csv<W: Write>(rows: &[Summary], writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["variable", "n", "mean", "sd", "min", "max"])?;
    for s in rows {
        w.write_record([
            s.name.clone(),
            s.n.to_string(),
            s.mean.to_string(),
            s.sd.to_string(),
            s.min.to_string(),
            s.max.to_string(),
        ])?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correlations {
    pub names: Vec<String>,
    pub matrix: DMatrix<f64>,
    /// Pairwise sample sizes.
    pub counts: DMatrix<usize>,
}

impl Correlations {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.matrix[(i, j)])
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![String::from("variable")];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (i, name) in self.names.iter().enumerate() {
            let mut row = vec![name.clone()];
            row.extend((0..self.names.len()).map(|j| self.matrix[(i, j)].to_string()));
            w.write_record(&row)?;
        }
        w.flush()
    }
}

fn pearson(a: &[Option<f64>], b: &[Option<f64>]) -> (Option<f64>, usize) {
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .collect();
    let n = pairs.len();
    if n < 2 {
        return (None, n);
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return (None, n);
    }
    (Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)), n)
}

/// Pairwise-complete Pearson correlations between named columns.
pub fn correlation_matrix(columns: &[(String, Vec<Option<f64>>)]) -> Result<Correlations, EconError> {
    let k = columns.len();
    if k < 2 {
        return Err(EconError::InvalidSpec("correlations need at least two variables".into()));
    }
    let mut matrix = DMatrix::from_element(k, k, 1.0);
    let mut counts = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let (r, n) = pearson(&columns[i].1, &columns[j].1);
            let r = r.ok_or_else(|| {
                let which = if i == j {
                    columns[i].0.clone()
                } else {
                    format!("{} / {}", columns[i].0, columns[j].0)
                };
                EconError::ZeroVariance(which)
            })?;
            if i != j {
                matrix[(i, j)] = r;
                matrix[(j, i)] = r;
            }
            counts[(i, j)] = n;
            counts[(j, i)] = n;
        }
    }
    Ok(Correlations {
        names: columns.iter().map(|c| c.0.clone()).collect(),
        matrix,
        counts,
    })
}

pub fn correlations(panel: &DyadPanel, measures: &MeasureTable, terms: &[Term]) -> Result<Correlations, EconError> {
    let cols: Vec<(String, Vec<Option<f64>>)> = terms
        .iter()
        .map(|t| (t.to_string(), evaluate_term(panel, measures, t, LogPolicy::Shift1)))
        .collect();
    correlation_matrix(&cols)
}

/// Distance (km) at which the marginal effect `b_main + b_inter ln(dist)`
/// of a network measure changes sign: `exp(-b_main / b_inter)`.
pub fn critical_distance(b_main: f64, b_inter: f64) -> Result<f64, EconError> {
    if b_inter == 0.0 || !b_inter.is_finite() || !b_main.is_finite() {
        return Err(EconError::NoCriticalValue(format!(
            "interaction coefficient is {b_inter}; the marginal effect does not vary with distance"
        )));
    }
    let ln_dist = -b_main / b_inter;
    let d = ln_dist.exp();
    if !d.is_finite() || ln_dist <= 0.0 {
        return Err(EconError::NoCriticalValue(format!(
            "sign change at ln(dist) = {ln_dist}, outside the range of positive distances above 1 km"
        )));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::testutil::Rng;
    use approx::assert_relative_eq;

    #[test]
    fn welford_matches_two_pass() {
        let mut rng = Rng::new(1);
        let v: Vec<Option<f64>> = (0..1000).map(|_| Some(1e3 + rng.normal() * 7.0)).collect();
        let s = summarize_values("v", &v);
        let xs: Vec<f64> = v.iter().flatten().copied().collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert_relative_eq!(s.mean, mean, max_relative = 1e-12);
        assert_relative_eq!(s.sd, var.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn constant_and_dummy_columns() {
        let s = summarize_values("c", &[Some(3.0); 5]);
        assert_eq!(s.sd, 0.0);
        let d = summarize_values("d", &[Some(1.0), Some(0.0), Some(1.0), Some(1.0), None]);
        assert_eq!(d.n, 4);
        assert_eq!(d.mean, 0.75);
    }

    #[test]
    fn correlation_identities() {
        let x: Vec<Option<f64>> = (0..10).map(|i| Some((i * i) as f64)).collect();
        let neg: Vec<Option<f64>> = x.iter().map(|v| v.map(|v| -v)).collect();
        let c = correlation_matrix(&[("x".into(), x.clone()), ("nx".into(), neg), ("x2".into(), x)]).unwrap();
        assert_eq!(c.get("x", "x"), Some(1.0));
        assert_relative_eq!(c.get("x", "nx").unwrap(), -1.0, epsilon = 1e-15);
        assert_relative_eq!(c.get("x", "x2").unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(c.matrix.transpose(), c.matrix);

        let constant = vec![Some(2.0); 10];
        let y: Vec<Option<f64>> = (0..10).map(|i| Some(i as f64)).collect();
        assert!(matches!(
            correlation_matrix(&[("c".into(), constant), ("y".into(), y)]),
            Err(EconError::ZeroVariance(_))
        ));
    }

    #[test]
    fn pairwise_complete_uses_shared_rows() {
        let a = vec![Some(1.0), Some(2.0), None, Some(4.0)];
        let b = vec![Some(2.0), Some(4.0), Some(100.0), Some(8.0)];
        let c = correlation_matrix(&[("a".into(), a), ("b".into(), b)]).unwrap();
        assert_relative_eq!(c.get("a", "b").unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(c.counts[(0, 1)], 3);
    }

    #[test]
    fn critical_distance_values() {
        assert_relative_eq!(critical_distance(1.580, -0.202).unwrap(), (1.580f64 / 0.202).exp(), max_relative = 1e-15);
        assert!(matches!(critical_distance(0.3, 0.0), Err(EconError::NoCriticalValue(_))));
        // positive main and interaction: sign change below 1 km
        assert!(matches!(critical_distance(0.3, 0.1), Err(EconError::NoCriticalValue(_))));
    }
}
