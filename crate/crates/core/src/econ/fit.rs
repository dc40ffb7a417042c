//! Estimator output and its machine/human renderings.

use std::fmt::Write as _;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use super::normal::two_sided_p;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Ols,
    Probit,
    Heckman2s,
    Ppml,
    Zippml,
    TwoSls,
    ThreeSls,
    ReducedForm,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Ols => "ols",
            Estimator::Probit => "probit",
            Estimator::Heckman2s => "heckman2s",
            Estimator::Ppml => "ppml",
            Estimator::Zippml => "zippml",
            Estimator::TwoSls => "2sls",
            Estimator::ThreeSls => "threesls",
            Estimator::ReducedForm => "reduced_form",
        }
    }
}

/// Significance stars: `***` p<0.01, `**` p<0.05, `*` p<0.1.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

/// A named coefficient vector with its covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefBlock {
    pub equation: String,
    pub names: Vec<String>,
    pub coef: DVector<f64>,
    pub cov: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefRow {
    pub term: String,
    pub coef: f64,
    pub se: f64,
    pub z: f64,
    pub p: f64,
    pub stars: &'static str,
}

impl CoefBlock {
    pub fn new(equation: impl Into<String>, names: Vec<String>, coef: DVector<f64>, cov: DMatrix<f64>) -> Self {
        debug_assert_eq!(names.len(), coef.len());
        Self {
            equation: equation.into(),
            names,
            coef,
            cov,
        }
    }

    pub fn se(&self) -> DVector<f64> {
        self.cov.diagonal().map(|v| v.max(0.0).sqrt())
    }

    pub fn rows(&self) -> Vec<CoefRow> {
        let se = self.se();
        self.names
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let z = self.coef[k] / se[k];
                let p = two_sided_p(z);
                CoefRow {
                    term: name.clone(),
                    coef: self.coef[k],
                    se: se[k],
                    z,
                    p,
                    stars: stars(p),
                }
            })
            .collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coef_of(&self, name: &str) -> Option<f64> {
        self.position(name).map(|k| self.coef[k])
    }

    pub fn se_of(&self, name: &str) -> Option<f64> {
        self.position(name).map(|k| self.cov[(k, k)].max(0.0).sqrt())
    }

    pub fn z_of(&self, name: &str) -> Option<f64> {
        Some(self.coef_of(name)? / self.se_of(name)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extras {
    None,
    Heckman {
        /// First-stage probit coefficients.
        selection: CoefBlock,
        /// Implied error correlation and outcome-error sd.
        rho: f64,
        sigma: f64,
    },
    Zip {
        /// Logit coefficients of the zero-inflation probability.
        inflation: CoefBlock,
    },
    System {
        equations: Vec<CoefBlock>,
        /// Cross-equation residual covariance.
        sigma: DMatrix<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub estimator: Estimator,
    /// Main coefficient block (for systems: all equations stacked, terms
    /// prefixed `equation:`).
    pub main: CoefBlock,
    pub n_obs: usize,
    pub loglik: Option<f64>,
    pub iterations: Option<usize>,
    pub extras: Extras,
    pub warnings: Vec<String>,
}

pub const LAMBDA: &str = "lambda";
pub const INTERCEPT: &str = "_cons";

impl FitResult {
    pub fn names(&self) -> &[String] {
        &self.main.names
    }

    pub fn coef(&self) -> &DVector<f64> {
        &self.main.coef
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.main.cov
    }

    pub fn se(&self) -> DVector<f64> {
        self.main.se()
    }

    pub fn coef_of(&self, name: &str) -> Option<f64> {
        self.main.coef_of(name)
    }

    pub fn se_of(&self, name: &str) -> Option<f64> {
        self.main.se_of(name)
    }

    pub fn z_of(&self, name: &str) -> Option<f64> {
        self.main.z_of(name)
    }

    /// Blocks in display order.
    pub fn blocks(&self) -> Vec<&CoefBlock> {
        match &self.extras {
            Extras::None => vec![&self.main],
            Extras::Heckman { selection, .. } => vec![&self.main, selection],
            Extras::Zip { inflation } => vec![&self.main, inflation],
            Extras::System { equations, .. } => equations.iter().collect(),
        }
    }

    /// Machine CSV: `equation,term,coef,se,z,p,stars`, then an `N` row.
    /// Numbers use the shortest round-trip representation.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["equation", "term", "coef", "se", "z", "p", "stars"])?;
        for block in self.blocks() {
            for row in block.rows() {
                w.write_record([
                    block.equation.as_str(),
                    row.term.as_str(),
                    &row.coef.to_string(),
                    &row.se.to_string(),
                    &row.z.to_string(),
                    &row.p.to_string(),
                    row.stars,
                ])?;
            }
        }
        w.write_record(["", "N", &self.n_obs.to_string(), "", "", "", ""])?;
        w.flush()
    }

    /// Fixed-width table: coefficient with stars, standard error in
    /// parentheses underneath, `N` last. The outcome equation's `lambda`
    /// row is shown after the selection block.
    pub fn render_table(&self) -> String {
        const LABEL: usize = 28;
        const CELL: usize = 20;
        let rule = "-".repeat(LABEL + CELL);
        let mut out = String::new();
        let _ = writeln!(out, "{:<LABEL$}{:>CELL$}", "", self.estimator.as_str());
        let _ = writeln!(out, "{rule}");
        let mut lambda_row = None;
        for block in self.blocks() {
            let _ = writeln!(out, "{} (Dep. Var.)", block.equation);
            for row in block.rows() {
                if row.term == LAMBDA && lambda_row.is_none() && matches!(self.extras, Extras::Heckman { .. }) {
                    lambda_row = Some(row);
                    continue;
                }
                push_row(&mut out, &row, LABEL, CELL);
            }
            if !matches!(self.extras, Extras::Heckman { .. }) || block.equation != self.main.equation {
                let _ = writeln!(out, "{rule}");
            }
        }
        if let Some(row) = lambda_row {
            push_row(&mut out, &row, LABEL, CELL);
            let _ = writeln!(out, "{rule}");
        }
        let _ = writeln!(out, "{:<LABEL$}{:>CELL$}", "N", self.n_obs);
        let _ = writeln!(out, "{rule}");
        let _ = writeln!(out, "Standard errors in parentheses; * p<0.1, ** p<0.05, *** p<0.01");
        out
    }
}

fn display_term(term: &str) -> &str {
    if term == INTERCEPT {
        "Cons."
    } else {
        term
    }
}

fn push_row(out: &mut String, row: &CoefRow, label: usize, cell: usize) {
    let coef = format!("{} {:<3}", fmt_sig(row.coef, 6), row.stars);
    let se = format!("({})    ", fmt_sig(row.se, 6));
    let _ = writeln!(out, "{:<label$}{:>cell$}", display_term(&row.term), coef);
    let _ = writeln!(out, "{:<label$}{:>cell$}", "", se);
}

/// Formats with `digits` significant digits, fixed notation for moderate
/// magnitudes and exponent notation otherwise.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can bump the magnitude (9.9999996 -> 10.00000)
        let bumped = s.parse::<f64>().map_or(false, |v| v.abs() >= 10f64.powi(exp + 1));
        if bumped && decimals > 0 {
            format!("{x:.*}", decimals - 1)
        } else {
            s
        }
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.0099), "***");
        assert_eq!(stars(0.01), "**");
        assert_eq!(stars(0.0499), "**");
        assert_eq!(stars(0.05), "*");
        assert_eq!(stars(0.0999), "*");
        assert_eq!(stars(0.1), "");
        assert_eq!(stars(0.7), "");
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.103123456, 6), "0.103123");
        assert_eq!(fmt_sig(-13.6670001, 6), "-13.6670");
        assert_eq!(fmt_sig(29516.0, 6), "29516.0");
        assert_eq!(fmt_sig(9.9999996, 6), "10.0000");
        assert_eq!(fmt_sig(1.5e-7, 6), "1.50000e-7");
        assert_eq!(fmt_sig(0.0, 6), "0.00000");
    }

    fn sample() -> FitResult {
        let main = CoefBlock::new(
            "ln_trade",
            vec!["ln_cc".into(), LAMBDA.into(), INTERCEPT.into()],
            DVector::from_vec(vec![0.1, 1.5, -13.0]),
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.0001, 0.81, 1.0])),
        );
        let selection = CoefBlock::new(
            "trade_dummy",
            vec!["ln_dist".into(), INTERCEPT.into()],
            DVector::from_vec(vec![-0.4, 3.5]),
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.0001, 0.01])),
        );
        FitResult {
            estimator: Estimator::Heckman2s,
            main,
            n_obs: 1234,
            loglik: None,
            iterations: None,
            extras: Extras::Heckman {
                selection,
                rho: 0.5,
                sigma: 3.0,
            },
            warnings: vec![],
        }
    }

    #[test]
    fn table_layout() {
        let t = sample().render_table();
        let lines: Vec<&str> = t.lines().collect();
        let idx = |needle: &str| lines.iter().position(|l| l.starts_with(needle)).unwrap();
        assert!(idx("ln_trade (Dep. Var.)") < idx("trade_dummy (Dep. Var.)"));
        assert!(idx("trade_dummy (Dep. Var.)") < idx("lambda"));
        assert!(idx("lambda") < idx("N "));
        assert!(lines[idx("ln_cc")].contains("0.100000 ***"));
        assert!(lines[idx("ln_cc") + 1].contains("(0.0100000)"));
        assert!(lines[idx("lambda")].contains("1.50000 *"));
        assert!(t.contains("Cons."));
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "equation,term,coef,se,z,p,stars");
        assert_eq!(lines.len(), 1 + 5 + 1);
        assert!(lines[1].starts_with("ln_trade,ln_cc,0.1,0.01,"));
        assert_eq!(*lines.last().unwrap(), ",N,1234,,,,");
    }
}
