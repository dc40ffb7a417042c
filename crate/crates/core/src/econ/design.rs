//! Joins the dyad panel with the measure table and evaluates model terms
//! into design matrices, with listwise deletion.

use nalgebra::{DMatrix, DVector};

use super::fit::INTERCEPT;
use super::linalg::check_full_rank;
use super::spec::{EquationSystem, EstimatorKind, Filter, LogPolicy, ModelSpec, Term, Var};
use super::EconError;
use crate::measures::MeasureTable;
use crate::netcore::{DyadPanel, DyadRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// A network measure is missing (unreachable pair or diff off alpha 1).
    MissingMeasure,
    /// Log of a nonpositive value.
    NonpositiveLog,
    NonFinite,
    Filtered,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DropCounts {
    pub missing_measure: usize,
    pub nonpositive_log: usize,
    pub non_finite: usize,
    pub filtered: usize,
}

impl DropCounts {
    fn add(&mut self, r: DropReason) {
        match r {
            DropReason::MissingMeasure => self.missing_measure += 1,
            DropReason::NonpositiveLog => self.nonpositive_log += 1,
            DropReason::NonFinite => self.non_finite += 1,
            DropReason::Filtered => self.filtered += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.missing_measure + self.nonpositive_log + self.non_finite + self.filtered
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadKey {
    pub origin: String,
    pub dest: String,
    pub sector: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub dependent: String,
    /// Response. For selection models, rows with `d = 0` carry 0 here and
    /// must not be used as outcomes.
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub names: Vec<String>,
    /// Selection indicator: 1 iff trade > 0.
    pub d: DVector<f64>,
    /// Selection / inflation design (intercept last); zero columns when the
    /// estimator has no selection equation.
    pub z: DMatrix<f64>,
    pub z_names: Vec<String>,
    pub row_keys: Vec<DyadKey>,
    pub dropped: DropCounts,
    pub warnings: Vec<String>,
}

impl DesignMatrix {
    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    /// Builds a design directly from matrices (used for simulation and
    /// tests). `d` defaults to `y > 0`.
    pub fn from_parts(y: DVector<f64>, x: DMatrix<f64>, names: Vec<String>) -> Self {
        let n = y.len();
        let d = y.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
        Self {
            dependent: "y".into(),
            y,
            x,
            names,
            d,
            z: DMatrix::zeros(n, 0),
            z_names: vec![],
            row_keys: vec![],
            dropped: DropCounts::default(),
            warnings: vec![],
        }
    }

    pub fn with_selection(mut self, d: DVector<f64>, z: DMatrix<f64>, z_names: Vec<String>) -> Self {
        self.d = d;
        self.z = z;
        self.z_names = z_names;
        self
    }

    pub fn column(&self, name: &str) -> Option<DVector<f64>> {
        self.names.iter().position(|n| n == name).map(|k| self.x.column(k).into_owned())
    }
}

/// Evaluates terms on one panel row.
struct RowContext<'a> {
    measures: &'a MeasureTable,
    policy: LogPolicy,
}

impl RowContext<'_> {
    fn var(&self, r: &DyadRecord, var: &Var) -> Result<f64, DropReason> {
        let idx = || {
            let reg = self.measures.registry();
            match (reg.index_of(&r.origin), reg.index_of(&r.dest)) {
                (Some(i), Some(j)) => Ok((i, j)),
                _ => Err(DropReason::MissingMeasure),
            }
        };
        let v = match var {
            Var::Trade => r.trade,
            Var::Cc => r.cc,
            Var::CcInv => {
                let (i, j) = idx()?;
                self.measures.control().weight(j, i)
            }
            Var::GdpO => r.gdp_o,
            Var::GdpD => r.gdp_d,
            Var::PopO => r.pop_o,
            Var::PopD => r.pop_d,
            Var::Dist => r.dist,
            Var::Contig => r.contig.into(),
            Var::Colony => r.colony.into(),
            Var::Smctry => r.smctry.into(),
            Var::Comlang => r.comlang.into(),
            Var::Rta => r.rta.into(),
            Var::AseanChinaO => r.asean_china_o.into(),
            Var::Sector(label) => f64::from(u8::from(r.sector.as_deref() == Some(label.as_str()))),
            Var::Spl | Var::SplInv | Var::Cmb | Var::Diff | Var::DiffInv => {
                let (i, j) = idx()?;
                let m = self.measures.get(i, j);
                let value = match var {
                    Var::Spl => m.spl,
                    Var::SplInv => m.spl_inv,
                    Var::Cmb => Some(m.cmb),
                    Var::Diff => m.diff,
                    _ => m.diff_inv,
                };
                value.ok_or(DropReason::MissingMeasure)?
            }
        };
        Ok(v)
    }

    fn term(&self, r: &DyadRecord, t: &Term) -> Result<f64, DropReason> {
        let v = match t {
            Term::Raw(v) => self.var(r, v)?,
            Term::Ln(v) => {
                let x = self.var(r, v)?;
                if matches!(v, Var::Cc | Var::CcInv) && self.policy == LogPolicy::Shift1 {
                    x.ln_1p()
                } else if x > 0.0 {
                    x.ln()
                } else {
                    return Err(DropReason::NonpositiveLog);
                }
            }
            Term::Ln1p(v) => {
                let x = self.var(r, v)?;
                if x > -1.0 {
                    x.ln_1p()
                } else {
                    return Err(DropReason::NonpositiveLog);
                }
            }
            Term::Product(a, b) => self.term(r, a)? * self.term(r, b)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DropReason::NonFinite)
        }
    }

    fn terms(&self, r: &DyadRecord, ts: &[Term]) -> Result<Vec<f64>, DropReason> {
        ts.iter().map(|t| self.term(r, t)).collect()
    }
}

/// Evaluates one term on every panel row; `None` where the row would be
/// dropped (missing measure, log of a nonpositive value, non-finite).
pub fn evaluate_term(panel: &DyadPanel, measures: &MeasureTable, term: &Term, policy: LogPolicy) -> Vec<Option<f64>> {
    let ctx = RowContext { measures, policy };
    panel.rows().iter().map(|r| ctx.term(r, term).ok()).collect()
}

fn passes(r: &DyadRecord, filters: &[Filter]) -> bool {
    filters.iter().all(|f| match f {
        Filter::Sector(label) => r.sector.as_deref() == Some(label.as_str()),
        Filter::Equals(var, value) => {
            let v = match var {
                Var::Contig => r.contig,
                Var::Colony => r.colony,
                Var::Smctry => r.smctry,
                Var::Comlang => r.comlang,
                Var::Rta => r.rta,
                Var::AseanChinaO => r.asean_china_o,
                _ => return false,
            };
            f64::from(v) == *value
        }
    })
}

fn key(r: &DyadRecord) -> DyadKey {
    DyadKey {
        origin: r.origin.clone(),
        dest: r.dest.clone(),
        sector: r.sector.clone(),
    }
}

fn is_dummy_like(t: &Term) -> bool {
    match t {
        Term::Raw(v) => v.is_dummy(),
        Term::Product(a, b) => is_dummy_like(a) || is_dummy_like(b),
        _ => false,
    }
}

/// Drops dummy columns (and dummy interactions) that are constant over the
/// sample, returning the kept column indices.
fn degenerate_dummies(rows: &[Vec<f64>], terms: &[Term], warnings: &mut Vec<String>) -> Vec<usize> {
    let mut keep = Vec::new();
    for (k, t) in terms.iter().enumerate() {
        if is_dummy_like(t) && !rows.is_empty() {
            let first = rows[0][k];
            let constant = rows.iter().all(|r| r[k] == first);
            let degenerate = match t {
                Term::Raw(_) => constant,
                _ => constant && first == 0.0,
            };
            if degenerate {
                warnings.push(format!("dropped degenerate dummy `{t}` (constant {first} in sample)"));
                continue;
            }
        }
        keep.push(k);
    }
    keep
}

fn assemble(rows: &[Vec<f64>], keep: &[usize], intercept: bool) -> DMatrix<f64> {
    let k = keep.len() + usize::from(intercept);
    DMatrix::from_fn(rows.len(), k, |i, c| if c < keep.len() { rows[i][keep[c]] } else { 1.0 })
}

fn column_names(terms: &[Term], keep: &[usize], intercept: bool) -> Vec<String> {
    let mut names: Vec<String> = keep.iter().map(|&k| terms[k].to_string()).collect();
    if intercept {
        names.push(INTERCEPT.into());
    }
    names
}

fn check_alpha(measures: &MeasureTable, uses_diff: bool, pinned: Option<f64>) -> Result<(), EconError> {
    if uses_diff && !measures.has_diff() {
        return Err(EconError::AlphaNotOne(measures.alpha()));
    }
    if let Some(a) = pinned {
        if a != measures.alpha() {
            return Err(EconError::InvalidSpec(format!(
                "spec pins alpha = {a} but measures were computed with alpha = {}",
                measures.alpha()
            )));
        }
    }
    Ok(())
}

pub fn build_design(panel: &DyadPanel, measures: &MeasureTable, spec: &ModelSpec) -> Result<DesignMatrix, EconError> {
    spec.validate()?;
    check_alpha(measures, spec.uses_diff(), spec.alpha)?;
    let ctx = RowContext {
        measures,
        policy: spec.log_policy,
    };
    let keeps_zeros = spec.estimator == EstimatorKind::Heckman2s;
    let has_selection = matches!(spec.estimator, EstimatorKind::Heckman2s | EstimatorKind::Zippml);

    let mut dropped = DropCounts::default();
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    let mut ys = Vec::new();
    let mut ds = Vec::new();
    let mut keys = Vec::new();
    for r in panel.rows() {
        if !passes(r, &spec.filters) {
            dropped.add(DropReason::Filtered);
            continue;
        }
        let x = match ctx.terms(r, &spec.regressors) {
            Ok(x) => x,
            Err(e) => {
                dropped.add(e);
                continue;
            }
        };
        let z = if has_selection {
            match ctx.terms(r, &spec.selection) {
                Ok(z) => z,
                Err(e) => {
                    dropped.add(e);
                    continue;
                }
            }
        } else {
            vec![]
        };
        let positive = r.trade > 0.0;
        let y = match ctx.term(r, &spec.dependent) {
            Ok(y) => y,
            Err(_) if keeps_zeros && !positive => 0.0,
            Err(e) => {
                dropped.add(e);
                continue;
            }
        };
        xs.push(x);
        zs.push(z);
        ys.push(y);
        ds.push(if positive { 1.0 } else { 0.0 });
        keys.push(key(r));
    }
    if xs.is_empty() {
        return Err(EconError::EmptySample(format!(
            "no rows left for `{}` after deletion ({} dropped)",
            spec.dependent,
            dropped.total()
        )));
    }
    let mut warnings = Vec::new();
    let keep_x = degenerate_dummies(&xs, &spec.regressors, &mut warnings);
    let x = assemble(&xs, &keep_x, spec.intercept);
    let names = column_names(&spec.regressors, &keep_x, spec.intercept);
    check_full_rank(&x, &names)?;
    let (z, z_names) = if has_selection {
        let keep_z = degenerate_dummies(&zs, &spec.selection, &mut warnings);
        (assemble(&zs, &keep_z, true), column_names(&spec.selection, &keep_z, true))
    } else {
        (DMatrix::zeros(xs.len(), 0), vec![])
    };
    Ok(DesignMatrix {
        dependent: spec.dependent.to_string(),
        y: DVector::from_vec(ys),
        x,
        names,
        d: DVector::from_vec(ds),
        z,
        z_names,
        row_keys: keys,
        dropped,
        warnings,
    })
}

/// Stacked data for a simultaneous-equations fit.
#[derive(Debug, Clone)]
pub struct SystemDesign {
    pub equations: Vec<String>,
    pub ys: Vec<DVector<f64>>,
    pub xs: Vec<DMatrix<f64>>,
    pub x_names: Vec<Vec<String>>,
    /// All exogenous variables plus the intercept.
    pub instruments: DMatrix<f64>,
    pub instrument_names: Vec<String>,
    /// Endogenous variables as columns, named like the equations.
    pub endogenous: DMatrix<f64>,
    pub endogenous_names: Vec<String>,
    pub row_keys: Vec<DyadKey>,
    pub dropped: DropCounts,
}

impl SystemDesign {
    pub fn n_obs(&self) -> usize {
        self.instruments.nrows()
    }
}

pub fn build_system(panel: &DyadPanel, measures: &MeasureTable, system: &EquationSystem) -> Result<SystemDesign, EconError> {
    system.validate()?;
    check_alpha(measures, system.uses_diff(), system.alpha)?;
    let ctx = RowContext {
        measures,
        policy: system.log_policy,
    };
    let exog = system.exogenous();
    let mut all_terms: Vec<Term> = system.endogenous.clone();
    all_terms.extend(exog.iter().cloned());
    let mut dropped = DropCounts::default();
    let mut rows = Vec::new();
    let mut keys = Vec::new();
    for r in panel.rows() {
        if !passes(r, &system.filters) {
            dropped.add(DropReason::Filtered);
            continue;
        }
        match ctx.terms(r, &all_terms) {
            Ok(v) => {
                rows.push(v);
                keys.push(key(r));
            }
            Err(e) => dropped.add(e),
        }
    }
    if rows.is_empty() {
        return Err(EconError::EmptySample("no rows left for the equation system".into()));
    }
    let n = rows.len();
    let col = |t: &Term| all_terms.iter().position(|a| a == t).expect("term collected");
    let n_endog = system.endogenous.len();
    let endogenous = DMatrix::from_fn(n, n_endog, |i, c| rows[i][c]);
    let endogenous_names: Vec<String> = system.endogenous.iter().map(|t| t.to_string()).collect();
    let inst_cols: Vec<usize> = exog.iter().map(col).collect();
    let instruments = assemble(&rows, &inst_cols, true);
    let instrument_names = column_names(&exog, &(0..exog.len()).collect::<Vec<_>>(), true);
    check_full_rank(&instruments, &instrument_names)?;

    let mut ys = Vec::new();
    let mut xs = Vec::new();
    let mut x_names = Vec::new();
    for eq in &system.equations {
        let yc = col(&eq.dependent);
        ys.push(DVector::from_fn(n, |i, _| rows[i][yc]));
        let cols: Vec<usize> = eq.regressors.iter().map(col).collect();
        let x = assemble(&rows, &cols, true);
        let names = column_names(&eq.regressors, &(0..cols.len()).collect::<Vec<_>>(), true);
        check_full_rank(&x, &names)?;
        xs.push(x);
        x_names.push(names);
    }
    Ok(SystemDesign {
        equations: system.equations.iter().map(|e| e.dependent.to_string()).collect(),
        ys,
        xs,
        x_names,
        instruments,
        instrument_names,
        endogenous,
        endogenous_names,
        row_keys: keys,
        dropped,
    })
}
