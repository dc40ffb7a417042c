//! Model specifications: terms, single-equation specs and equation systems,
//! read from declarative TOML files.
//!
//! ```toml
//! name = "baseline"
//! estimator = "heckman2s"
//! dependent = "ln_trade"
//! regressors = ["ln_cc", "ln_spl", "ln_dist", "ln_dist:ln_cc"]
//! selection = ["ln_dist"]
//! direction = "same"
//!
//! [filters]
//! sector = "31"
//! ```
//!
//! Term names: a base variable (`contig`, `dist`, `sector_31`, ...),
//! `ln_<var>`, `ln1p_<var>` (log of one plus), or `a:b` for the product of
//! two declared terms. `ln_diff` always means `ln(1 + diff)`; `ln_cc`
//! follows the spec's `log_policy`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Deserialize;

use super::fit::Estimator;
use super::EconError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Trade,
    Cc,
    CcInv,
    GdpO,
    GdpD,
    PopO,
    PopD,
    Dist,
    Contig,
    Colony,
    Smctry,
    Comlang,
    Rta,
    AseanChinaO,
    Spl,
    SplInv,
    Cmb,
    Diff,
    DiffInv,
    /// 1 if the row's sector label equals the string.
    Sector(String),
}

impl Var {
    pub fn parse(name: &str) -> Option<Var> {
        Some(match name {
            "trade" => Var::Trade,
            "cc" => Var::Cc,
            "cc_inv" => Var::CcInv,
            "gdp_o" => Var::GdpO,
            "gdp_d" => Var::GdpD,
            "pop_o" => Var::PopO,
            "pop_d" => Var::PopD,
            "dist" => Var::Dist,
            "contig" => Var::Contig,
            "colony" => Var::Colony,
            "smctry" => Var::Smctry,
            "comlang" => Var::Comlang,
            "rta" => Var::Rta,
            "asean_china_o" | "asean_china" => Var::AseanChinaO,
            "spl" => Var::Spl,
            "spl_inv" => Var::SplInv,
            "cmb" => Var::Cmb,
            "diff" => Var::Diff,
            "diff_inv" => Var::DiffInv,
            other => {
                let label = other.strip_prefix("sector_")?;
                if label.is_empty() {
                    return None;
                }
                Var::Sector(label.to_string())
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            Var::Trade => "trade".into(),
            Var::Cc => "cc".into(),
            Var::CcInv => "cc_inv".into(),
            Var::GdpO => "gdp_o".into(),
            Var::GdpD => "gdp_d".into(),
            Var::PopO => "pop_o".into(),
            Var::PopD => "pop_d".into(),
            Var::Dist => "dist".into(),
            Var::Contig => "contig".into(),
            Var::Colony => "colony".into(),
            Var::Smctry => "smctry".into(),
            Var::Comlang => "comlang".into(),
            Var::Rta => "rta".into(),
            Var::AseanChinaO => "asean_china_o".into(),
            Var::Spl => "spl".into(),
            Var::SplInv => "spl_inv".into(),
            Var::Cmb => "cmb".into(),
            Var::Diff => "diff".into(),
            Var::DiffInv => "diff_inv".into(),
            Var::Sector(s) => format!("sector_{s}"),
        }
    }

    pub fn is_dummy(&self) -> bool {
        matches!(
            self,
            Var::Contig | Var::Colony | Var::Smctry | Var::Comlang | Var::Rta | Var::AseanChinaO | Var::Sector(_)
        )
    }

    /// Whether the variable comes from the network measure table.
    pub fn is_measure(&self) -> bool {
        matches!(self, Var::Spl | Var::SplInv | Var::Cmb | Var::Diff | Var::DiffInv)
    }

    pub fn is_diff(&self) -> bool {
        matches!(self, Var::Diff | Var::DiffInv)
    }

    /// Swap to the opposite-direction control measure (importer controls
    /// exporter). Other variables are unchanged.
    fn inverted(&self) -> Var {
        match self {
            Var::Cc => Var::CcInv,
            Var::Spl => Var::SplInv,
            Var::Diff => Var::DiffInv,
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Raw(Var),
    /// Natural log. For `cc`/`cc_inv` the log policy decides the zero
    /// handling; for `diff`/`diff_inv` parsing already maps to `Ln1p`.
    Ln(Var),
    Ln1p(Var),
    Product(Box<Term>, Box<Term>),
}

impl Term {
    pub fn parse(name: &str) -> Result<Term, EconError> {
        let name = name.trim();
        if let Some((a, b)) = name.split_once(':') {
            if b.contains(':') {
                return Err(EconError::InvalidSpec(format!(
                    "interaction `{name}` must have exactly two factors"
                )));
            }
            return Ok(Term::Product(Box::new(Term::parse(a)?), Box::new(Term::parse(b)?)));
        }
        let unknown = || EconError::UnknownVariable(name.to_string());
        if let Some(rest) = name.strip_prefix("ln1p_") {
            return Ok(Term::Ln1p(Var::parse(rest).ok_or_else(unknown)?));
        }
        if let Some(rest) = name.strip_prefix("ln_") {
            let v = Var::parse(rest).ok_or_else(unknown)?;
            return Ok(if v.is_diff() { Term::Ln1p(v) } else { Term::Ln(v) });
        }
        Ok(Term::Raw(Var::parse(name).ok_or_else(unknown)?))
    }

    pub fn vars(&self) -> Vec<&Var> {
        match self {
            Term::Raw(v) | Term::Ln(v) | Term::Ln1p(v) => vec![v],
            Term::Product(a, b) => {
                let mut out = a.vars();
                out.extend(b.vars());
                out
            }
        }
    }

    pub fn is_dummy(&self) -> bool {
        matches!(self, Term::Raw(v) if v.is_dummy())
    }

    fn directed(&self, direction: Direction) -> Term {
        if direction == Direction::Same {
            return self.clone();
        }
        match self {
            Term::Raw(v) => Term::Raw(v.inverted()),
            Term::Ln(v) => Term::Ln(v.inverted()),
            Term::Ln1p(v) => Term::Ln1p(v.inverted()),
            Term::Product(a, b) => Term::Product(Box::new(a.directed(direction)), Box::new(b.directed(direction))),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Raw(v) => write!(f, "{}", v.name()),
            Term::Ln(v) => write!(f, "ln_{}", v.name()),
            Term::Ln1p(v) if v.is_diff() => write!(f, "ln_{}", v.name()),
            Term::Ln1p(v) => write!(f, "ln1p_{}", v.name()),
            Term::Product(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Same,
    Inverse,
}

/// Zero handling for `ln_cc` / `ln_cc_inv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogPolicy {
    /// `ln(1 + cc)`.
    #[default]
    Shift1,
    /// `ln(cc)`, dropping rows with `cc = 0`.
    DropZeros,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Ols,
    Heckman2s,
    Ppml,
    Zippml,
    Threesls,
    ReducedForm,
}

impl EstimatorKind {
    pub fn is_system(self) -> bool {
        matches!(self, EstimatorKind::Threesls | EstimatorKind::ReducedForm)
    }

    pub fn estimator(self) -> Estimator {
        match self {
            EstimatorKind::Ols => Estimator::Ols,
            EstimatorKind::Heckman2s => Estimator::Heckman2s,
            EstimatorKind::Ppml => Estimator::Ppml,
            EstimatorKind::Zippml => Estimator::Zippml,
            EstimatorKind::Threesls => Estimator::ThreeSls,
            EstimatorKind::ReducedForm => Estimator::ReducedForm,
        }
    }
}

/// Equality filter on a row: `sector = "31"` or `<dummy> = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Filter {
    Sector(String),
    Equals(Var, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub estimator: EstimatorKind,
    pub dependent: Term,
    pub regressors: Vec<Term>,
    /// First-stage (heckman2s) or inflation (zippml) equation, without the
    /// intercept which is always added.
    pub selection: Vec<Term>,
    pub direction: Direction,
    pub log_policy: LogPolicy,
    pub intercept: bool,
    pub filters: Vec<Filter>,
    /// Alpha the spec was written for, if pinned.
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationSpec {
    pub dependent: Term,
    pub regressors: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationSystem {
    pub name: String,
    pub estimator: EstimatorKind,
    pub equations: Vec<EquationSpec>,
    pub endogenous: Vec<Term>,
    pub direction: Direction,
    pub log_policy: LogPolicy,
    pub filters: Vec<Filter>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecFile {
    Single(ModelSpec),
    System(EquationSystem),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEquation {
    dependent: String,
    regressors: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default)]
    name: Option<String>,
    estimator: EstimatorKind,
    #[serde(default)]
    dependent: Option<String>,
    #[serde(default)]
    regressors: Vec<String>,
    #[serde(default)]
    selection: Option<Vec<String>>,
    #[serde(default)]
    direction: Direction,
    #[serde(default)]
    log_policy: LogPolicy,
    #[serde(default)]
    intercept: Option<bool>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    filters: BTreeMap<String, toml::Value>,
    #[serde(default)]
    endogenous: Vec<String>,
    #[serde(default)]
    equation: Vec<RawEquation>,
}

fn parse_terms(names: &[String], direction: Direction) -> Result<Vec<Term>, EconError> {
    names
        .iter()
        .map(|n| Term::parse(n).map(|t| t.directed(direction)))
        .collect()
}

fn parse_filters(raw: &BTreeMap<String, toml::Value>) -> Result<Vec<Filter>, EconError> {
    raw.iter()
        .map(|(k, v)| {
            if k == "sector" {
                let label = match v {
                    toml::Value::String(s) => s.clone(),
                    toml::Value::Integer(i) => i.to_string(),
                    other => return Err(EconError::InvalidSpec(format!("sector filter must be a string, got {other}"))),
                };
                return Ok(Filter::Sector(label));
            }
            let var = Var::parse(k).ok_or_else(|| EconError::UnknownVariable(k.clone()))?;
            let value = match v {
                toml::Value::Integer(i) => *i as f64,
                toml::Value::Float(f) => *f,
                toml::Value::Boolean(b) => f64::from(u8::from(*b)),
                other => return Err(EconError::InvalidSpec(format!("filter `{k}` needs a number, got {other}"))),
            };
            Ok(Filter::Equals(var, value))
        })
        .collect()
}

fn check_unique(terms: &[Term], what: &str) -> Result<(), EconError> {
    let mut seen = BTreeSet::new();
    for t in terms {
        if !seen.insert(t) {
            return Err(EconError::InvalidSpec(format!("duplicate {what} term `{t}`")));
        }
    }
    Ok(())
}

fn check_interactions(terms: &[Term]) -> Result<(), EconError> {
    for t in terms {
        if let Term::Product(a, b) = t {
            for factor in [a.as_ref(), b.as_ref()] {
                if matches!(factor, Term::Product(..)) {
                    return Err(EconError::InvalidSpec(format!("nested interaction in `{t}`")));
                }
                if !terms.contains(factor) {
                    return Err(EconError::InvalidSpec(format!(
                        "interaction `{t}` references `{factor}` which is not a declared regressor"
                    )));
                }
            }
        }
    }
    Ok(())
}

impl ModelSpec {
    /// A spec with the default selection equation (`ln_dist`).
    pub fn new(estimator: EstimatorKind, dependent: &str, regressors: &[&str]) -> Result<Self, EconError> {
        let spec = ModelSpec {
            name: String::new(),
            estimator,
            dependent: Term::parse(dependent)?,
            regressors: regressors.iter().map(|r| Term::parse(r)).collect::<Result<_, _>>()?,
            selection: vec![Term::Ln(Var::Dist)],
            direction: Direction::Same,
            log_policy: LogPolicy::Shift1,
            intercept: true,
            filters: vec![],
            alpha: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_selection(mut self, selection: &[&str]) -> Result<Self, EconError> {
        self.selection = selection.iter().map(|r| Term::parse(r)).collect::<Result<_, _>>()?;
        self.validate()?;
        Ok(self)
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.dependent = self.dependent.directed(direction);
        self.regressors = self.regressors.iter().map(|t| t.directed(direction)).collect();
        self.selection = self.selection.iter().map(|t| t.directed(direction)).collect();
        self.direction = direction;
        self
    }

    pub fn with_log_policy(mut self, policy: LogPolicy) -> Self {
        self.log_policy = policy;
        self
    }

    pub fn with_filter(mut self, filter: Filter) -> Self {
        self.filters.push(filter);
        self
    }

    pub fn validate(&self) -> Result<(), EconError> {
        if self.estimator.is_system() {
            return Err(EconError::InvalidSpec(format!(
                "{} is a system estimator; use an equation system",
                self.estimator.estimator().as_str()
            )));
        }
        check_unique(&self.regressors, "regressor")?;
        check_unique(&self.selection, "selection")?;
        if self.regressors.contains(&self.dependent) {
            return Err(EconError::InvalidSpec(format!(
                "dependent `{}` also appears among the regressors",
                self.dependent
            )));
        }
        check_interactions(&self.regressors)?;
        check_interactions(&self.selection)?;
        Ok(())
    }

    /// All terms the spec reads from the data.
    pub fn uses_diff(&self) -> bool {
        std::iter::once(&self.dependent)
            .chain(&self.regressors)
            .chain(&self.selection)
            .flat_map(|t| t.vars())
            .any(Var::is_diff)
    }
}

impl EquationSystem {
    /// Exogenous variables: every regressor that is not endogenous, in
    /// order of first appearance.
    pub fn exogenous(&self) -> Vec<Term> {
        let mut out: Vec<Term> = Vec::new();
        for eq in &self.equations {
            for t in &eq.regressors {
                if !self.endogenous.contains(t) && !out.contains(t) {
                    out.push(t.clone());
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), EconError> {
        if !self.estimator.is_system() {
            return Err(EconError::InvalidSpec("equation systems need estimator threesls or reduced_form".into()));
        }
        if self.equations.is_empty() {
            return Err(EconError::InvalidSpec("system has no equations".into()));
        }
        check_unique(&self.endogenous, "endogenous")?;
        let exog = self.exogenous();
        for eq in &self.equations {
            check_unique(&eq.regressors, "regressor")?;
            check_interactions(&eq.regressors)?;
            if eq.regressors.contains(&eq.dependent) {
                return Err(EconError::InvalidSpec(format!(
                    "dependent `{}` also appears among its regressors",
                    eq.dependent
                )));
            }
            if !self.endogenous.contains(&eq.dependent) {
                return Err(EconError::InvalidSpec(format!(
                    "dependent `{}` must be declared endogenous",
                    eq.dependent
                )));
            }
            let included_endog = eq.regressors.iter().filter(|t| self.endogenous.contains(t)).count();
            let excluded_exog = exog.iter().filter(|t| !eq.regressors.contains(t)).count();
            if excluded_exog < included_endog {
                return Err(EconError::UnderIdentified {
                    equation: eq.dependent.to_string(),
                    excluded: excluded_exog,
                    endogenous: included_endog,
                });
            }
        }
        Ok(())
    }

    pub fn uses_diff(&self) -> bool {
        self.equations
            .iter()
            .flat_map(|e| std::iter::once(&e.dependent).chain(&e.regressors))
            .flat_map(|t| t.vars())
            .any(Var::is_diff)
    }
}

pub fn parse_spec(text: &str) -> Result<SpecFile, EconError> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| EconError::InvalidSpec(e.to_string()))?;
    let filters = parse_filters(&raw.filters)?;
    let name = raw.name.clone().unwrap_or_default();
    if let Some(a) = raw.alpha {
        if !(a.is_finite() && a >= 0.0) {
            return Err(EconError::InvalidSpec(format!("alpha must be >= 0, got {a}")));
        }
    }
    if raw.estimator.is_system() {
        if raw.equation.is_empty() {
            return Err(EconError::InvalidSpec("system estimators need [[equation]] tables".into()));
        }
        let equations = raw
            .equation
            .iter()
            .map(|e| {
                Ok(EquationSpec {
                    dependent: Term::parse(&e.dependent)?.directed(raw.direction),
                    regressors: parse_terms(&e.regressors, raw.direction)?,
                })
            })
            .collect::<Result<Vec<_>, EconError>>()?;
        let endogenous = if raw.endogenous.is_empty() {
            equations.iter().map(|e| e.dependent.clone()).collect()
        } else {
            parse_terms(&raw.endogenous, raw.direction)?
        };
        let sys = EquationSystem {
            name,
            estimator: raw.estimator,
            equations,
            endogenous,
            direction: raw.direction,
            log_policy: raw.log_policy,
            filters,
            alpha: raw.alpha,
        };
        sys.validate()?;
        return Ok(SpecFile::System(sys));
    }
    if !raw.equation.is_empty() || !raw.endogenous.is_empty() {
        return Err(EconError::InvalidSpec(
            "[[equation]] and endogenous are only valid for threesls / reduced_form".into(),
        ));
    }
    let dependent = raw
        .dependent
        .as_deref()
        .ok_or_else(|| EconError::InvalidSpec("missing `dependent`".into()))?;
    let selection = match &raw.selection {
        Some(s) => parse_terms(s, raw.direction)?,
        None => vec![Term::Ln(Var::Dist)],
    };
    let spec = ModelSpec {
        name,
        estimator: raw.estimator,
        dependent: Term::parse(dependent)?.directed(raw.direction),
        regressors: parse_terms(&raw.regressors, raw.direction)?,
        selection,
        direction: raw.direction,
        log_policy: raw.log_policy,
        intercept: raw.intercept.unwrap_or(true),
        filters,
        alpha: raw.alpha,
    };
    spec.validate()?;
    Ok(SpecFile::Single(spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_names_round_trip() {
        for name in ["ln_cc", "ln1p_cc", "ln_diff", "contig", "sector_31", "ln_dist:ln_cc", "rta:ln_spl_inv"] {
            assert_eq!(Term::parse(name).unwrap().to_string(), name);
        }
        assert_eq!(Term::parse("ln_diff").unwrap(), Term::Ln1p(Var::Diff));
        assert!(matches!(Term::parse("ln_gdp"), Err(EconError::UnknownVariable(_))));
        assert!(Term::parse("a:b:c").is_err());
    }

    #[test]
    fn single_spec_parses() {
        let text = r#"
            name = "t"
            estimator = "heckman2s"
            dependent = "ln_trade"
            regressors = ["ln_cc", "ln_spl", "ln_dist", "ln_dist:ln_cc"]
            direction = "inverse"
            [filters]
            sector = "31"
            rta = 1
        "#;
        let SpecFile::Single(s) = parse_spec(text).unwrap() else { panic!() };
        let names: Vec<String> = s.regressors.iter().map(|t| t.to_string()).collect();
        assert_eq!(names, ["ln_cc_inv", "ln_spl_inv", "ln_dist", "ln_dist:ln_cc_inv"]);
        assert_eq!(s.selection, vec![Term::Ln(Var::Dist)]);
        assert_eq!(s.filters, vec![Filter::Equals(Var::Rta, 1.0), Filter::Sector("31".into())]);
    }

    #[test]
    fn spec_validation() {
        let dup = "estimator = \"ols\"\ndependent = \"ln_trade\"\nregressors = [\"ln_cc\", \"ln_cc\"]";
        assert!(matches!(parse_spec(dup), Err(EconError::InvalidSpec(_))));
        let dep = "estimator = \"ols\"\ndependent = \"ln_trade\"\nregressors = [\"ln_trade\"]";
        assert!(matches!(parse_spec(dep), Err(EconError::InvalidSpec(_))));
        let inter = "estimator = \"ols\"\ndependent = \"ln_trade\"\nregressors = [\"ln_cc\", \"ln_dist:ln_cc\"]";
        assert!(matches!(parse_spec(inter), Err(EconError::InvalidSpec(_))));
        let unknown = "estimator = \"ols\"\ndependent = \"ln_trade\"\nregresors = []";
        assert!(matches!(parse_spec(unknown), Err(EconError::InvalidSpec(_))));
    }

    #[test]
    fn system_order_condition() {
        let ok = r#"
            estimator = "threesls"
            endogenous = ["ln_trade", "ln_cc"]
            [[equation]]
            dependent = "ln_trade"
            regressors = ["ln_cc", "ln_spl", "ln_dist", "smctry"]
            [[equation]]
            dependent = "ln_cc"
            regressors = ["ln_trade", "ln_dist", "colony"]
        "#;
        let SpecFile::System(sys) = parse_spec(ok).unwrap() else { panic!() };
        assert_eq!(sys.exogenous().len(), 4);

        let bad = r#"
            estimator = "threesls"
            endogenous = ["ln_trade", "ln_cc"]
            [[equation]]
            dependent = "ln_trade"
            regressors = ["ln_cc", "ln_dist"]
            [[equation]]
            dependent = "ln_cc"
            regressors = ["ln_trade", "ln_dist"]
        "#;
        assert!(matches!(parse_spec(bad), Err(EconError::UnderIdentified { .. })));
    }
}
