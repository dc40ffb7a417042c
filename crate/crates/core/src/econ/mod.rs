//! Gravity-model estimators: OLS, Heckman two-step, PPML, ZIP-PML, 3SLS and
//! reduced forms, plus summary statistics and the critical-distance helper.

pub mod design;
pub mod fit;
pub mod heckman;
pub mod linalg;
pub mod normal;
pub mod ols;
pub mod ppml;
pub mod probit;
pub mod sls;
pub mod spec;
pub mod stats;
pub mod zip;

use thiserror::Error;

pub use design::{build_design, build_system, DesignMatrix, DropCounts, DyadKey, SystemDesign};
pub use fit::{CoefBlock, CoefRow, Estimator, Extras, FitResult};
pub use spec::{parse_spec, Direction, EstimatorKind, LogPolicy, ModelSpec, SpecFile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EconError {
    #[error("design matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("empty estimation sample: {0}")]
    EmptySample(String),
    #[error("{0}")]
    Separation(String),
    #[error("{estimator} did not converge after {iterations} iterations (last change {last_change:e})")]
    NotConverged {
        estimator: &'static str,
        iterations: usize,
        last_change: f64,
    },
    #[error("zero-inflated model needs at least one zero outcome")]
    NoZeros,
    #[error("equation `{equation}` is under-identified: {excluded} excluded exogenous < {endogenous} included endogenous")]
    UnderIdentified {
        equation: String,
        excluded: usize,
        endogenous: usize,
    },
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("no variance in {0}")]
    ZeroVariance(String),
    #[error("no critical value: {0}")]
    NoCriticalValue(String),
    #[error("diff measures need alpha = 1 (got {0})")]
    AlphaNotOne(f64),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
}

/// Fits a single-equation spec end to end.
pub fn fit_spec(
    panel: &crate::netcore::DyadPanel,
    measures: &crate::measures::MeasureTable,
    spec: &ModelSpec,
) -> Result<FitResult, EconError> {
    let dm = build_design(panel, measures, spec)?;
    let mut fit = match spec.estimator {
        EstimatorKind::Ols => ols::ols(&dm)?,
        EstimatorKind::Heckman2s => heckman::heckman(&dm)?,
        EstimatorKind::Ppml => ppml::ppml(&dm)?,
        EstimatorKind::Zippml => zip::zip_pml(&dm)?,
        EstimatorKind::Threesls | EstimatorKind::ReducedForm => {
            return Err(EconError::InvalidSpec("system estimators need an equation system".into()))
        }
    };
    let mut warnings = dm.warnings.clone();
    warnings.append(&mut fit.warnings);
    fit.warnings = warnings;
    Ok(fit)
}

/// Fits any parsed spec file.
pub fn fit_spec_file(
    panel: &crate::netcore::DyadPanel,
    measures: &crate::measures::MeasureTable,
    spec: &SpecFile,
) -> Result<FitResult, EconError> {
    match spec {
        SpecFile::Single(s) => fit_spec(panel, measures, s),
        SpecFile::System(sys) => {
            let sd = build_system(panel, measures, sys)?;
            match sys.estimator {
                EstimatorKind::Threesls => sls::three_sls(&sd, sls::SigmaMode::Estimated),
                _ => sls::reduced_form(&sd),
            }
        }
    }
}
