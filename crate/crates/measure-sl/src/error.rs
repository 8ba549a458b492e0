//! Error types shared across the crate.

use thiserror::Error;

/// Names the clause of the coefficient hypothesis that failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HypothesisClause {
    /// The weight measure must be positive.
    VarrhoPositive,
    /// The potential measure must be real-valued.
    ChiReal,
    /// The measure driving the quasi-derivative must be real-valued.
    VarsigmaReal,
    /// supp(varsigma) must be the whole interval.
    VarsigmaSupport,
    /// varsigma must have no point masses in common with varrho or chi.
    SharedAtom,
    /// On each gap of supp(varrho), varsigma and chi must carry one common sign.
    GapSign,
    /// supp(varrho) must contain more than one point (unless one-point mode).
    SupportSize,
}

impl std::fmt::Display for HypothesisClause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let text = match self {
            HypothesisClause::VarrhoPositive => "the measure varrho is positive",
            HypothesisClause::ChiReal => "the measure chi is real-valued",
            HypothesisClause::VarsigmaReal => "the measure varsigma is real-valued",
            HypothesisClause::VarsigmaSupport => "varsigma is supported on the whole interval",
            HypothesisClause::SharedAtom => "no point masses in common",
            HypothesisClause::GapSign => {
                "varsigma and chi are of one and the same sign on each gap of supp(varrho)"
            }
            HypothesisClause::SupportSize => "supp(varrho) consists of more than one point",
        };
        f.write_str(text)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SlError {
    #[error("position {0} lies outside the interval")]
    PositionOutsideInterval(f64),
    #[error("singular jump factor at x = {0}: solution not unique to the left")]
    SingularJump(f64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(HypothesisClause),
    #[error("endpoint {0} is not regular")]
    EndpointNotRegular(&'static str),
    #[error("varrho has no gap at endpoint {0}")]
    NoGapAtEndpoint(&'static str),
    #[error("invalid boundary condition: {0}")]
    InvalidBc(String),
    #[error("z = {0} is within tolerance of an eigenvalue")]
    ZAtEigenvalue(num_complex::Complex<f64>),
    #[error("z = {0} lies on the spectrum")]
    ZOnSpectrum(num_complex::Complex<f64>),
    #[error("coefficient support is not a single point")]
    NotOnePoint,
    #[error("scan step failed to separate zeros near {0}; refine the bracket")]
    BracketTooCoarse(f64),
    #[error("Weyl matrix denominator m_-(z) + m_+(z) vanishes")]
    DenominatorVanishes,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, SlError>;
