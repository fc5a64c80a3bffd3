use alloc::string::String;
use core::fmt;

/// Errors raised by the numeric core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Requested degree exceeds the cap or is otherwise unusable.
    InvalidDegree { m: usize, max: usize },
    /// Mixture weights are not a valid simplex point.
    InvalidWeights(String),
    /// Basis index out of `0..=m`.
    IndexOutOfRange { j: usize, m: usize },
    /// Argument outside its required domain.
    Domain(String),
    /// `|alpha' r~(x)|` exceeded the overflow guard during tilt evaluation.
    TiltOverflow { exponent: f64 },
    /// Coarse and refined quadrature rules disagree beyond tolerance.
    QuadratureNonconvergence { rel_diff: f64 },
    /// A linear system arising in Newton iteration is singular.
    SingularSystem,
    /// Logistic regression diverged (separated data).
    Separation { max_abs_coef: f64 },
    /// Design matrix columns are linearly dependent.
    RankDeficient,
    /// The mixture density vanished at a data point (over-sparse weights).
    DegenerateDensity { point: f64 },
    /// Sample variance is zero; the degree lower bound is undefined.
    ZeroVariance,
    /// A required sample is empty.
    EmptyGroup { group: usize },
    /// The lambda iteration of the profile fit left its feasible domain.
    InfeasibleLambda,
    /// Degree sweep needs at least three usable consecutive degrees.
    InsufficientDegrees { usable: usize },
    /// Fit failures broke the contiguity of the candidate-degree sequence.
    NonContiguousSweep { failed_at: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDegree { m, max } => write!(f, "degree {m} exceeds cap {max}"),
            Error::InvalidWeights(msg) => write!(f, "invalid mixture weights: {msg}"),
            Error::IndexOutOfRange { j, m } => write!(f, "basis index {j} out of range for degree {m}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::TiltOverflow { exponent } => {
                write!(f, "tilt exponent {exponent} exceeds overflow guard (|a'r| > 700)")
            }
            Error::QuadratureNonconvergence { rel_diff } => {
                write!(f, "quadrature refinement disagreement {rel_diff:e} exceeds 1e-9")
            }
            Error::SingularSystem => write!(f, "singular linear system in Newton step"),
            Error::Separation { max_abs_coef } => {
                write!(f, "logistic regression diverged (|coef| reached {max_abs_coef}); data may be separated")
            }
            Error::RankDeficient => write!(f, "regressor design matrix is rank deficient"),
            Error::DegenerateDensity { point } => {
                write!(f, "mixture density vanished at data point {point}")
            }
            Error::ZeroVariance => write!(f, "sample variance is zero"),
            Error::EmptyGroup { group } => write!(f, "group {group} has no observations"),
            Error::InfeasibleLambda => {
                write!(f, "lambda iteration left the feasible domain after 30 halvings")
            }
            Error::InsufficientDegrees { usable } => {
                write!(f, "degree sweep needs >= 3 usable degrees, got {usable}")
            }
            Error::NonContiguousSweep { failed_at } => {
                write!(f, "fit failure at degree {failed_at} breaks sweep contiguity")
            }
        }
    }
}
