//! Regressor specification r(.), support transformation and the exponential
//! tilt exp{alpha' r~(y)}.

use alloc::vec::Vec;
use libm::exp;

use crate::error::{Error, Result};

/// Fail fast rather than produce silent infinities during Newton line
/// exploration.
pub const TILT_EXPONENT_GUARD: f64 = 700.0;

/// The regressor r(.) in the original data scale.
#[derive(Debug, Clone, PartialEq)]
pub enum RegressorKind {
    /// r(y) = (y, y^2, ..., y^d). The default throughout; matches the data
    /// examples (d = 1) and the CA19-9 style quadratic (d = 2).
    Polynomial { degree: usize },
    /// User-supplied basis functions r(y) = (g_1(y), ..., g_d(y)).
    Custom { funcs: Vec<fn(f64) -> f64> },
}

/// r(.) plus the support [a, b] in original units. Transformed-scale
/// evaluation uses r~(a + (b-a)u) for u in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorSpec {
    kind: RegressorKind,
    a: f64,
    b: f64,
}

impl RegressorSpec {
    pub fn polynomial(degree: usize, a: f64, b: f64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Domain("polynomial regressor degree must be >= 1".into()));
        }
        Self::with_kind(RegressorKind::Polynomial { degree }, a, b)
    }

    pub fn custom(funcs: Vec<fn(f64) -> f64>, a: f64, b: f64) -> Result<Self> {
        if funcs.is_empty() {
            return Err(Error::Domain("custom regressor needs at least one function".into()));
        }
        // distinct components are the checkable part of linear independence
        for i in 0..funcs.len() {
            for j in (i + 1)..funcs.len() {
                if funcs[i] as usize == funcs[j] as usize {
                    return Err(Error::RankDeficient);
                }
            }
        }
        Self::with_kind(RegressorKind::Custom { funcs }, a, b)
    }

    fn with_kind(kind: RegressorKind, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::Domain(alloc::format!("support [{a}, {b}] requires a < b")));
        }
        Ok(RegressorSpec { kind, a, b })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Dimension d of r(.); r~ has d+1 components.
    pub fn dim(&self) -> usize {
        match &self.kind {
            RegressorKind::Polynomial { degree } => *degree,
            RegressorKind::Custom { funcs } => funcs.len(),
        }
    }

    pub fn kind(&self) -> &RegressorKind {
        &self.kind
    }

    /// r~(y) = (1, r(y)')' at an original-scale point y.
    pub fn r_tilde(&self, y: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim() + 1);
        out.push(1.0);
        match &self.kind {
            RegressorKind::Polynomial { degree } => {
                let mut pw = 1.0;
                for _ in 0..*degree {
                    pw *= y;
                    out.push(pw);
                }
            }
            RegressorKind::Custom { funcs } => {
                for g in funcs {
                    out.push(g(y));
                }
            }
        }
        out
    }

    /// r~ evaluated at the original-scale image of a unit-interval point:
    /// r~(a + (b-a)u).
    pub fn r_tilde_unit(&self, u: f64) -> Vec<f64> {
        self.r_tilde(self.a + (self.b - self.a) * u)
    }

    /// Map a unit-interval point to the original scale.
    pub fn to_original(&self, u: f64) -> f64 {
        self.a + (self.b - self.a) * u
    }

    /// Map an original-scale point to [0, 1].
    pub fn to_unit(&self, y: f64) -> f64 {
        (y - self.a) / (self.b - self.a)
    }
}

/// Tilt coefficients alpha = (alpha_0, ..., alpha_d).
#[derive(Debug, Clone, PartialEq)]
pub struct TiltCoefficients {
    alpha: Vec<f64>,
}

impl TiltCoefficients {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Domain("alpha must have at least an intercept".into()));
        }
        if alpha.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("alpha components must be finite".into()));
        }
        Ok(TiltCoefficients { alpha })
    }

    pub fn zeros(d: usize) -> Self {
        TiltCoefficients { alpha: alloc::vec![0.0; d + 1] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Componentwise negation (the swapped-baseline orientation).
    pub fn negated(&self) -> Self {
        TiltCoefficients { alpha: self.alpha.iter().map(|v| -v).collect() }
    }

    /// Scale by a group index: i = 0 gives the null tilt, i = 1 the full one.
    pub fn scaled(&self, i: u8) -> Self {
        if i == 0 {
            TiltCoefficients::zeros(self.alpha.len() - 1)
        } else {
            self.clone()
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// exp{alpha' r~(a + (b-a)u)} with the overflow guard.
pub fn tilt_at(spec: &RegressorSpec, alpha: &TiltCoefficients, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(alloc::format!("u = {u} outside [0,1]")));
    }
    if alpha.len() != spec.dim() + 1 {
        return Err(Error::Domain(alloc::format!(
            "alpha has {} components, regressor needs {}",
            alpha.len(),
            spec.dim() + 1
        )));
    }
    let e = dot(alpha.as_slice(), &spec.r_tilde_unit(u));
    if libm::fabs(e) > TILT_EXPONENT_GUARD {
        return Err(Error::TiltOverflow { exponent: e });
    }
    Ok(exp(e))
}
