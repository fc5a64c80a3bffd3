//! Beta-density basis, Bernstein mixtures and degree elevation on [0, 1].

use alloc::vec::Vec;
use libm::{exp, fabs, log};

use crate::error::{Error, Result};
use crate::special::{betainc_reg, ln_choose};

/// Degrees selected in practice stay far below this (the change-point method
/// picks m in the tens); the cap bounds basis/table memory.
pub const MAX_DEGREE: usize = 512;

/// Direct binomial products are overflow-safe up to here; beyond it the
/// basis goes through exp(log-gamma).
const DIRECT_PRODUCT_MAX: usize = 30;

/// Polynomial degree m of the Bernstein model; the basis has m+1 functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Degree(usize);

impl Degree {
    pub fn new(m: usize) -> Result<Self> {
        if m > MAX_DEGREE {
            return Err(Error::InvalidDegree { m, max: MAX_DEGREE });
        }
        Ok(Degree(m))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Number of basis functions, m + 1.
    pub fn basis_len(self) -> usize {
        self.0 + 1
    }
}

/// A point on the simplex S_m: the mixture coefficients of the baseline
/// density.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureWeights {
    p: Vec<f64>,
}

impl MixtureWeights {
    /// Strict constructor: non-negative entries summing to 1 within 1e-12.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(&bad) = p.iter().find(|&&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidWeights(alloc::format!(
                "entry {bad} is negative or non-finite"
            )));
        }
        let sum: f64 = p.iter().sum();
        if fabs(sum - 1.0) > 1e-12 {
            return Err(Error::InvalidWeights(alloc::format!(
                "sum {sum} differs from 1 by more than 1e-12"
            )));
        }
        Ok(MixtureWeights { p })
    }

    /// Uniform weights 1/(m+1).
    pub fn uniform(m: Degree) -> Self {
        let k = m.basis_len();
        MixtureWeights { p: alloc::vec![1.0 / k as f64; k] }
    }

    /// EM iterates satisfy the constraint identity n0*sum(p) + n1*sum(p*w) = n
    /// rather than exact normalization, so the solver stores its output
    /// through this non-normalizing constructor. Entries must still be
    /// non-negative and finite and sum to 1 within solver tolerance.
    pub(crate) fn from_em_iterate(p: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = p.iter().find(|&&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidWeights(alloc::format!(
                "EM iterate entry {bad} is negative or non-finite"
            )));
        }
        let sum: f64 = p.iter().sum();
        if fabs(sum - 1.0) > 1e-3 {
            return Err(Error::InvalidWeights(alloc::format!(
                "EM iterate sum {sum} far from 1"
            )));
        }
        Ok(MixtureWeights { p })
    }

    /// Profile iterates at an infeasible multiplier (all w_j on one side of
    /// 1) collapse toward zero total mass; the fit is kept only for its
    /// log-likelihood in degree selection, so only non-negativity and
    /// finiteness are enforced here.
    pub(crate) fn from_profile_iterate(p: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = p.iter().find(|&&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidWeights(alloc::format!(
                "profile iterate entry {bad} is negative or non-finite"
            )));
        }
        Ok(MixtureWeights { p })
    }

    pub fn degree(&self) -> Degree {
        Degree(self.p.len() - 1)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }
}

/// A density sampled on an ascending grid over [0, 1].
#[derive(Debug, Clone)]
pub struct GridDensity {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() || xs.len() < 2 {
            return Err(Error::Domain("grid and values must have equal length >= 2".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("grid must be strictly ascending".into()));
        }
        if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Domain("density values must be finite and >= 0".into()));
        }
        Ok(GridDensity { xs, values })
    }

    /// Trapezoid integral over the grid.
    pub fn trapezoid(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }
}

/// Beta density beta_mj(x) = (m+1) C(m,j) x^j (1-x)^(m-j), the density of
/// Beta(j+1, m-j+1).
pub fn beta_basis(m: Degree, j: usize, x: f64) -> Result<f64> {
    let md = m.get();
    if j > md {
        return Err(Error::IndexOutOfRange { j, m: md });
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(alloc::format!("x = {x} outside [0,1]")));
    }
    Ok(beta_basis_unchecked(md, j, x))
}

pub(crate) fn beta_basis_unchecked(m: usize, j: usize, x: f64) -> f64 {
    // endpoint powers: x^0 = 1 even at x = 0
    if x == 0.0 {
        return if j == 0 { (m + 1) as f64 } else { 0.0 };
    }
    if x == 1.0 {
        return if j == m { (m + 1) as f64 } else { 0.0 };
    }
    if m <= DIRECT_PRODUCT_MAX {
        let mut c = 1.0;
        for i in 0..j {
            c *= (m - i) as f64 / (i + 1) as f64;
        }
        (m + 1) as f64 * c * libm::pow(x, j as f64) * libm::pow(1.0 - x, (m - j) as f64)
    } else {
        let ln = ln_choose(m, j) + j as f64 * log(x) + (m - j) as f64 * log(1.0 - x);
        (m + 1) as f64 * exp(ln)
    }
}

/// Evaluate all m+1 basis densities at `x` into `out`.
pub(crate) fn beta_basis_row(m: usize, x: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), m + 1);
    if x == 0.0 || x == 1.0 {
        for v in out.iter_mut() {
            *v = 0.0;
        }
        out[if x == 0.0 { 0 } else { m }] = (m + 1) as f64;
        return;
    }
    let table = ln_choose_table(m);
    beta_basis_row_with(&table, m, x, out);
}

/// Log binomial coefficients ln C(m, j), j = 0..=m, via the multiplicative
/// recurrence (no per-entry log-gamma calls).
pub(crate) fn ln_choose_table(m: usize) -> Vec<f64> {
    let mut t = alloc::vec![0.0; m + 1];
    for j in 1..=m {
        t[j] = t[j - 1] + log((m - j + 1) as f64) - log(j as f64);
    }
    t
}

/// Basis row evaluation with a precomputed ln C(m, .) table; log-space
/// throughout so individual terms underflow to 0 instead of poisoning the row.
pub(crate) fn beta_basis_row_with(ln_choose: &[f64], m: usize, x: f64, out: &mut [f64]) {
    if x == 0.0 || x == 1.0 {
        for v in out.iter_mut() {
            *v = 0.0;
        }
        out[if x == 0.0 { 0 } else { m }] = (m + 1) as f64;
        return;
    }
    let lx = log(x);
    let l1x = log(1.0 - x);
    let lm1 = log((m + 1) as f64);
    for (j, v) in out.iter_mut().enumerate() {
        *v = exp(lm1 + ln_choose[j] + j as f64 * lx + (m - j) as f64 * l1x);
    }
}

/// Mixture density f_m(x; p) = sum_j p_j beta_mj(x).
pub fn mixture_density(m: Degree, p: &MixtureWeights, x: f64) -> Result<f64> {
    check_same_degree(m, p)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(alloc::format!("x = {x} outside [0,1]")));
    }
    Ok(mixture_density_unchecked(m.get(), p.as_slice(), x))
}

pub(crate) fn mixture_density_unchecked(m: usize, p: &[f64], x: f64) -> f64 {
    let mut row = alloc::vec![0.0; m + 1];
    beta_basis_row(m, x, &mut row);
    row.iter().zip(p).map(|(b, pj)| b * pj).sum()
}

/// CDF of the untilted mixture: sum_j p_j I_x(j+1, m-j+1).
pub fn mixture_cdf_untilted(m: Degree, p: &MixtureWeights, x: f64) -> Result<f64> {
    check_same_degree(m, p)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(alloc::format!("x = {x} outside [0,1]")));
    }
    let md = m.get();
    Ok(p.as_slice()
        .iter()
        .enumerate()
        .map(|(j, pj)| pj * betainc_reg((j + 1) as f64, (md - j + 1) as f64, x))
        .sum())
}

/// Degree elevation: re-express a degree-m mixture exactly at degree m+1.
pub fn elevate(m: Degree, p: &MixtureWeights) -> Result<MixtureWeights> {
    check_same_degree(m, p)?;
    let md = m.get();
    let old = p.as_slice();
    let denom = (md + 2) as f64;
    let scale = (md + 1) as f64 / denom;
    let mut out = alloc::vec![0.0; md + 2];
    out[0] = scale * old[0];
    out[md + 1] = scale * old[md];
    for j in 1..=md {
        out[j] = (j as f64 * old[j - 1] + (md - j + 1) as f64 * old[j]) / denom;
    }
    // exact re-expression stays on the simplex up to roundoff
    MixtureWeights::new(out)
}

fn check_same_degree(m: Degree, p: &MixtureWeights) -> Result<()> {
    if p.degree() != m {
        return Err(Error::InvalidWeights(alloc::format!(
            "weights have degree {} but {} was requested",
            p.degree().get(),
            m.get()
        )));
    }
    Ok(())
}
