//! Benchmark estimators: per-group parametric MLEs, the one-sample Gaussian
//! kernel density with R's nrd0 bandwidth, and the empirical-likelihood
//! weighted semiparametric kernel density built on the MELE.

use mable_core::{Error, RegressorSpec, Result, TiltCoefficients};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Normal,
    Exponential,
}

/// Plug-in parametric fit for one sample (original scale).
#[derive(Debug, Clone)]
pub struct ParametricMle {
    pub family: Family,
    /// normal: (mean, sd); exponential: (mean, _)
    pub params: (f64, f64),
}

impl ParametricMle {
    pub fn density(&self, x: f64) -> f64 {
        match self.family {
            Family::Normal => {
                let (mu, s) = self.params;
                let z = (x - mu) / s;
                (-0.5 * z * z).exp() / (s * (2.0 * PI).sqrt())
            }
            Family::Exponential => {
                let mean = self.params.0;
                if x < 0.0 {
                    0.0
                } else {
                    (-x / mean).exp() / mean
                }
            }
        }
    }
}

pub fn parametric_mle(sample: &[f64], family: Family) -> Result<ParametricMle> {
    match family {
        Family::Normal => {
            if sample.len() < 2 {
                return Err(Error::Domain(format!(
                    "normal MLE needs n >= 2, got {}",
                    sample.len()
                )));
            }
            let n = sample.len() as f64;
            let mean = sample.iter().sum::<f64>() / n;
            let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            if var <= 0.0 {
                return Err(Error::ZeroVariance);
            }
            Ok(ParametricMle { family, params: (mean, var.sqrt()) })
        }
        Family::Exponential => {
            if sample.is_empty() {
                return Err(Error::EmptyGroup { group: 0 });
            }
            if sample.iter().any(|x| *x < 0.0) {
                return Err(Error::Domain("exponential MLE needs nonnegative data".into()));
            }
            let mean = sample.iter().sum::<f64>() / sample.len() as f64;
            if mean <= 0.0 {
                return Err(Error::ZeroVariance);
            }
            Ok(ParametricMle { family, params: (mean, 0.0) })
        }
    }
}

/// A kernel density evaluated on a grid.
#[derive(Debug, Clone)]
pub struct KernelEstimate {
    pub grid: Vec<f64>,
    pub bandwidth: f64,
    /// weight per observation (uniform 1/n for the one-sample estimator)
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

/// R's `bw.nrd0`: 0.9 min(s, IQR/1.34) n^{-1/5}, falling back to s, |x_1|,
/// then 1 when the min term degenerates.
pub fn nrd0_bandwidth(sample: &[f64]) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::Domain(format!("nrd0 needs n >= 2, got {}", sample.len())));
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let s = (sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = quantile_type7(&sorted, 0.75) - quantile_type7(&sorted, 0.25);
    let mut lo = s.min(iqr / 1.34);
    if lo == 0.0 {
        lo = s;
    }
    if lo == 0.0 {
        lo = sorted[0].abs();
    }
    if lo == 0.0 {
        lo = 1.0;
    }
    Ok(0.9 * lo * n.powf(-0.2))
}

/// R's default (type 7) sample quantile on presorted data.
fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn gauss_kernel(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// One-sample Gaussian KDE; bandwidth defaults to nrd0.
pub fn kde_one_sample(sample: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Result<KernelEstimate> {
    let h = match bandwidth {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::Domain(format!("bandwidth must be positive, got {h}"))),
        None => nrd0_bandwidth(sample)?,
    };
    let n = sample.len() as f64;
    let weights = vec![1.0 / n; sample.len()];
    let values = grid
        .iter()
        .map(|&x| sample.iter().map(|&z| gauss_kernel((x - z) / h)).sum::<f64>() / (n * h))
        .collect();
    Ok(KernelEstimate { grid: grid.to_vec(), bandwidth: h, weights, values })
}

/// Empirical-likelihood weighted semiparametric KDE pair (f~_0S, f~_1S) on
/// original-scale pooled data z. Weights q_i = 1/(n0 + n1 e^{a' r~(z_i)}),
/// normalized; the tilted estimate reweights by the density ratio.
pub fn kde_semiparametric(
    z: &[f64],
    n0: usize,
    n1: usize,
    spec: &RegressorSpec,
    alpha_tilde: &TiltCoefficients,
    grid: &[f64],
    bandwidth: Option<f64>,
) -> Result<(KernelEstimate, KernelEstimate)> {
    if z.len() != n0 + n1 {
        return Err(Error::Domain(format!(
            "pooled sample has {} points, expected n0 + n1 = {}",
            z.len(),
            n0 + n1
        )));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::Domain(format!("bandwidth must be positive, got {h}"))),
        None => nrd0_bandwidth(z)?,
    };
    let ratios: Vec<f64> = z
        .iter()
        .map(|&y| {
            let e: f64 = alpha_tilde
                .as_slice()
                .iter()
                .zip(spec.r_tilde(y))
                .map(|(a, r)| a * r)
                .sum();
            if e.abs() > 700.0 {
                Err(Error::TiltOverflow { exponent: e })
            } else {
                Ok(e.exp())
            }
        })
        .collect::<Result<_>>()?;
    let raw: Vec<f64> =
        ratios.iter().map(|r| 1.0 / (n0 as f64 + n1 as f64 * r)).collect();
    let total: f64 = raw.iter().sum();
    let q: Vec<f64> = raw.iter().map(|v| v / total).collect();

    let eval = |reweight: &dyn Fn(usize) -> f64| -> Vec<f64> {
        grid.iter()
            .map(|&x| {
                z.iter()
                    .enumerate()
                    .map(|(i, &zi)| q[i] * reweight(i) * gauss_kernel((x - zi) / h))
                    .sum::<f64>()
                    / h
            })
            .collect()
    };
    let f0 = eval(&|_| 1.0);
    let f1 = eval(&|i| ratios[i]);
    let w0 = q.clone();
    let w1: Vec<f64> = q.iter().zip(&ratios).map(|(qi, r)| qi * r).collect();
    Ok((
        KernelEstimate { grid: grid.to_vec(), bandwidth: h, weights: w0, values: f0 },
        KernelEstimate { grid: grid.to_vec(), bandwidth: h, weights: w1, values: f1 },
    ))
}
