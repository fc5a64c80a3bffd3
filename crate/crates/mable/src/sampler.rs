//! Sampling from a fitted tilted mixture. Group i has density
//! f_i(x) = f_m(x; p) exp{i alpha' r~}, a mixture of tilted betas with
//! mixing proportions p_j w_mj(i alpha). Draws go through per-component
//! inverse-CDF tables.

use mable_core::tilt::TiltTableBuilder;
use mable_core::{Degree, Error, FitResult, RegressorSpec, Result, TiltCoefficients};
use rand::distributions::Distribution;
use rand::Rng;

const BASE_GRID: usize = 2048;
const FINE_GRID: usize = 8192;
/// grid-to-grid density variation (relative to the max) that triggers
/// refinement of the inverse-CDF tables
const VARIATION_TOL: f64 = 0.01;
const CONSTRAINT_TOL: f64 = 1e-4;

/// Inverse-CDF sampler for one group of a fitted model. Values come out on
/// the unit scale.
pub struct FittedSampler {
    group: u8,
    /// cumulative mixing proportions, for component selection
    cum_probs: Vec<f64>,
    /// shared x grid of the per-component CDF tables
    grid: Vec<f64>,
    /// per-component CDF values on `grid`, each normalized to end at 1
    cdfs: Vec<Vec<f64>>,
}

impl FittedSampler {
    pub fn new(fit: &FitResult, spec: &RegressorSpec, group: u8) -> Result<Self> {
        if group > 1 {
            return Err(Error::Domain(format!("group must be 0 or 1, got {group}")));
        }
        if fit.constraint_residual > CONSTRAINT_TOL {
            return Err(Error::Domain(format!(
                "fit violates the weight constraint (residual {:.3e} > {CONSTRAINT_TOL:e})",
                fit.constraint_residual
            )));
        }
        let m = fit.m;
        let alpha_i = fit.alpha.scaled(group);
        let builder = TiltTableBuilder::with_default_rule(m, spec);
        let table = builder.table_at(&alpha_i)?;

        // mixing proportions p_j w_mj(i alpha), normalized
        let mut probs: Vec<f64> =
            fit.p.as_slice().iter().zip(&table.w).map(|(pj, wj)| pj * wj).collect();
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) || (total - 1.0).abs() > CONSTRAINT_TOL {
            return Err(Error::Domain(format!(
                "mixing proportions sum to {total}, expected 1 within {CONSTRAINT_TOL:e}"
            )));
        }
        for q in &mut probs {
            *q /= total;
        }
        if probs.iter().sum::<f64>() - 1.0 > 1e-9 {
            return Err(Error::Domain("mixing proportions failed to normalize".into()));
        }
        let mut cum = 0.0;
        let cum_probs = probs
            .iter()
            .map(|q| {
                cum += q;
                cum
            })
            .collect();

        let (grid, cdfs) = build_tables(m, spec, &alpha_i, &table.w, BASE_GRID)
            .and_then(|built| {
                if built.2 > VARIATION_TOL {
                    build_tables(m, spec, &alpha_i, &table.w, FINE_GRID)
                } else {
                    Ok(built)
                }
            })
            .map(|(g, c, _)| (g, c))?;

        Ok(FittedSampler { group, cum_probs, grid, cdfs })
    }

    pub fn group(&self) -> u8 {
        self.group
    }

    /// One draw on the unit scale.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let j = match self.cum_probs.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
            Ok(i) | Err(i) => i.min(self.cum_probs.len() - 1),
        };
        let v: f64 = rng.gen();
        invert(&self.grid, &self.cdfs[j], v)
    }

    /// n i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

impl Distribution<f64> for FittedSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.draw(rng)
    }
}

/// CDF tables for every tilted-beta component on an `n`-point grid, plus the
/// largest grid-to-grid density variation observed (relative to the max).
#[allow(clippy::type_complexity)]
fn build_tables(
    m: Degree,
    spec: &RegressorSpec,
    alpha_i: &TiltCoefficients,
    w: &[f64],
    n: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let md = m.get();
    let grid: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();

    // tilt factor on the grid, shared by all components
    let mut tilt = Vec::with_capacity(grid.len());
    for &x in &grid {
        tilt.push(mable_core::regressor::tilt_at(spec, alpha_i, x)?);
    }

    let mut cdfs = Vec::with_capacity(md + 1);
    let mut worst_var = 0.0f64;
    for j in 0..=md {
        let deg = m;
        let dens: Vec<f64> = grid
            .iter()
            .zip(&tilt)
            .map(|(&x, &e)| mable_core::bernstein::beta_basis(deg, j, x).unwrap() * e / w[j])
            .collect();
        let peak = dens.iter().cloned().fold(0.0f64, f64::max);
        if peak > 0.0 {
            for pair in dens.windows(2) {
                worst_var = worst_var.max((pair[1] - pair[0]).abs() / peak);
            }
        }
        // cumulative trapezoid, normalized so the table ends exactly at 1
        let mut cdf = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 1..grid.len() {
            acc += 0.5 * (dens[k] + dens[k - 1]) * (grid[k] - grid[k - 1]);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::DegenerateDensity { point: f64::NAN });
        }
        for c in &mut cdf {
            *c /= acc;
        }
        cdfs.push(cdf);
    }
    Ok((grid, cdfs, worst_var))
}

/// Linear-interpolation inverse of a tabulated CDF.
fn invert(grid: &[f64], cdf: &[f64], v: f64) -> f64 {
    let i = match cdf.binary_search_by(|c| c.partial_cmp(&v).unwrap()) {
        Ok(i) => return grid[i],
        Err(i) => i,
    };
    if i == 0 {
        return grid[0];
    }
    if i >= cdf.len() {
        return *grid.last().unwrap();
    }
    let (c0, c1) = (cdf[i - 1], cdf[i]);
    let (x0, x1) = (grid[i - 1], grid[i]);
    if c1 <= c0 {
        return x0;
    }
    x0 + (x1 - x0) * (v - c0) / (c1 - c0)
}
