//! Degree selection: method-of-moments lower bound, baseline-group choice,
//! and the change-point rule over a sweep of fitted log-likelihoods.

use alloc::vec::Vec;
use libm::{ceil, log};

use crate::bernstein::Degree;
use crate::data::TwoSampleData;
use crate::em::{em_fit, EmConfig, FitResult};
use crate::error::{Error, Result};
use crate::profile::profile_p_fit;
use crate::regressor::{RegressorSpec, TiltCoefficients};

/// smallest detectable log-likelihood increment in the change-point statistic
const LR_INCREMENT_FLOOR: f64 = 1e-12;

/// Method-of-moments lower bound m^_b = max{ceil(x_bar(1-x_bar)/s^2 - 3), 1}
/// with the unbiased sample variance.
pub fn degree_lower_bound(x: &[f64]) -> Result<usize> {
    if x.len() < 2 {
        return Err(Error::Domain(alloc::format!(
            "need at least 2 observations for the degree bound, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let s2 = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if s2 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let raw = ceil(mean * (1.0 - mean) / s2 - 3.0);
    Ok(if raw < 1.0 { 1 } else { raw as usize })
}

/// Which sample plays the baseline role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineChoice {
    /// group 0 is the baseline, as given
    Original,
    /// groups exchanged: the case sample is smoother and serves as baseline
    Swapped,
}

/// Swap the group roles when the case sample admits a lower degree bound
/// than the control sample. Returns the choice with both bounds.
pub fn choose_baseline(data: &TwoSampleData) -> Result<(BaselineChoice, usize, usize)> {
    let mb0 = degree_lower_bound(data.x0())?;
    let mb1 = degree_lower_bound(data.x1())?;
    let choice = if mb1 < mb0 { BaselineChoice::Swapped } else { BaselineChoice::Original };
    Ok((choice, mb0, mb1))
}

/// Whether the sweep refits alpha at each degree or holds it at the MELE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// full maximization over (alpha, p)
    Full,
    /// profile over p only at the MELE
    Profile,
}

/// Fits over a contiguous degree range plus the selected index.
#[derive(Debug, Clone)]
pub struct DegreeSweep {
    pub m0: usize,
    pub fits: Vec<FitResult>,
    pub logliks: Vec<f64>,
    pub selected: usize,
    pub mode: SelectionMode,
}

impl DegreeSweep {
    pub fn selected_fit(&self) -> &FitResult {
        &self.fits[self.selected - self.m0]
    }

    pub fn selected_degree(&self) -> usize {
        self.selected
    }
}

/// Change-point location over the loglik profile l_0..l_k (indices are
/// offsets from m0). Returns tau in 1..=k maximizing the likelihood-ratio
/// statistic of a single slope change; tau = k means "no change found".
pub fn change_point(logliks: &[f64]) -> Result<usize> {
    let k = logliks.len() - 1;
    if k < 2 {
        return Err(Error::InsufficientDegrees { usable: logliks.len() });
    }
    let l0 = logliks[0];
    let lk = logliks[k];
    let dk = (lk - l0).max(LR_INCREMENT_FLOOR);
    let mut best_tau = k;
    let mut best = 0.0;
    for tau in 1..k {
        let d1 = (logliks[tau] - l0).max(LR_INCREMENT_FLOOR);
        let d2 = (lk - logliks[tau]).max(LR_INCREMENT_FLOOR);
        let kf = k as f64;
        let tf = tau as f64;
        let lr = kf * log(dk / kf) - tf * log(d1 / tf) - (kf - tf) * log(d2 / (kf - tf));
        if lr > best {
            best = lr;
            best_tau = tau;
        }
    }
    Ok(best_tau)
}

/// Fit every degree in `m0..=mk` and pick m^ = m0 + tau by the change-point
/// rule. `alpha_tilde` seeds (and, in profile mode, fixes) the tilt.
pub fn select_degree(
    data: &TwoSampleData,
    m0: usize,
    mk: usize,
    spec: &RegressorSpec,
    alpha_tilde: &TiltCoefficients,
    mode: SelectionMode,
    cfg: &EmConfig,
) -> Result<DegreeSweep> {
    if mk < m0 + 2 {
        return Err(Error::InsufficientDegrees { usable: mk.saturating_sub(m0) + 1 });
    }
    // failed degrees at either end of the range are trimmed; a failure in
    // the interior breaks the consecutive-degree assumption of the
    // change-point statistic and aborts the sweep
    let mut results = Vec::with_capacity(mk - m0 + 1);
    for m in m0..=mk {
        let deg = Degree::new(m)?;
        let fit = match mode {
            SelectionMode::Full => em_fit(data, deg, spec, alpha_tilde, cfg),
            SelectionMode::Profile => profile_p_fit(data, deg, spec, alpha_tilde, cfg),
        };
        results.push((m, fit));
    }
    let lo = results.iter().position(|(_, f)| f.is_ok()).unwrap_or(results.len());
    let hi = results.iter().rposition(|(_, f)| f.is_ok()).map_or(0, |i| i + 1);
    if lo >= hi {
        return Err(Error::InsufficientDegrees { usable: 0 });
    }
    let mut fits = Vec::with_capacity(hi - lo);
    let mut logliks = Vec::with_capacity(hi - lo);
    let m0_usable = results[lo].0;
    for (m, fit) in results.drain(..).skip(lo).take(hi - lo) {
        match fit {
            Ok(f) => {
                logliks.push(f.loglik);
                fits.push(f);
            }
            Err(_) => return Err(Error::NonContiguousSweep { failed_at: m }),
        }
    }
    let tau = change_point(&logliks)?;
    Ok(DegreeSweep { m0: m0_usable, fits, logliks, selected: m0_usable + tau, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logistic::mele_logistic;
    use alloc::vec;

    #[test]
    fn lower_bound_matches_hand_computation() {
        // x = 0.2, 0.4, 0.6, 0.8: mean 0.5, s2 = 0.2/3
        // 0.25/(0.2/3) - 3 = 0.75, ceil = 1
        assert_eq!(degree_lower_bound(&[0.2, 0.4, 0.6, 0.8]).unwrap(), 1);
        // tight cluster: mean 0.5, s2 = 1e-4 => ceil(2500 - 3) = 2497
        assert_eq!(degree_lower_bound(&[0.49, 0.50, 0.51]).unwrap(), 2497);
        // beta(2,2)-like spread never goes below 1
        assert_eq!(degree_lower_bound(&[0.0, 1.0]).unwrap(), 1);
        assert!(matches!(degree_lower_bound(&[0.5, 0.5]), Err(Error::ZeroVariance)));
        assert!(degree_lower_bound(&[0.5]).is_err());
    }

    #[test]
    fn baseline_swaps_when_cases_are_smoother() {
        // controls tightly clustered (high bound), cases spread (low bound)
        let x0 = vec![0.48, 0.50, 0.52, 0.49, 0.51];
        let x1 = vec![0.1, 0.3, 0.5, 0.7, 0.9];
        let data = TwoSampleData::new(x0.clone(), x1.clone()).unwrap();
        let (choice, mb0, mb1) = choose_baseline(&data).unwrap();
        assert!(mb1 < mb0);
        assert_eq!(choice, BaselineChoice::Swapped);
        let (choice, ..) = choose_baseline(&data.swapped()).unwrap();
        assert_eq!(choice, BaselineChoice::Original);
    }

    #[test]
    fn change_point_finds_the_elbow() {
        // steep rise to index 3, then flat: tau = 3
        let lls = [0.0, 5.0, 9.0, 12.0, 12.05, 12.08, 12.1, 12.11];
        assert_eq!(change_point(&lls).unwrap(), 3);
        // strictly linear profile has no elbow; LR stat never exceeds 0 so
        // the no-change answer tau = k comes back
        let lin: Vec<f64> = (0..8).map(|i| i as f64).collect();
        assert_eq!(change_point(&lin).unwrap(), 7);
        // flat profile exercises the increment floor without NaN
        let flat = [3.0; 6];
        let tau = change_point(&flat).unwrap();
        assert!(tau >= 1 && tau <= 5);
        assert!(change_point(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn sweep_selects_a_small_degree_for_smooth_data() {
        let x0: Vec<f64> = (1..=40).map(|i| (i as f64 * 0.618034).fract() * 0.9 + 0.05).collect();
        let x1: Vec<f64> = (1..=30).map(|i| (i as f64 * 0.414214).fract() * 0.6 + 0.35).collect();
        let data = TwoSampleData::new(x0, x1).unwrap();
        let spec = RegressorSpec::polynomial(1, 0.0, 1.0).unwrap();
        let at = mele_logistic(&data, &spec).unwrap();
        let cfg = EmConfig::default();
        let sweep =
            select_degree(&data, 1, 8, &spec, &at, SelectionMode::Full, &cfg).unwrap();
        assert_eq!(sweep.fits.len(), 8);
        assert!(sweep.selected >= 1 && sweep.selected <= 8);
        assert_eq!(sweep.selected_fit().m.get(), sweep.selected);
        // profile sweep runs too and never beats the full loglik degree-wise
        let psweep =
            select_degree(&data, 1, 8, &spec, &at, SelectionMode::Profile, &cfg).unwrap();
        for (f, p) in sweep.logliks.iter().zip(&psweep.logliks) {
            assert!(f >= &(p - 1e-6), "full {f} < profile {p}");
        }
        // too-short sweep is rejected
        assert!(select_degree(&data, 3, 4, &spec, &at, SelectionMode::Full, &cfg).is_err());
    }
}
