//! EM algorithm for the full approximate Bernstein likelihood: alternates a
//! responsibilities pass for p with an inner Newton solve for alpha, the
//! latter restarted from the MELE at every outer iteration.

use alloc::vec::Vec;
use libm::{fabs, log, sqrt};

use crate::bernstein::{self, Degree, MixtureWeights};
use crate::data::TwoSampleData;
use crate::error::{Error, Result};
use crate::linalg;
use crate::logistic::mele_logistic;
use crate::regressor::{dot, RegressorSpec, TiltCoefficients};
use crate::tilt::{TiltTableBuilder, TiltedWeightTable};

/// Stopping rules and iteration caps.
#[derive(Debug, Clone, Copy)]
pub struct EmConfig {
    /// inner Newton step-norm tolerance
    pub eps1: f64,
    /// outer log-likelihood increment tolerance, per observation (the test
    /// compares against `eps2_rel * n`)
    pub eps2_rel: f64,
    /// inner Newton iteration cap
    pub max_newton: usize,
    /// outer EM iteration cap
    pub max_em: usize,
    /// force p_0 = 0 (baseline density vanishes at the left endpoint)
    pub vanish_left: bool,
    /// force p_m = 0 (baseline density vanishes at the right endpoint)
    pub vanish_right: bool,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            eps1: 1e-7,
            eps2_rel: 1e-7,
            max_newton: 100,
            max_em: 500,
            vanish_left: false,
            vanish_right: false,
        }
    }
}

/// Uniform start, minus any components pinned to zero by the boundary
/// constraints. Zero weights stay zero through every EM pass, so setting
/// them once is enough.
pub(crate) fn initial_p(md: usize, cfg: &EmConfig) -> Result<Vec<f64>> {
    let mut free = md + 1;
    if cfg.vanish_left {
        free -= 1;
    }
    if cfg.vanish_right && md > 0 {
        free -= 1;
    }
    if free == 0 {
        return Err(Error::Domain(alloc::format!(
            "degree {md} leaves no free mixture components under the boundary constraints"
        )));
    }
    let mut p = alloc::vec![1.0 / free as f64; md + 1];
    if cfg.vanish_left {
        p[0] = 0.0;
    }
    if cfg.vanish_right && md > 0 {
        p[md] = 0.0;
    }
    Ok(p)
}

/// Converged estimate for one degree.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub m: Degree,
    pub alpha: TiltCoefficients,
    pub p: MixtureWeights,
    pub loglik: f64,
    pub em_iterations: usize,
    /// |sum_j p_j w_j(alpha) - 1|
    pub constraint_residual: f64,
}

/// l(alpha, p) = sum over pooled z of log f_m(z; p) + alpha' sum over the
/// tilted sample of r~.
pub fn loglik(
    data: &TwoSampleData,
    m: Degree,
    p: &MixtureWeights,
    alpha: &TiltCoefficients,
    spec: &RegressorSpec,
) -> Result<f64> {
    let basis = basis_matrix(m, data);
    loglik_with(&basis, data, p, alpha, spec)
}

/// Basis rows at every pooled observation, baseline sample first.
fn basis_matrix(m: Degree, data: &TwoSampleData) -> Vec<Vec<f64>> {
    let md = m.get();
    let ln_choose = bernstein::ln_choose_table(md);
    data.pooled()
        .map(|z| {
            let mut row = alloc::vec![0.0; md + 1];
            bernstein::beta_basis_row_with(&ln_choose, md, z, &mut row);
            row
        })
        .collect()
}

fn loglik_with(
    basis: &[Vec<f64>],
    data: &TwoSampleData,
    p: &MixtureWeights,
    alpha: &TiltCoefficients,
    spec: &RegressorSpec,
) -> Result<f64> {
    let mut ll = 0.0;
    for (row, z) in basis.iter().zip(data.pooled()) {
        let f: f64 = row.iter().zip(p.as_slice()).map(|(b, pj)| b * pj).sum();
        if !(f > 0.0) {
            return Err(Error::DegenerateDensity { point: z });
        }
        ll += log(f);
    }
    for u in data.x1() {
        ll += dot(alpha.as_slice(), &spec.r_tilde_unit(*u));
    }
    Ok(ll)
}

/// T_k = sum over pooled z of p_k beta_mk(z) / f_m(z; p).
fn responsibilities(basis: &[Vec<f64>], points: &[f64], p: &[f64], out: &mut [f64]) -> Result<()> {
    out.fill(0.0);
    for (row, z) in basis.iter().zip(points) {
        let f: f64 = row.iter().zip(p).map(|(b, pj)| b * pj).sum();
        if !(f > 0.0) {
            return Err(Error::DegenerateDensity { point: *z });
        }
        for ((o, b), pj) in out.iter_mut().zip(row).zip(p) {
            *o += pj * b / f;
        }
    }
    Ok(())
}

/// Inner Newton for alpha at fixed responsibilities, started from `alpha0`.
/// Returns the solution together with its weight table.
fn newton_alpha(
    builder: &TiltTableBuilder,
    data: &TwoSampleData,
    r1_sum: &[f64],
    t: &[f64],
    alpha0: &TiltCoefficients,
    cfg: &EmConfig,
) -> Result<(TiltCoefficients, TiltedWeightTable)> {
    let n0 = data.n0() as f64;
    let n1 = data.n1() as f64;
    let dim = alpha0.len();
    let mut alpha = alpha0.clone();
    let mut table = builder.table_at(&alpha)?;
    for _ in 0..cfg.max_newton {
        let mut h = r1_sum.to_vec();
        let mut jac = alloc::vec![0.0; dim * dim];
        for (j, tj) in t.iter().enumerate() {
            let den = n0 + n1 * table.w[j];
            let dwj = &table.dw[j];
            let s1 = n1 * tj / den;
            let s2 = n1 * tj / (den * den);
            for i in 0..dim {
                h[i] -= s1 * dwj[i];
                for k in 0..dim {
                    jac[i * dim + k] -=
                        s2 * (den * table.ddw_at(j, i, k) - n1 * dwj[i] * dwj[k]);
                }
            }
        }
        let step = linalg::solve(&mut jac, &mut h)?;
        let norm = sqrt(step.iter().map(|s| s * s).sum());
        // back off (up to 20 halvings) if the full step leaves the domain
        // where the tilt integrals are computable
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let cand = TiltCoefficients::new(
                alpha
                    .as_slice()
                    .iter()
                    .zip(&step)
                    .map(|(a, s)| a - scale * s)
                    .collect(),
            )?;
            match builder.table_at(&cand) {
                Ok(tab) => {
                    accepted = Some((cand, tab));
                    break;
                }
                Err(Error::TiltOverflow { .. }) => scale *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let (cand, tab) = match accepted {
            Some(v) => v,
            None => {
                return Err(Error::TiltOverflow { exponent: f64::INFINITY });
            }
        };
        alpha = cand;
        table = tab;
        if scale * norm < cfg.eps1 {
            break;
        }
    }
    Ok((alpha, table))
}

/// Per-iteration diagnostics from [`em_fit_traced`], one entry per EM pass.
#[derive(Debug, Clone, Default)]
pub struct EmTrace {
    /// log-likelihood after each pass
    pub logliks: Vec<f64>,
    /// sum_k T_k, which the fixed-point identity pins at n
    pub t_sums: Vec<f64>,
    /// n0 sum_k p_k + n1 sum_k p_k w_k, also pinned at n
    pub constraint_sums: Vec<f64>,
}

/// Fit the full model at degree `m`, starting alpha from the supplied MELE.
pub fn em_fit(
    data: &TwoSampleData,
    m: Degree,
    spec: &RegressorSpec,
    alpha_tilde: &TiltCoefficients,
    cfg: &EmConfig,
) -> Result<FitResult> {
    em_fit_impl(data, m, spec, alpha_tilde, cfg, None)
}

/// [`em_fit`] with per-iteration diagnostics for invariant checks.
pub fn em_fit_traced(
    data: &TwoSampleData,
    m: Degree,
    spec: &RegressorSpec,
    alpha_tilde: &TiltCoefficients,
    cfg: &EmConfig,
) -> Result<(FitResult, EmTrace)> {
    let mut trace = EmTrace::default();
    let fit = em_fit_impl(data, m, spec, alpha_tilde, cfg, Some(&mut trace))?;
    Ok((fit, trace))
}

fn em_fit_impl(
    data: &TwoSampleData,
    m: Degree,
    spec: &RegressorSpec,
    alpha_tilde: &TiltCoefficients,
    cfg: &EmConfig,
    mut trace: Option<&mut EmTrace>,
) -> Result<FitResult> {
    if alpha_tilde.len() != spec.dim() + 1 {
        return Err(Error::Domain(alloc::format!(
            "alpha has {} components, regressor needs {}",
            alpha_tilde.len(),
            spec.dim() + 1
        )));
    }
    let n0 = data.n0() as f64;
    let n1 = data.n1() as f64;
    let n = data.n() as f64;
    let md = m.get();

    let basis = basis_matrix(m, data);
    let builder = TiltTableBuilder::with_default_rule(m, spec);
    let r1_sum = {
        let mut s = alloc::vec![0.0; spec.dim() + 1];
        for u in data.x1() {
            for (si, ri) in s.iter_mut().zip(spec.r_tilde_unit(*u)) {
                *si += ri;
            }
        }
        s
    };

    let mut p = initial_p(md, cfg)?;
    let mut t = alloc::vec![0.0; md + 1];
    let mut alpha = alpha_tilde.clone();
    let mut table = builder.table_at(&alpha)?;
    let mut ll = loglik_with(&basis, data, &MixtureWeights::from_em_iterate(p.clone())?, &alpha, spec)?;
    let points: Vec<f64> = data.pooled().collect();
    let mut iterations = cfg.max_em;
    for s in 0..cfg.max_em {
        responsibilities(&basis, &points, &p, &mut t)?;
        let (al, tab) = newton_alpha(&builder, data, &r1_sum, &t, alpha_tilde, cfg)?;
        alpha = al;
        table = tab;
        for (pk, (tk, wk)) in p.iter_mut().zip(t.iter().zip(&table.w)) {
            *pk = tk / (n0 + n1 * wk);
        }
        let ll_new =
            loglik_with(&basis, data, &MixtureWeights::from_em_iterate(p.clone())?, &alpha, spec)?;
        if let Some(tr) = trace.as_deref_mut() {
            tr.logliks.push(ll_new);
            tr.t_sums.push(t.iter().sum());
            tr.constraint_sums.push(
                n0 * p.iter().sum::<f64>()
                    + n1 * p.iter().zip(&table.w).map(|(pj, wj)| pj * wj).sum::<f64>(),
            );
        }
        // the start is infeasible (uniform p need not satisfy the weight
        // constraint), so the first increment can be negative; only trust the
        // stopping rule once two feasible iterates exist
        if s >= 1 && ll_new - ll < cfg.eps2_rel * n {
            ll = ll_new;
            iterations = s + 1;
            break;
        }
        ll = ll_new;
    }

    let residual = fabs(p.iter().zip(&table.w).map(|(pj, wj)| pj * wj).sum::<f64>() - 1.0);
    Ok(FitResult {
        m,
        alpha,
        p: MixtureWeights::from_em_iterate(p)?,
        loglik: ll,
        em_iterations: iterations,
        constraint_residual: residual,
    })
}

/// Fit with the MELE computed internally.
pub fn em_fit_with_mele(
    data: &TwoSampleData,
    m: Degree,
    spec: &RegressorSpec,
    cfg: &EmConfig,
) -> Result<FitResult> {
    let alpha_tilde = mele_logistic(data, spec)?;
    em_fit(data, m, spec, &alpha_tilde, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn toy_data() -> (TwoSampleData, RegressorSpec) {
        // deterministic low-discrepancy-ish points with the tilted group
        // shifted right
        let x0: Vec<f64> = (1..=30).map(|i| (i as f64 * 0.618034).fract() * 0.8 + 0.05).collect();
        let x1: Vec<f64> = (1..=25).map(|i| (i as f64 * 0.414214).fract() * 0.6 + 0.35).collect();
        let spec = RegressorSpec::polynomial(1, 0.0, 1.0).unwrap();
        (TwoSampleData::new(x0, x1).unwrap(), spec)
    }

    #[test]
    fn loglik_zero_alpha_uniform_p_is_zero() {
        let (data, spec) = toy_data();
        let m = Degree::new(0).unwrap();
        let p = MixtureWeights::uniform(m);
        let ll = loglik(&data, m, &p, &TiltCoefficients::zeros(1), &spec).unwrap();
        // f_0(x; p) = 1 everywhere, no tilt term
        assert_relative_eq!(ll, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn responsibilities_sum_to_n() {
        let (data, _) = toy_data();
        let m = Degree::new(6).unwrap();
        let basis = basis_matrix(m, &data);
        let points: Vec<f64> = data.pooled().collect();
        let p = vec![1.0 / 7.0; 7];
        let mut t = vec![0.0; 7];
        responsibilities(&basis, &points, &p, &mut t).unwrap();
        assert_relative_eq!(t.iter().sum::<f64>(), data.n() as f64, epsilon = 1e-10);
    }

    #[test]
    fn em_invariants_hold() {
        let (data, spec) = toy_data();
        let m = Degree::new(6).unwrap();
        let fit = em_fit_with_mele(&data, m, &spec, &EmConfig::default()).unwrap();
        // constraint sum p_j w_j = 1 at the solution
        assert!(fit.constraint_residual < 1e-6, "residual {}", fit.constraint_residual);
        // p is a proper weight vector
        let s: f64 = fit.p.as_slice().iter().sum();
        assert_relative_eq!(s, 1.0, epsilon = 1e-6);
        assert!(fit.p.as_slice().iter().all(|&pj| pj >= 0.0));
        // fitted ll beats the infeasible uniform start once feasible
        let mele = mele_logistic(&data, &spec).unwrap();
        let fit2 = em_fit(&data, m, &spec, &mele, &EmConfig::default()).unwrap();
        assert_relative_eq!(fit.loglik, fit2.loglik, epsilon = 1e-9);
    }

    #[test]
    fn monotone_loglik_after_first_iteration() {
        let (data, spec) = toy_data();
        let m = Degree::new(5).unwrap();
        let mele = mele_logistic(&data, &spec).unwrap();
        // run EM manually for a few steps and track ll
        let cfg = EmConfig { max_em: 1, eps2_rel: -1.0, ..EmConfig::default() };
        // ll after k iterations, k = 1..6; eps2_rel < 0 disables early stop so
        // max_em caps the count exactly
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=6 {
            let fit = em_fit(&data, m, &spec, &mele, &EmConfig { max_em: k, ..cfg }).unwrap();
            if k >= 2 {
                assert!(
                    fit.loglik >= prev - 1e-9,
                    "ll decreased: {} -> {} at k = {k}",
                    prev,
                    fit.loglik
                );
            }
            prev = fit.loglik;
        }
    }

    #[test]
    fn vanishing_boundary_components_stay_zero() {
        let (data, spec) = toy_data();
        let m = Degree::new(5).unwrap();
        let cfg = EmConfig { vanish_left: true, vanish_right: true, ..EmConfig::default() };
        let fit = em_fit_with_mele(&data, m, &spec, &cfg).unwrap();
        assert_eq!(fit.p.as_slice()[0], 0.0);
        assert_eq!(fit.p.as_slice()[5], 0.0);
        assert!(fit.constraint_residual < 1e-6);
        // degree 0 with a pinned component is unusable
        assert!(initial_p(0, &cfg).is_err());
    }

    #[test]
    fn degree_zero_recovers_tilt_only_model() {
        let (data, spec) = toy_data();
        let m = Degree::new(0).unwrap();
        let fit = em_fit_with_mele(&data, m, &spec, &EmConfig::default()).unwrap();
        assert_relative_eq!(fit.p.as_slice()[0], 1.0, epsilon = 1e-9);
        // w_0(alpha) must satisfy the constraint exactly: w_0 = 1 is forced
        // only through p_0 w_0 = 1
        assert!(fit.constraint_residual < 1e-8);
    }
}
