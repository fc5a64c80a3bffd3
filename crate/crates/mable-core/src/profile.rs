//! Profile estimate of p at the fixed MELE tilt: EM on p alone with the
//! constraint sum_j p_j w_j(alpha~) = 1 enforced through a Lagrange
//! multiplier solved by damped Newton at each pass.

use libm::fabs;

use crate::bernstein::{Degree, MixtureWeights};
use crate::data::TwoSampleData;
use crate::em::{EmConfig, FitResult};
use crate::error::{Error, Result};
use crate::regressor::{RegressorSpec, TiltCoefficients};
use crate::tilt::TiltTableBuilder;

const LAMBDA_NEWTON_CAP: usize = 100;
const LAMBDA_HALVINGS: usize = 30;
/// below this, every w_j is numerically 1 and the multiplier is irrelevant
const W_FLAT_TOL: f64 = 1e-12;

/// Solve psi(lambda) = sum_j T_j (w_j - 1) / (n + lambda (w_j - 1)) = 0.
fn solve_lambda(t: &[f64], wm1: &[f64], n: f64, n1: f64) -> Result<f64> {
    if wm1.iter().all(|v| fabs(*v) < W_FLAT_TOL) {
        return Ok(0.0);
    }
    let mut lam = n1;
    for _ in 0..LAMBDA_NEWTON_CAP {
        let mut psi = 0.0;
        let mut dpsi = 0.0;
        for (tj, vj) in t.iter().zip(wm1) {
            let den = n + lam * vj;
            if den <= 0.0 {
                return Err(Error::InfeasibleLambda);
            }
            psi += tj * vj / den;
            dpsi -= tj * vj * vj / (den * den);
        }
        if fabs(psi) < 1e-12 * n {
            return Ok(lam);
        }
        if dpsi == 0.0 || !dpsi.is_finite() {
            return Err(Error::InfeasibleLambda);
        }
        let full = lam - psi / dpsi;
        // damp until every denominator stays positive
        let mut h = 1.0;
        let mut ok = false;
        for _ in 0..LAMBDA_HALVINGS {
            let cand = lam + h * (full - lam);
            if wm1.iter().all(|v| n + cand * v > 0.0) {
                ok = true;
                break;
            }
            h *= 0.5;
        }
        if !ok {
            return Err(Error::InfeasibleLambda);
        }
        lam += h * (full - lam);
    }
    // When no p on the simplex satisfies sum_j p_j w_j = 1 (all w_j on one
    // side of 1) the multiplier runs away and psi decays like n/lambda; the
    // capped iterate is still the correct boundary answer for the penalized
    // objective, so it is returned rather than rejected. Degree selection
    // relies on the resulting (very low) log-likelihood to mark such degrees.
    Ok(lam)
}

/// Profile fit: p~ at fixed alpha~, same outer stopping rule as the full EM.
pub fn profile_p_fit(
    data: &TwoSampleData,
    m: Degree,
    spec: &RegressorSpec,
    alpha_tilde: &TiltCoefficients,
    cfg: &EmConfig,
) -> Result<FitResult> {
    let n = data.n() as f64;
    let n1 = data.n1() as f64;
    let md = m.get();

    let builder = TiltTableBuilder::with_default_rule(m, spec);
    let table = builder.table_at(alpha_tilde)?;
    let wm1: alloc::vec::Vec<f64> = table.w.iter().map(|w| w - 1.0).collect();

    let ln_choose = crate::bernstein::ln_choose_table(md);
    let basis: alloc::vec::Vec<alloc::vec::Vec<f64>> = data
        .pooled()
        .map(|z| {
            let mut row = alloc::vec![0.0; md + 1];
            crate::bernstein::beta_basis_row_with(&ln_choose, md, z, &mut row);
            row
        })
        .collect();

    let mut p = crate::em::initial_p(md, cfg)?;
    let mut t = alloc::vec![0.0; md + 1];
    let points: alloc::vec::Vec<f64> = data.pooled().collect();
    // the tilt contribution to the loglik is fixed along the profile path
    let tilt_term: f64 = data
        .x1()
        .iter()
        .map(|u| crate::regressor::dot(alpha_tilde.as_slice(), &spec.r_tilde_unit(*u)))
        .sum();
    let profile_ll = |p: &[f64]| -> Result<f64> {
        let mut ll = tilt_term;
        for (row, z) in basis.iter().zip(&points) {
            let f: f64 = row.iter().zip(p).map(|(b, pj)| b * pj).sum();
            if !(f > 0.0) {
                return Err(Error::DegenerateDensity { point: *z });
            }
            ll += libm::log(f);
        }
        Ok(ll)
    };
    let mut ll = profile_ll(&p)?;
    let mut iterations = cfg.max_em;
    for s in 0..cfg.max_em {
        t.fill(0.0);
        for (row, z) in basis.iter().zip(&points) {
            let f: f64 = row.iter().zip(&p).map(|(b, pj)| b * pj).sum();
            if !(f > 0.0) {
                return Err(Error::DegenerateDensity { point: *z });
            }
            for ((tk, bk), pk) in t.iter_mut().zip(row).zip(&p) {
                *tk += pk * bk / f;
            }
        }
        let lam = solve_lambda(&t, &wm1, n, n1)?;
        for (pk, (tk, vk)) in p.iter_mut().zip(t.iter().zip(&wm1)) {
            *pk = tk / (n + lam * vk);
        }
        let ll_new = profile_ll(&p)?;
        // as in the full EM, the uniform start is infeasible; skip the stop
        // test until two feasible iterates exist
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
        alpha: alpha_tilde.clone(),
        p: MixtureWeights::from_profile_iterate(p)?,
        loglik: ll,
        em_iterations: iterations,
        constraint_residual: residual,
    })
}
