//! Tilted-basis quantities: w_mj(alpha), its first and second alpha
//! derivatives, and the tilted density/CDF on both scales.
//!
//! All integrals are composite Gauss-Legendre over [0,1]; a table is computed
//! on a refined rule and cross-checked against the coarse one.

use alloc::vec::Vec;
use libm::{exp, fabs};

use crate::bernstein::{self, Degree, MixtureWeights};
use crate::error::{Error, Result};
use crate::quad::QuadratureRule;
use crate::regressor::{dot, tilt_at, RegressorSpec, TiltCoefficients, TILT_EXPONENT_GUARD};

/// Relative disagreement between coarse and refined rules above which the
/// table is rejected.
const REFINEMENT_TOL: f64 = 1e-9;

/// w_mj(alpha) together with the gradient and Hessian blocks needed by the
/// EM Newton step.
///
/// `dw[j]` has d+1 entries; `ddw[j]` is the (d+1)x(d+1) Hessian stored row
/// major. Since the first component of r~ is the constant 1, `dw[j][0] = w[j]`
/// and `ddw[j][0][i] = dw[j][i]` hold exactly by construction.
#[derive(Debug, Clone)]
pub struct TiltedWeightTable {
    pub w: Vec<f64>,
    pub dw: Vec<Vec<f64>>,
    pub ddw: Vec<Vec<f64>>,
    pub alpha: TiltCoefficients,
}

impl TiltedWeightTable {
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Hessian entry [ddw_j]_{ik}.
    pub fn ddw_at(&self, j: usize, i: usize, k: usize) -> f64 {
        self.ddw[j][i * self.dim() + k]
    }
}

/// Precomputed node data for one (degree, regressor, rule) triple, so that
/// repeated tables along a Newton path share the basis and regressor
/// evaluations. Holds both the base rule and its one-step refinement.
pub struct TiltTableBuilder {
    m: usize,
    d: usize,
    spec: RegressorSpec,
    coarse: NodeCache,
    fine: NodeCache,
}

struct NodeCache {
    /// quadrature weight per node
    qw: Vec<f64>,
    /// r~ rows per node, (d+1) entries each
    rt: Vec<Vec<f64>>,
    /// basis rows per node, (m+1) entries each
    basis: Vec<Vec<f64>>,
}

impl NodeCache {
    fn build(m: usize, spec: &RegressorSpec, rule: &QuadratureRule) -> Self {
        let ln_choose = bernstein::ln_choose_table(m);
        let mut rt = Vec::with_capacity(rule.nodes().len());
        let mut basis = Vec::with_capacity(rule.nodes().len());
        for &u in rule.nodes() {
            rt.push(spec.r_tilde_unit(u));
            let mut row = alloc::vec![0.0; m + 1];
            bernstein::beta_basis_row_with(&ln_choose, m, u, &mut row);
            basis.push(row);
        }
        NodeCache { qw: rule.weights().to_vec(), rt, basis }
    }

    /// Accumulate w, dw, ddw at the given alpha. Returns Err on tilt overflow.
    fn accumulate(&self, m: usize, d: usize, alpha: &[f64]) -> Result<Table> {
        let dim = d + 1;
        let mut w = alloc::vec![0.0; m + 1];
        let mut dw = alloc::vec![alloc::vec![0.0; dim]; m + 1];
        let mut ddw = alloc::vec![alloc::vec![0.0; dim * dim]; m + 1];
        for ((qw, rt), basis) in self.qw.iter().zip(&self.rt).zip(&self.basis) {
            let e = dot(alpha, rt);
            if fabs(e) > TILT_EXPONENT_GUARD {
                return Err(Error::TiltOverflow { exponent: e });
            }
            let g = qw * exp(e);
            for j in 0..=m {
                let base = basis[j] * g;
                if base == 0.0 {
                    continue;
                }
                w[j] += base;
                let dwj = &mut dw[j];
                let ddwj = &mut ddw[j];
                for i in 0..dim {
                    let bi = base * rt[i];
                    dwj[i] += bi;
                    for k in i..dim {
                        ddwj[i * dim + k] += bi * rt[k];
                    }
                }
            }
        }
        // mirror the upper triangle
        for ddwj in &mut ddw {
            for i in 0..dim {
                for k in 0..i {
                    ddwj[i * dim + k] = ddwj[k * dim + i];
                }
            }
        }
        Ok(Table { w, dw, ddw })
    }
}

struct Table {
    w: Vec<f64>,
    dw: Vec<Vec<f64>>,
    ddw: Vec<Vec<f64>>,
}

impl TiltTableBuilder {
    pub fn new(m: Degree, spec: &RegressorSpec, rule: &QuadratureRule) -> Self {
        let md = m.get();
        let d = spec.dim();
        TiltTableBuilder {
            m: md,
            d,
            spec: spec.clone(),
            coarse: NodeCache::build(md, spec, rule),
            fine: NodeCache::build(md, spec, &rule.refined()),
        }
    }

    /// Default rule for the degree and regressor dimension.
    pub fn with_default_rule(m: Degree, spec: &RegressorSpec) -> Self {
        let rule = QuadratureRule::for_degree(m.get(), spec.dim());
        Self::new(m, spec, &rule)
    }

    pub fn degree(&self) -> Degree {
        Degree::new(self.m).expect("degree validated at construction")
    }

    pub fn spec(&self) -> &RegressorSpec {
        &self.spec
    }

    /// Compute the table at `alpha`, refined rule cross-checked against the
    /// coarse one.
    pub fn table_at(&self, alpha: &TiltCoefficients) -> Result<TiltedWeightTable> {
        if alpha.len() != self.d + 1 {
            return Err(Error::Domain(alloc::format!(
                "alpha has {} components, regressor needs {}",
                alpha.len(),
                self.d + 1
            )));
        }
        let fine = self.fine.accumulate(self.m, self.d, alpha.as_slice())?;
        let coarse = self.coarse.accumulate(self.m, self.d, alpha.as_slice())?;
        let mut worst = 0.0f64;
        for (wf, wc) in fine.w.iter().zip(&coarse.w) {
            let scale = fabs(*wf).max(1e-30);
            let rel = fabs(wf - wc) / scale;
            if rel > worst {
                worst = rel;
            }
        }
        if worst > REFINEMENT_TOL {
            return Err(Error::QuadratureNonconvergence { rel_diff: worst });
        }
        Ok(TiltedWeightTable { w: fine.w, dw: fine.dw, ddw: fine.ddw, alpha: alpha.clone() })
    }
}

/// Convenience one-shot table with the default rule.
pub fn weight_table(
    m: Degree,
    spec: &RegressorSpec,
    alpha: &TiltCoefficients,
    rule: &QuadratureRule,
) -> Result<TiltedWeightTable> {
    TiltTableBuilder::new(m, spec, rule).table_at(alpha)
}

/// Tilted mixture density f_m(u; alpha, p) = f_m(u; p) exp{alpha' r~}.
pub fn tilted_density(
    m: Degree,
    p: &MixtureWeights,
    spec: &RegressorSpec,
    alpha: &TiltCoefficients,
    u: f64,
) -> Result<f64> {
    let f = bernstein::mixture_density(m, p, u)?;
    Ok(f * tilt_at(spec, alpha, u)?)
}

/// Tilted CDF F_m(x; alpha, p) = sum_j p_j B_mj(x; alpha) by quadrature
/// rescaled to [0, x].
pub fn tilted_cdf(
    m: Degree,
    p: &MixtureWeights,
    spec: &RegressorSpec,
    alpha: &TiltCoefficients,
    x: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(alloc::format!("x = {x} outside [0,1]")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let md = m.get();
    let ln_choose = bernstein::ln_choose_table(md);
    let mut row = alloc::vec![0.0; md + 1];
    let mut acc = 0.0;
    for (&u, &qw) in rule.nodes().iter().zip(rule.weights()) {
        let t = x * u;
        let e = dot(alpha.as_slice(), &spec.r_tilde_unit(t));
        if fabs(e) > TILT_EXPONENT_GUARD {
            return Err(Error::TiltOverflow { exponent: e });
        }
        bernstein::beta_basis_row_with(&ln_choose, md, t, &mut row);
        let mix: f64 = row.iter().zip(p.as_slice()).map(|(b, pj)| b * pj).sum();
        acc += x * qw * mix * exp(e);
    }
    Ok(acc)
}

/// f^_i on the original scale: (1/(b-a)) f_m((y-a)/(b-a); i*alpha, p).
pub fn density_original_scale(
    m: Degree,
    p: &MixtureWeights,
    spec: &RegressorSpec,
    alpha: &TiltCoefficients,
    y: f64,
    group: u8,
) -> Result<f64> {
    let (a, b) = spec.support();
    if !(a..=b).contains(&y) {
        return Err(Error::Domain(alloc::format!("y = {y} outside support [{a}, {b}]")));
    }
    let u = spec.to_unit(y);
    let f = tilted_density(m, p, spec, &alpha.scaled(group), u)?;
    Ok(f / (b - a))
}

/// F^_i on the original scale: F_m((y-a)/(b-a); i*alpha, p).
pub fn cdf_original_scale(
    m: Degree,
    p: &MixtureWeights,
    spec: &RegressorSpec,
    alpha: &TiltCoefficients,
    y: f64,
    group: u8,
    rule: &QuadratureRule,
) -> Result<f64> {
    let (a, b) = spec.support();
    if !(a..=b).contains(&y) {
        return Err(Error::Domain(alloc::format!("y = {y} outside support [{a}, {b}]")));
    }
    tilted_cdf(m, p, spec, &alpha.scaled(group), spec.to_unit(y), rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn unit_spec() -> RegressorSpec {
        RegressorSpec::polynomial(1, 0.0, 1.0).unwrap()
    }

    #[test]
    fn zero_alpha_gives_unit_weights() {
        let m = Degree::new(7).unwrap();
        let spec = unit_spec();
        let rule = QuadratureRule::for_degree(7, 1);
        let t = weight_table(m, &spec, &TiltCoefficients::zeros(1), &rule).unwrap();
        for &w in &t.w {
            assert_relative_eq!(w, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_weights_identity_tilt() {
        // m=1, tilt e^x on [0,1]: w_0 = int 2(1-x)e^x = 2(e-2), w_1 = int 2x e^x = 2
        let m = Degree::new(1).unwrap();
        let spec = unit_spec();
        let alpha = TiltCoefficients::new(alloc::vec![0.0, 1.0]).unwrap();
        let rule = QuadratureRule::for_degree(1, 1);
        let t = weight_table(m, &spec, &alpha, &rule).unwrap();
        assert_relative_eq!(t.w[0], 1.4365636569180902, epsilon = 1e-13);
        assert_relative_eq!(t.w[1], 2.0, epsilon = 1e-13);
    }

    #[test]
    fn table_structural_invariants() {
        let m = Degree::new(5).unwrap();
        let spec = RegressorSpec::polynomial(2, -1.0, 4.0).unwrap();
        let alpha = TiltCoefficients::new(alloc::vec![0.3, -0.2, 0.05]).unwrap();
        let rule = QuadratureRule::for_degree(5, 2);
        let t = weight_table(m, &spec, &alpha, &rule).unwrap();
        for j in 0..=5 {
            assert!(t.w[j] > 0.0);
            assert_relative_eq!(t.dw[j][0], t.w[j], epsilon = 1e-10);
            assert_relative_eq!(t.ddw_at(j, 0, 0), t.w[j], epsilon = 1e-10);
            for i in 0..3 {
                assert_relative_eq!(t.ddw_at(j, 0, i), t.dw[j][i], max_relative = 1e-10);
                for k in 0..3 {
                    assert_relative_eq!(t.ddw_at(j, i, k), t.ddw_at(j, k, i), max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = Degree::new(4).unwrap();
        let spec = RegressorSpec::polynomial(2, 0.0, 2.0).unwrap();
        let rule = QuadratureRule::for_degree(4, 2);
        let builder = TiltTableBuilder::new(m, &spec, &rule);
        let alpha0 = alloc::vec![0.1, 0.4, -0.15];
        let h = 1e-5;
        let t0 = builder.table_at(&TiltCoefficients::new(alpha0.clone()).unwrap()).unwrap();
        for i in 0..3 {
            let mut ap = alpha0.clone();
            let mut am = alpha0.clone();
            ap[i] += h;
            am[i] -= h;
            let tp = builder.table_at(&TiltCoefficients::new(ap).unwrap()).unwrap();
            let tm = builder.table_at(&TiltCoefficients::new(am).unwrap()).unwrap();
            for j in 0..=4 {
                let fd = (tp.w[j] - tm.w[j]) / (2.0 * h);
                assert_relative_eq!(t0.dw[j][i], fd, max_relative = 1e-5);
                for k in 0..3 {
                    let fd2 = (tp.dw[j][k] - tm.dw[j][k]) / (2.0 * h);
                    assert_relative_eq!(t0.ddw_at(j, k, i), fd2, max_relative = 1e-5);
                }
            }
        }
    }

    #[test]
    fn node_doubling_stability() {
        let m = Degree::new(12).unwrap();
        let spec = RegressorSpec::polynomial(1, 0.0, 10.0).unwrap();
        let alpha = TiltCoefficients::new(alloc::vec![-0.9, 0.6]).unwrap();
        let rule = QuadratureRule::for_degree(12, 1);
        let base = weight_table(m, &spec, &alpha, &rule).unwrap();
        let doubled = weight_table(m, &spec, &alpha, &rule.refined()).unwrap();
        for (a, b) in base.w.iter().zip(&doubled.w) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn tilted_density_reduces_and_matches_oracle() {
        let m = Degree::new(3).unwrap();
        let p = MixtureWeights::uniform(m);
        let spec = unit_spec();
        let alpha = TiltCoefficients::new(alloc::vec![0.0, 1.0]).unwrap();
        // uniform baseline: tilted density at u is exp(u)
        assert_relative_eq!(
            tilted_density(m, &p, &spec, &alpha, 0.5).unwrap(),
            0.5f64.exp(),
            epsilon = 1e-12
        );
        // alpha = 0 reduces to the untilted mixture
        let zero = TiltCoefficients::zeros(1);
        let pw = MixtureWeights::new(alloc::vec![0.4, 0.1, 0.3, 0.2]).unwrap();
        assert_relative_eq!(
            tilted_density(m, &pw, &spec, &zero, 0.3).unwrap(),
            bernstein::mixture_density(m, &pw, 0.3).unwrap(),
            epsilon = 1e-15
        );
        // term-by-term oracle
        let x = 0.62;
        let oracle: f64 = (0..=3)
            .map(|j| pw.as_slice()[j] * bernstein::beta_basis(m, j, x).unwrap())
            .sum::<f64>()
            * (alpha.as_slice()[0] + alpha.as_slice()[1] * x).exp();
        assert_relative_eq!(tilted_density(m, &pw, &spec, &alpha, x).unwrap(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn tilted_cdf_basics() {
        let m = Degree::new(4).unwrap();
        let p = MixtureWeights::new(alloc::vec![0.2, 0.3, 0.1, 0.15, 0.25]).unwrap();
        let spec = unit_spec();
        let rule = QuadratureRule::for_degree(4, 1);
        let zero = TiltCoefficients::zeros(1);
        assert_abs_diff_eq!(tilted_cdf(m, &p, &spec, &zero, 0.0, &rule).unwrap(), 0.0);
        // alpha = 0: matches the incomplete-beta CDF
        for &x in &[0.2, 0.5, 0.77, 1.0] {
            assert_relative_eq!(
                tilted_cdf(m, &p, &spec, &zero, x, &rule).unwrap(),
                bernstein::mixture_cdf_untilted(m, &p, x).unwrap(),
                epsilon = 1e-12
            );
        }
        // monotone on a grid
        let alpha = TiltCoefficients::new(alloc::vec![0.2, -0.7]).unwrap();
        let mut prev = 0.0;
        for i in 0..=50 {
            let x = i as f64 / 50.0;
            let v = tilted_cdf(m, &p, &spec, &alpha, x, &rule).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        // cdf at 1 equals sum p_j w_j
        let t = weight_table(m, &spec, &alpha, &rule).unwrap();
        let expect: f64 = p.as_slice().iter().zip(&t.w).map(|(pj, wj)| pj * wj).sum();
        assert_relative_eq!(
            tilted_cdf(m, &p, &spec, &alpha, 1.0, &rule).unwrap(),
            expect,
            epsilon = 1e-10
        );
    }

    #[test]
    fn original_scale_density_and_cdf() {
        let m = Degree::new(3).unwrap();
        let p = MixtureWeights::uniform(m);
        let spec = RegressorSpec::polynomial(1, 2.0, 6.0).unwrap();
        let alpha = TiltCoefficients::new(alloc::vec![0.5, -0.1]).unwrap();
        // untilted uniform baseline: 1/(b-a) everywhere
        for &y in &[2.0, 3.3, 6.0] {
            assert_relative_eq!(
                density_original_scale(m, &p, &spec, &alpha, y, 0).unwrap(),
                0.25,
                epsilon = 1e-12
            );
        }
        // group-0 density integrates to 1 over [a,b] (trapezoid oracle)
        let n = 2000;
        let mut s = 0.0;
        for i in 0..n {
            let y0 = 2.0 + 4.0 * i as f64 / n as f64;
            let y1 = 2.0 + 4.0 * (i + 1) as f64 / n as f64;
            s += 0.5 * (y1 - y0)
                * (density_original_scale(m, &p, &spec, &alpha, y0, 0).unwrap()
                    + density_original_scale(m, &p, &spec, &alpha, y1, 0).unwrap());
        }
        assert_relative_eq!(s, 1.0, epsilon = 1e-6);
        let rule = QuadratureRule::for_degree(3, 1);
        assert_abs_diff_eq!(
            cdf_original_scale(m, &p, &spec, &alpha, 2.0, 1, &rule).unwrap(),
            0.0
        );
        assert!(density_original_scale(m, &p, &spec, &alpha, 1.0, 0).is_err());
    }
}
