//! Composite Gauss-Legendre quadrature on [0, 1].

use alloc::vec::Vec;
use libm::{cos, fabs};

use crate::error::{Error, Result};

const PI: f64 = core::f64::consts::PI;

/// Composite Gauss-Legendre rule: `panels` equal panels over [0,1] with
/// `nodes_per_panel` Gauss nodes each. Weights sum to 1.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    panels: usize,
    nodes_per_panel: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(panels: usize, nodes_per_panel: usize) -> Result<Self> {
        if panels == 0 || nodes_per_panel < 2 {
            return Err(Error::Domain(alloc::format!(
                "quadrature rule needs panels >= 1 and nodes >= 2, got {panels} x {nodes_per_panel}"
            )));
        }
        let (ref_nodes, ref_weights) = gauss_legendre_unit(nodes_per_panel);
        let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
        let mut weights = Vec::with_capacity(panels * nodes_per_panel);
        let width = 1.0 / panels as f64;
        for p in 0..panels {
            let lo = p as f64 * width;
            for (x, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(lo + x * width);
                weights.push(w * width);
            }
        }
        let rule = QuadratureRule { panels, nodes_per_panel, nodes, weights };
        rule.verify()?;
        Ok(rule)
    }

    /// Default rule for a degree-`m` basis and a degree-`d` polynomial tilt:
    /// max(4, ceil((m+d)/8)) panels of 16 nodes.
    pub fn for_degree(m: usize, d: usize) -> Self {
        let panels = ((m + d) + 7) / 8;
        let panels = panels.max(4);
        QuadratureRule::new(panels, 16).expect("default rule parameters are valid")
    }

    /// The same rule with twice the panels, for refinement checks.
    pub fn refined(&self) -> Self {
        QuadratureRule::new(self.panels * 2, self.nodes_per_panel)
            .expect("refined rule parameters are valid")
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrate `f` over [0, 1].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integrate `f` over [0, hi] by rescaling the rule.
    pub fn integrate_to<F: FnMut(f64) -> f64>(&self, hi: f64, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| hi * w * f(hi * x))
            .sum()
    }

    // Weights must sum to 1 and the single-panel rule must integrate
    // x^(2q-1) exactly, q = nodes per panel.
    fn verify(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if fabs(sum - 1.0) > 1e-14 {
            return Err(Error::Domain(alloc::format!(
                "quadrature weights sum to {sum}, expected 1"
            )));
        }
        let k = 2 * self.nodes_per_panel - 1;
        let approx = self.integrate(|x| libm::pow(x, k as f64));
        let exact = 1.0 / (k as f64 + 1.0);
        if fabs(approx - exact) > 1e-13 {
            return Err(Error::Domain(alloc::format!(
                "rule not exact at polynomial order {k}: {approx} vs {exact}"
            )));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on [0, 1], by Newton iteration on the
/// Legendre polynomial recurrence.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // initial guess on [-1, 1]
        let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if fabs(dx) < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Value and derivative of the degree-n Legendre polynomial at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
