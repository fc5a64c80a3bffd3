//! Two-sample data container on the unit interval.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::regressor::RegressorSpec;

/// Case-control samples transformed to [0,1]. Group 0 is the baseline
/// (controls), group 1 the tilted sample (cases).
#[derive(Debug, Clone)]
pub struct TwoSampleData {
    x0: Vec<f64>,
    x1: Vec<f64>,
}

impl TwoSampleData {
    /// Build from samples already on [0,1].
    pub fn new(x0: Vec<f64>, x1: Vec<f64>) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::EmptyGroup { group: 0 });
        }
        if x1.is_empty() {
            return Err(Error::EmptyGroup { group: 1 });
        }
        for (g, xs) in [(0u8, &x0), (1u8, &x1)] {
            for &x in xs.iter() {
                if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                    return Err(Error::Domain(alloc::format!(
                        "group {g} observation {x} outside [0,1]"
                    )));
                }
            }
        }
        Ok(TwoSampleData { x0, x1 })
    }

    /// Build from original-scale samples, rescaling by the regressor support.
    pub fn from_original(y0: &[f64], y1: &[f64], spec: &RegressorSpec) -> Result<Self> {
        let (a, b) = spec.support();
        let map = |ys: &[f64], g: u8| -> Result<Vec<f64>> {
            ys.iter()
                .map(|&y| {
                    if !y.is_finite() || y < a || y > b {
                        Err(Error::Domain(alloc::format!(
                            "group {g} observation {y} outside support [{a}, {b}]"
                        )))
                    } else {
                        Ok(spec.to_unit(y))
                    }
                })
                .collect()
        };
        TwoSampleData::new(map(y0, 0)?, map(y1, 1)?)
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    pub fn n0(&self) -> usize {
        self.x0.len()
    }

    pub fn n1(&self) -> usize {
        self.x1.len()
    }

    pub fn n(&self) -> usize {
        self.x0.len() + self.x1.len()
    }

    /// Baseline sample first, then the tilted sample.
    pub fn pooled(&self) -> impl Iterator<Item = f64> + '_ {
        self.x0.iter().chain(self.x1.iter()).copied()
    }

    /// Data with the group roles exchanged.
    pub fn swapped(&self) -> Self {
        TwoSampleData { x0: self.x1.clone(), x1: self.x0.clone() }
    }
}
