//! Tiny dense solver for the (d+1)-dimensional Newton systems. Gaussian
//! elimination with partial pivoting; the systems here are 2x2 or 3x3 almost
//! always, so nothing fancier is warranted.

use alloc::vec::Vec;
use libm::fabs;

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-300;

/// Solve A x = b for square A stored row major. A and b are consumed as
/// scratch copies by the caller.
pub(crate) fn solve(a: &mut [f64], b: &mut [f64]) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let mut piv = col;
        let mut best = fabs(a[col * n + col]);
        for r in (col + 1)..n {
            let v = fabs(a[r * n + col]);
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < PIVOT_EPS || !best.is_finite() {
            return Err(Error::SingularSystem);
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in (row + 1)..n {
            s -= a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
        if !x[row].is_finite() {
            return Err(Error::SingularSystem);
        }
    }
    Ok(x)
}
