//! Small dense linear algebra: stationary distributions and irreducibility.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num;

/// Stationary distribution of a row-stochastic matrix (row-major, n x n).
///
/// Solves pi (P - I) = 0 with the normalization constraint substituted for
/// the last equation, by Gaussian elimination with partial pivoting.
pub fn stationary(transition: &[f64], n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(transition.len(), n * n);
    // Column j of the system is the j-th stationarity equation
    // sum_i pi_i (P[i][j] - delta_ij) = 0; build A with A[j][i] = P[i][j] - d.
    let mut a = vec![0.0f64; n * n];
    let mut b = vec![0.0f64; n];
    for j in 0..n {
        for i in 0..n {
            a[j * n + i] = transition[i * n + j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    // Replace the last equation with sum_i pi_i = 1.
    for i in 0..n {
        a[(n - 1) * n + i] = 1.0;
    }
    b[n - 1] = 1.0;
    gauss_solve(&mut a, &mut b, n)?;
    // Clip tiny negative round-off and renormalize.
    let mut sum = 0.0;
    for x in b.iter_mut() {
        if *x < 0.0 && *x > -1e-12 {
            *x = 0.0;
        }
        sum += *x;
    }
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(Error::SingularSystem);
    }
    for x in b.iter_mut() {
        *x /= sum;
    }
    Ok(b)
}

fn gauss_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    for col in 0..n {
        let mut pivot = col;
        let mut best = num::abs(a[col * n + col]);
        for row in col + 1..n {
            let v = num::abs(a[row * n + col]);
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best < 1e-13 {
            return Err(Error::SingularSystem);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// Whether the directed graph of strictly positive entries is strongly
/// connected (single SCC), i.e. the chain is irreducible.
pub fn is_irreducible(transition: &[f64], n: usize) -> bool {
    if n == 0 {
        return false;
    }
    reaches_all(transition, n, false) && reaches_all(transition, n, true)
}

// DFS from state 0 along forward or reversed edges.
fn reaches_all(transition: &[f64], n: usize, reversed: bool) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            let p = if reversed {
                transition[v * n + u]
            } else {
                transition[u * n + v]
            };
            if p > 0.0 && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().all(|&s| s)
}
