//! Dense two-phase simplex and the no-signalling LP over the 24 vertices.

use alloc::vec;
use alloc::vec::Vec;

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::vertices::VertexCatalog;

const EPS: f64 = 1e-11;

/// `max c·q` subject to `A q = b`, `q ≥ 0`. Returns `(value, q)`.
///
/// Dense tableau, Bland's rule. Redundant equality rows are tolerated.
pub fn simplex_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (m, n) = (a.len(), c.len());
    // tableau columns: n originals, m artificials, rhs
    let w = n + m + 1;
    let mut t = vec![vec![0.0; w]; m + 1];
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = s * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][w - 1] = s * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase 1: minimize the artificial sum, i.e. maximize its negative
    for j in 0..w {
        if j < n || j == w - 1 {
            t[m][j] = -(0..m).map(|i| t[i][j]).sum::<f64>();
        }
    }
    pivot_loop(&mut t, &mut basis, n + m)?;
    if t[m][w - 1] < -1e-9 {
        return Err(Error::Infeasible);
    }
    // drive remaining artificials out of the basis
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }

    // phase 2 on the original columns
    for j in 0..w {
        t[m][j] = 0.0;
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    for i in 0..m {
        let k = basis[i];
        if k < n && c[k] != 0.0 {
            let f = t[m][k];
            for j in 0..w {
                t[m][j] -= f * t[i][j];
            }
        }
    }
    // artificials stuck in the basis sit on redundant rows and stay at zero
    for i in 0..m {
        if basis[i] >= n {
            for j in n..n + m {
                if j != basis[i] {
                    t[i][j] = 0.0;
                }
            }
        }
    }
    pivot_loop(&mut t, &mut basis, n)?;
    let mut q = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            q[basis[i]] = t[i][w - 1];
        }
    }
    Ok((t[m][w - 1], q))
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, col: usize) {
    let w = t[0].len();
    let p = t[r][col];
    for j in 0..w {
        t[r][j] /= p;
    }
    for i in 0..t.len() {
        if i != r {
            let f = t[i][col];
            if f != 0.0 {
                for j in 0..w {
                    t[i][j] -= f * t[r][j];
                }
            }
        }
    }
    basis[r] = col;
}

// Bland's rule over the first `ncols` columns.
fn pivot_loop(t: &mut [Vec<f64>], basis: &mut [usize], ncols: usize) -> Result<()> {
    let m = t.len() - 1;
    let w = t[0].len();
    for _ in 0..10_000 {
        let Some(col) = (0..ncols).find(|&j| t[m][j] < -EPS) else {
            return Ok(());
        };
        let mut row = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][col] > EPS {
                let r = t[i][w - 1] / t[i][col];
                if r < best - 1e-14 || (r <= best + 1e-14 && row.is_some_and(|k: usize| basis[i] < basis[k])) {
                    best = r;
                    row = Some(i);
                }
            }
        }
        let Some(row) = row else {
            return Err(Error::Invalid("unbounded LP".into()));
        };
        pivot(t, basis, row, col);
    }
    Err(Error::MaxIter)
}

/// Maximizes `objective · P` over convex mixtures of the 24 NS vertices subject
/// to `f · P = v` for each `(f, v)` in `equalities`. Returns the value and the
/// vertex weights (PR boxes first).
pub fn ns_lp(objective: &[f64; 16], equalities: &[([f64; 16], f64)]) -> Result<(f64, Vec<f64>)> {
    let verts = VertexCatalog::new().all();
    let dot = |f: &[f64; 16], b: &Behavior| f.iter().zip(b.probs()).map(|(x, y)| x * y).sum::<f64>();
    let c: Vec<f64> = verts.iter().map(|v| dot(objective, v)).collect();
    let mut a = vec![vec![1.0; 24]];
    let mut b = vec![1.0];
    for (f, val) in equalities {
        a.push(verts.iter().map(|v| dot(f, v)).collect());
        b.push(*val);
    }
    simplex_max(&c, &a, &b)
}
