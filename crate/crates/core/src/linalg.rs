//! Dense linear algebra for tiny systems (n ≤ 6, least squares up to a few
//! dozen unknowns).  Gaussian elimination with partial pivoting is exact
//! enough at this scale; the condition guard turns near-singular inputs into
//! explicit errors instead of garbage tensors.

use crate::error::{HmxError, Result};
use crate::tensor::{t2, Ten2};

/// Condition-number guard for every inversion in the engine.
pub const COND_LIMIT: f64 = 1e12;

/// LU-decompose (in place, partial pivoting) and solve `A x = b` for several
/// right-hand sides.  Returns the solutions column-stacked like `rhs`.
pub fn solve_multi(a: &Ten2, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.n;
    let mut lu = a.a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let (mut best, mut best_val) = (col, lu[perm[col] * n + col].abs());
        for row in col + 1..n {
            let v = lu[perm[row] * n + col].abs();
            if v > best_val {
                best = row;
                best_val = v;
            }
        }
        perm.swap(col, best);
        let piv = lu[perm[col] * n + col];
        max_pivot = max_pivot.max(piv.abs());
        min_pivot = min_pivot.min(piv.abs());
        if piv.abs() < f64::MIN_POSITIVE * 16.0 {
            return Err(HmxError::Degenerate(format!(
                "singular matrix (zero pivot in column {col})"
            )));
        }
        for row in col + 1..n {
            let f = lu[perm[row] * n + col] / piv;
            lu[perm[row] * n + col] = f;
            for k in col + 1..n {
                let v = lu[perm[col] * n + k];
                lu[perm[row] * n + k] -= f * v;
            }
        }
    }
    let cond_est = max_pivot / min_pivot;
    if cond_est > COND_LIMIT {
        return Err(HmxError::Degenerate(format!(
            "matrix condition estimate {cond_est:.3e} exceeds {COND_LIMIT:.0e}"
        )));
    }
    let mut out = Vec::with_capacity(rhs.len());
    for b in rhs {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[perm[i]];
            for k in 0..i {
                s -= lu[perm[i] * n + k] * y[k];
            }
            y[i] = s;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= lu[perm[i] * n + k] * x[k];
            }
            x[i] = s / lu[perm[i] * n + i];
        }
        out.push(x);
    }
    Ok(out)
}

pub fn solve(a: &Ten2, b: &[f64]) -> Result<Vec<f64>> {
    Ok(solve_multi(a, &[b.to_vec()])?.pop().unwrap())
}

/// Matrix inverse with the condition guard.
pub fn invert(a: &Ten2) -> Result<Ten2> {
    let n = a.n;
    let eye: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let cols = solve_multi(a, &eye)?;
    Ok(t2(n, |i, j| cols[j][i]))
}

/// Cholesky positivity probe: Ok(()) iff `a` is symmetric positive definite.
pub fn cholesky_check(a: &Ten2) -> Result<()> {
    let n = a.n;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(HmxError::Degenerate(format!(
                        "matrix not positive definite (pivot {s:.3e} at row {i})"
                    )));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(())
}

/// One unit vector of the kernel of the `(n-1) × n` matrix `rows` (assumed
/// rank `n-1`).  Deterministic: Gaussian elimination with partial pivoting,
/// the non-pivot column carries the free unit.
#[allow(clippy::explicit_counter_loop)]
pub fn kernel_vector(rows: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    let m = rows.len();
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut pivot_col = vec![usize::MAX; m];
    let mut used_col = vec![false; n];
    let mut r = 0;
    for _ in 0..m {
        // best remaining pivot over all rows >= r and unused columns
        let (mut bi, mut bj, mut bv) = (usize::MAX, usize::MAX, 0.0f64);
        for i in r..m {
            for (j, used) in used_col.iter().enumerate() {
                if !used && a[i][j].abs() > bv {
                    bi = i;
                    bj = j;
                    bv = a[i][j].abs();
                }
            }
        }
        if bv < 1e-12 {
            return Err(HmxError::Chart(format!(
                "projection matrix rank deficient (pivot {bv:.3e})"
            )));
        }
        a.swap(r, bi);
        used_col[bj] = true;
        pivot_col[r] = bj;
        let piv = a[r][bj];
        for i in 0..m {
            if i != r {
                let f = a[i][bj] / piv;
                for j in 0..n {
                    let v = a[r][j];
                    a[i][j] -= f * v;
                }
            }
        }
        r += 1;
    }
    let free = (0..n)
        .find(|&j| !used_col[j])
        .expect("n-1 pivots leave one free column");
    let mut k = vec![0.0; n];
    k[free] = 1.0;
    for i in 0..m {
        let pc = pivot_col[i];
        k[pc] = -a[i][free] / a[i][pc];
    }
    Ok(k)
}

/// Least squares `min ‖A x − b‖₂` by Householder QR; `A` is `rows × cols`
/// with `rows ≥ cols`, returned as the coefficient vector.
pub fn lstsq(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    if rows < cols {
        return Err(HmxError::Config(format!(
            "least squares needs rows >= cols, got {rows} x {cols}"
        )));
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for c in 0..cols {
        let mut norm = 0.0;
        for r in c..rows {
            norm += m[r][c] * m[r][c];
        }
        let norm = norm.sqrt();
        if norm < 1e-14 {
            // column numerically zero: its coefficient stays zero
            continue;
        }
        let alpha = if m[c][c] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (c..rows).map(|r| m[r][c]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 < 1e-30 {
            continue;
        }
        for j in c..cols {
            let s: f64 = (c..rows).map(|r| v[r - c] * m[r][j]).sum();
            let f = 2.0 * s / vnorm2;
            for r in c..rows {
                m[r][j] -= f * v[r - c];
            }
        }
        let s: f64 = (c..rows).map(|r| v[r - c] * rhs[r]).sum();
        let f = 2.0 * s / vnorm2;
        for r in c..rows {
            rhs[r] -= f * v[r - c];
        }
    }
    let mut x = vec![0.0; cols];
    for i in (0..cols).rev() {
        let mut s = rhs[i];
        for j in i + 1..cols {
            s -= m[i][j] * x[j];
        }
        x[i] = if m[i][i].abs() < 1e-14 {
            0.0
        } else {
            s / m[i][i]
        };
    }
    Ok(x)
}
