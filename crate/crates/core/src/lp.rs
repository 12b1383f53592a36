//! Exact linear programming over the rationals.
//!
//! A dense two-phase simplex with Bland's rule. Variables are free (each
//! is split into a nonnegative pair internally). Problem sizes in this
//! crate are tiny (a handful of variables, at most a few hundred rows), so
//! no sparsity or scaling tricks are needed; exactness is the point.

use crate::rat::Rat;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult {
    Infeasible,
    Unbounded,
    /// Optimal value together with one optimizing point.
    Optimal { value: Rat, point: Vec<Rat> },
}

/// Maximize `c . x` subject to `rows[i].0 . x <= rows[i].1`, `x` free.
pub fn maximize(c: &[Rat], rows: &[(Vec<Rat>, Rat)]) -> LpResult {
    let n = c.len();
    let m = rows.len();
    // Columns: x+ (n), x- (n), slacks (m). Rows augmented with rhs.
    let cols = 2 * n + m;
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for (a, b) in rows {
        assert_eq!(a.len(), n, "constraint arity mismatch");
        let mut row = vec![Rat::zero(); cols + 1];
        for j in 0..n {
            row[j] = a[j].clone();
            row[n + j] = -a[j].clone();
        }
        row[cols] = b.clone();
        t.push(row);
    }
    for (i, row) in t.iter_mut().enumerate() {
        row[2 * n + i] = Rat::one();
    }
    let mut basis: Vec<usize> = (0..m).map(|i| 2 * n + i).collect();

    // Phase 1: if some rhs is negative, add one artificial column and
    // drive it out.
    if t.iter().any(|row| row[cols].is_negative()) {
        for row in t.iter_mut() {
            row.insert(cols, -Rat::one());
        }
        // Enter the artificial variable at the most negative row.
        let (enter_row, _) = t
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a[cols + 1].cmp(&b[cols + 1]))
            .expect("nonempty tableau");
        pivot(&mut t, &mut basis, enter_row, cols);
        // Minimize the artificial variable, i.e. maximize its negation.
        let mut obj = vec![Rat::zero(); cols + 1];
        obj[cols] = -Rat::one();
        if !simplex_loop(&mut t, &mut basis, &mut obj, cols + 1) {
            // Maximizing -t is never unbounded (t >= 0).
            unreachable!("phase 1 cannot be unbounded");
        }
        if let Some(r) = basis.iter().position(|&b| b == cols) {
            // Artificial still basic: feasible iff its value is zero.
            if !t[r][cols + 1].is_zero() {
                return LpResult::Infeasible;
            }
            if let Some(j) = (0..cols).find(|&j| !t[r][j].is_zero()) {
                pivot(&mut t, &mut basis, r, j);
            } else {
                // Vacuous row; drop it.
                t.remove(r);
                basis.remove(r);
            }
        }
        // Drop the artificial column.
        for row in t.iter_mut() {
            row.remove(cols);
        }
        debug_assert!(basis.iter().all(|&b| b != cols));
    }

    // Phase 2.
    let mut obj = vec![Rat::zero(); cols + 1];
    for j in 0..n {
        obj[j] = c[j].clone();
        obj[n + j] = -c[j].clone();
    }
    if !simplex_loop(&mut t, &mut basis, &mut obj, cols) {
        return LpResult::Unbounded;
    }

    let mut xplus = vec![Rat::zero(); 2 * n];
    for (r, &b) in basis.iter().enumerate() {
        if b < 2 * n {
            xplus[b] = t[r][cols].clone();
        }
    }
    let point: Vec<Rat> = (0..n).map(|j| &xplus[j] - &xplus[n + j]).collect();
    let value = c
        .iter()
        .zip(point.iter())
        .map(|(ci, xi)| ci * xi)
        .fold(Rat::zero(), |acc, v| acc + v);
    LpResult::Optimal { value, point }
}

/// Runs simplex iterations maximizing `obj` (expressed over the original
/// columns; reduced costs are recomputed each round from the basis).
/// Returns false when unbounded.
fn simplex_loop(
    t: &mut [Vec<Rat>],
    basis: &mut [usize],
    obj: &mut [Rat],
    ncols: usize,
) -> bool {
    loop {
        // Reduced costs: obj minus the basis-priced combination of rows.
        let mut reduced = obj[..ncols].to_vec();
        for (r, &b) in basis.iter().enumerate() {
            if !obj[b].is_zero() {
                let w = obj[b].clone();
                for j in 0..ncols {
                    let d = &w * &t[r][j];
                    reduced[j] -= d;
                }
            }
        }
        // Bland: lowest-index column with positive reduced cost.
        let Some(enter) = (0..ncols).find(|&j| reduced[j].is_positive()) else {
            return true;
        };
        // Ratio test, Bland ties by basis index.
        let mut leave: Option<(usize, Rat)> = None;
        for (r, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[ncols] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < *lratio || (ratio == *lratio && basis[r] < basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((leave_row, _)) = leave else {
            return false;
        };
        pivot(t, basis, leave_row, enter);
    }
}

fn pivot(t: &mut [Vec<Rat>], basis: &mut [usize], row: usize, col: usize) {
    let pv = t[row][col].clone();
    debug_assert!(!pv.is_zero());
    for x in t[row].iter_mut() {
        *x /= pv.clone();
    }
    for r in 0..t.len() {
        if r != row && !t[r][col].is_zero() {
            let f = t[r][col].clone();
            for j in 0..t[r].len() {
                let d = &f * &t[row][j];
                t[r][j] -= d;
            }
        }
    }
    basis[row] = col;
}

/// Supremum of `c . x` over `{closed: a.x <= b}`; treats the system as
/// closed. Returns `None` for an infeasible system.
pub fn sup_over(c: &[Rat], rows: &[(Vec<Rat>, Rat)]) -> Option<LpResult> {
    match maximize(c, rows) {
        LpResult::Infeasible => None,
        other => Some(other),
    }
}

/// A point satisfying all closed rows `a.x <= b` and all strict rows
/// `a.x < b`, if one exists.
pub fn strict_feasible_point(
    dim: usize,
    closed: &[(Vec<Rat>, Rat)],
    strict: &[(Vec<Rat>, Rat)],
) -> Option<Vec<Rat>> {
    // Maximize t subject to a.x + t <= b on strict rows, a.x <= b on
    // closed rows, t <= 1. Strictly feasible iff the optimum is > 0.
    let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for (a, b) in closed {
        let mut r = a.clone();
        r.push(Rat::zero());
        rows.push((r, b.clone()));
    }
    for (a, b) in strict {
        let mut r = a.clone();
        r.push(Rat::one());
        rows.push((r, b.clone()));
    }
    let mut tcap = vec![Rat::zero(); dim];
    tcap.push(Rat::one());
    rows.push((tcap, Rat::one()));
    let mut c = vec![Rat::zero(); dim];
    c.push(Rat::one());
    match maximize(&c, &rows) {
        LpResult::Optimal { value, mut point } if value.is_positive() => {
            point.pop();
            Some(point)
        }
        LpResult::Unbounded => unreachable!("objective capped at 1"),
        _ => None,
    }
}
