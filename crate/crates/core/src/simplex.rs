//! A small dense two-phase simplex solver for equality-form programs.
//!
//! Solves `maximize c.x subject to A x = b, x >= 0` with Bland's rule for
//! anti-cycling. Written for the box polytopes in this crate — tens of
//! variables, around a hundred rows, redundant rows tolerated — where a
//! dense tableau is simpler and faster than pulling in a general solver.

const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { value: f64, solution: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// An equality-constrained program in standard form.
pub(crate) struct StandardForm {
    /// Number of structural variables.
    pub n: usize,
    /// Constraint rows, each of length `n`.
    pub rows: Vec<Vec<f64>>,
    /// Right-hand sides, one per row.
    pub rhs: Vec<f64>,
    /// Objective coefficients to maximize, length `n`.
    pub objective: Vec<f64>,
}

pub(crate) fn maximize(sf: &StandardForm) -> LpOutcome {
    let m = sf.rows.len();
    let n = sf.n;
    debug_assert!(sf.rhs.len() == m && sf.objective.len() == n);
    debug_assert!(sf.rows.iter().all(|r| r.len() == n));

    // Tableau layout: n structural columns, m artificial columns, then the
    // right-hand side. Artificial variables give the identity starting
    // basis; rows are sign-flipped first so every right-hand side is
    // non-negative.
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    for (i, row) in sf.rows.iter().enumerate() {
        let flip = if sf.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        let mut r = vec![0.0; width];
        for (j, &a) in row.iter().enumerate() {
            r[j] = flip * a;
        }
        r[n + i] = 1.0;
        r[width - 1] = flip * sf.rhs[i];
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize the sum of artificials. With the artificials basic,
    // the reduced-cost row is the negated column sums of the other rows.
    let mut z = vec![0.0; width];
    for r in &t {
        for j in 0..width {
            z[j] -= r[j];
        }
    }
    for j in n..n + m {
        z[j] = 0.0;
    }
    if !pivot_until_optimal(&mut t, &mut z, &mut basis, n) {
        // Phase 1 of a program with artificial variables is always bounded.
        unreachable!("phase 1 cannot be unbounded");
    }
    if -z[width - 1] > PIVOT_TOL {
        return LpOutcome::Infeasible;
    }

    // Drive any artificial still basic (at level zero) out of the basis;
    // rows with no structural pivot left are redundant and can stay inert.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL) {
                pivot(&mut t, &mut z, &mut basis, i, j);
            }
        }
    }

    // Phase 2: rebuild the reduced costs for the real objective (minimize
    // -c.x) and re-run. Artificial columns are frozen out of pricing.
    let mut z = vec![0.0; width];
    for j in 0..n {
        z[j] = -sf.objective[j];
    }
    for i in 0..m {
        if basis[i] < n && z[basis[i]].abs() > 0.0 {
            let coeff = z[basis[i]];
            for j in 0..width {
                z[j] -= coeff * t[i][j];
            }
        }
    }
    if !pivot_until_optimal(&mut t, &mut z, &mut basis, n) {
        return LpOutcome::Unbounded;
    }

    let mut solution = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            solution[basis[i]] = t[i][width - 1];
        }
    }
    let value = sf
        .objective
        .iter()
        .zip(&solution)
        .map(|(c, x)| c * x)
        .sum();
    LpOutcome::Optimal { value, solution }
}

/// Runs Bland-rule pivots until no entering column prices favorably.
/// Returns false when the program is unbounded in the entering direction.
/// Only the first `n_price` columns are priced, which keeps phase 2 from
/// re-entering artificial variables.
fn pivot_until_optimal(
    t: &mut [Vec<f64>],
    z: &mut [f64],
    basis: &mut [usize],
    n_price: usize,
) -> bool {
    let width = z.len();
    for _ in 0..MAX_PIVOTS {
        let Some(enter) = (0..n_price).find(|&j| z[j] < -PIVOT_TOL) else {
            return true;
        };
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter] > PIVOT_TOL {
                let ratio = row[width - 1] / row[enter];
                let better = match leave {
                    None => true,
                    // Bland tie-break: smallest ratio, then smallest basis
                    // index, keeps the walk from cycling on degenerate rows.
                    Some((best, r)) => {
                        ratio < r - PIVOT_TOL || (ratio <= r + PIVOT_TOL && basis[i] < basis[best])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((leave, _)) = leave else {
            return false;
        };
        pivot(t, z, basis, leave, enter);
    }
    panic!("simplex failed to terminate within {MAX_PIVOTS} pivots");
}

fn pivot(t: &mut [Vec<f64>], z: &mut [f64], basis: &mut [usize], row: usize, col: usize) {
    let width = z.len();
    let scale = t[row][col];
    for v in t[row].iter_mut() {
        *v /= scale;
    }
    for i in 0..t.len() {
        if i != row && t[i][col].abs() > 0.0 {
            let factor = t[i][col];
            for j in 0..width {
                t[i][j] -= factor * t[row][j];
            }
            t[i][col] = 0.0;
        }
    }
    if z[col].abs() > 0.0 {
        let factor = z[col];
        for j in 0..width {
            z[j] -= factor * t[row][j];
        }
        z[col] = 0.0;
    }
    basis[row] = col;
}
