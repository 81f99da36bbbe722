//! Tiny dense two-phase simplex method (Bland's rule), sized for the
//! intersection tests of `validate_complex`: at most five equality rows and a
//! handful of columns.

const TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LpOutcome {
    Infeasible,
    Optimal(f64),
    Unbounded,
}

/// Maximizes `cost . x` subject to `rows x = rhs`, `x >= 0`.
pub(crate) fn maximize(rows: &[Vec<f64>], rhs: &[f64], cost: &[f64]) -> LpOutcome {
    let m = rows.len();
    let n = cost.len();
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        let mut r = vec![0.0; width];
        for j in 0..n {
            r[j] = sign * row[j];
        }
        r[n + i] = 1.0;
        r[width - 1] = sign * rhs[i];
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut phase1 = vec![0.0; n + m];
    for c in phase1[n..].iter_mut() {
        *c = -1.0;
    }
    if run(&mut t, &mut basis, &phase1, n + m) == LpOutcome::Unbounded {
        return LpOutcome::Unbounded;
    }
    let infeasibility: f64 = basis
        .iter()
        .zip(&t)
        .filter(|(&b, _)| b >= n)
        .map(|(_, r)| r[width - 1])
        .sum();
    if infeasibility > TOL * (1.0 + rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()))) {
        return LpOutcome::Infeasible;
    }
    // Drive remaining artificial variables out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > TOL) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    let mut phase2 = vec![0.0; n + m];
    phase2[..n].copy_from_slice(cost);
    run(&mut t, &mut basis, &phase2, n)
}

/// Simplex iterations; only columns below `enter_limit` may enter the basis.
fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], enter_limit: usize) -> LpOutcome {
    let m = t.len();
    let width = t.first().map_or(1, |r| r.len());
    for _ in 0..10_000 {
        let entering = (0..enter_limit).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let reduced = cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
            reduced > TOL
        });
        let Some(j) = entering else {
            let value = (0..m).map(|i| cost[basis[i]] * t[i][width - 1]).sum();
            return LpOutcome::Optimal(value);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][j] > TOL {
                let ratio = t[i][width - 1] / t[i][j];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - TOL || (ratio <= lr + TOL && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((i, _)) = leave else {
            return LpOutcome::Unbounded;
        };
        pivot(t, basis, i, j);
    }
    panic!("simplex method failed to terminate");
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row {
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    basis[row] = col;
}
