//! Dense elimination on matrices of at most 4x4, enough for simplices of R^3.

pub(crate) type Mat4 = [[f64; 4]; 4];

/// Solves `m x = rhs` for the leading `n x n` block with partial pivoting.
///
/// Returns `None` when a pivot falls below `rel_tol` times the largest entry
/// of the block.
pub(crate) fn solve(mut m: Mat4, mut rhs: [f64; 4], n: usize, rel_tol: f64) -> Option<[f64; 4]> {
    let scale = max_abs(&m, n, n);
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot_row][col].abs() <= rel_tol * scale {
            return None;
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                for k in col..n {
                    m[row][k] -= factor * m[col][k];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
    }
    let mut x = [0.0; 4];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Numerical rank of the leading `rows x cols` block; entries below
/// `rel_tol` times the largest entry count as zero.
pub(crate) fn rank(mut m: Mat4, rows: usize, cols: usize, rel_tol: f64) -> usize {
    let scale = max_abs(&m, rows, cols);
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let pivot_row = (rank..rows)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot_row][col].abs() <= tol {
            continue;
        }
        m.swap(rank, pivot_row);
        for row in rank + 1..rows {
            let factor = m[row][col] / m[rank][col];
            for k in col..cols {
                m[row][k] -= factor * m[rank][k];
            }
        }
        rank += 1;
    }
    rank
}

/// Determinant of the leading `n x n` block (n <= 3), by cofactor expansion.
pub(crate) fn det(m: &Mat4, n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => panic!("determinant only implemented up to 3x3"),
    }
}

fn max_abs(m: &Mat4, rows: usize, cols: usize) -> f64 {
    m[..rows]
        .iter()
        .flat_map(|r| r[..cols].iter())
        .fold(0.0f64, |a, v| a.max(v.abs()))
}
