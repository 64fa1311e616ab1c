//! Dense exact linear algebra over a scalar field.
//!
//! Everything here works coefficient-exactly (rationals or `F_p`), so rank
//! decisions are never subject to rounding. Systems stay small — tens of
//! unknowns from bounded searches — and plain Gaussian elimination is enough.

use crate::scalar::Scalar;

/// Solve `A x = b` by Gaussian elimination, returning *one* solution if the
/// system is consistent (free variables are set to zero) and `None` otherwise.
pub(crate) fn solve_linear(a: &[Vec<Scalar>], b: &[Scalar]) -> Option<Vec<Scalar>> {
    let rows = a.len();
    assert_eq!(rows, b.len(), "matrix/rhs row mismatch");
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Scalar>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols, "ragged matrix");
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_in_col: Vec<Option<usize>> = vec![None; cols];
    let mut pivot_row = 0usize;
    for col in 0..cols {
        let Some(src) = (pivot_row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, src);
        let inv = m[pivot_row][col].inv().expect("nonzero pivot");
        for x in m[pivot_row].iter_mut() {
            *x = x.mul(&inv);
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=cols {
                    let delta = f.mul(&m[pivot_row][c]);
                    m[r][c] = m[r][c].sub(&delta);
                }
            }
        }
        pivot_in_col[col] = Some(pivot_row);
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }

    // Inconsistent iff some zero row has nonzero rhs.
    for r in pivot_row..rows {
        if !m[r][cols].is_zero() {
            return None;
        }
    }

    let zero = if cols > 0 {
        Scalar::zero(a[0][0].field())
    } else if rows > 0 {
        Scalar::zero(b[0].field())
    } else {
        return Some(Vec::new());
    };
    let mut x = vec![zero; cols];
    for col in 0..cols {
        if let Some(r) = pivot_in_col[col] {
            x[col] = m[r][cols].clone();
        }
    }
    Some(x)
}

/// Express `target` as a linear combination of `basis` vectors, if possible.
/// Returns the coefficient list in basis order.
pub(crate) fn in_span(basis: &[Vec<Scalar>], target: &[Scalar]) -> Option<Vec<Scalar>> {
    if basis.is_empty() {
        return if target.iter().all(Scalar::is_zero) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let dim = target.len();
    let rows: Vec<Vec<Scalar>> = (0..dim)
        .map(|i| basis.iter().map(|v| v[i].clone()).collect())
        .collect();
    solve_linear(&rows, target)
}
