//! Small dense solves for indifference systems.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_EPS: f64 = 1e-11;

/// Solution set of `A x = b`.
#[derive(Clone, Debug)]
pub(crate) enum Affine {
    Inconsistent,
    Unique(Vec<f64>),
    /// An affine subspace, kept as independent rows `R x = c`.
    Family {
        rows: Vec<Vec<f64>>,
        rhs: Vec<f64>,
    },
}

pub(crate) fn solve_affine(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, cols: usize) -> Affine {
    let rows = a.len();
    let scale = a
        .iter()
        .flatten()
        .fold(1.0f64, |m, &x| if x.abs() > m { x.abs() } else { m });
    let eps = PIVOT_EPS * scale;

    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= eps {
            continue;
        }
        a.swap(r, best);
        b.swap(r, best);
        let p = a[r][c];
        for x in a[r].iter_mut() {
            *x /= p;
        }
        b[r] /= p;
        let pivot_row = a[r].clone();
        for i in 0..rows {
            if i != r && a[i][c] != 0.0 {
                let f = a[i][c];
                for (x, p) in a[i].iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
                b[i] -= f * b[r];
            }
        }
        pivots.push(c);
        r += 1;
    }
    if b[r..].iter().any(|&x| x.abs() > eps.max(1e-9)) {
        return Affine::Inconsistent;
    }
    if r == cols {
        let mut x = vec![0.0; cols];
        for (row, &c) in pivots.iter().enumerate() {
            x[c] = b[row];
        }
        return Affine::Unique(x);
    }
    a.truncate(r);
    b.truncate(r);
    Affine::Family { rows: a, rhs: b }
}

/// Orthogonal projection of `point` onto `{x : rows x = rhs}` (rows independent).
pub(crate) fn project(rows: &[Vec<f64>], rhs: &[f64], point: &[f64]) -> Option<Vec<f64>> {
    let r = rows.len();
    if r == 0 {
        return Some(point.to_vec());
    }
    let gram: Vec<Vec<f64>> = rows
        .iter()
        .map(|u| rows.iter().map(|v| dot(u, v)).collect())
        .collect();
    let resid: Vec<f64> = rows
        .iter()
        .zip(rhs)
        .map(|(u, c)| dot(u, point) - c)
        .collect();
    let lambda = match solve_affine(gram, resid, r) {
        Affine::Unique(l) => l,
        _ => return None,
    };
    let mut x = point.to_vec();
    for (u, l) in rows.iter().zip(&lambda) {
        for (xi, ui) in x.iter_mut().zip(u) {
            *xi -= l * ui;
        }
    }
    Some(x)
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}
