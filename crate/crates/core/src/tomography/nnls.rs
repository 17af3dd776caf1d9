//! Lawson–Hanson active-set non-negative least squares.

use nalgebra::{DMatrix, DVector};

fn lstsq_on(a: &DMatrix<f64>, b: &DVector<f64>, cols: &[usize]) -> DVector<f64> {
    let sub = DMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])]);
    let svd = sub.svd(true, true);
    let eps = f64::EPSILON * a.nrows().max(cols.len()) as f64 * svd.singular_values.max();
    svd.solve(b, eps).expect("SVD computed with both factors")
}

/// `argmin ‖Ax − b‖₂` subject to `x ≥ 0`.
///
/// Deterministic: ties in the entering-variable choice go to the lowest index.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let norm1 = a.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    let tol = 10.0 * f64::EPSILON * norm1 * a.nrows().max(n) as f64;
    let max_outer = 3 * n.max(1);

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let entering = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .fold(None, |best: Option<usize>, j| match best {
                Some(i) if w[i] >= w[j] => Some(i),
                _ => Some(j),
            });
        let Some(j) = entering else { break };
        passive[j] = true;

        loop {
            let cols: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let s_p = lstsq_on(a, b, &cols);
            if s_p.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (slot, &i) in cols.iter().enumerate() {
                    x[i] = s_p[slot];
                }
                break;
            }
            // Step from x towards s until the first passive variable hits zero.
            let mut step = f64::INFINITY;
            for (slot, &i) in cols.iter().enumerate() {
                if s_p[slot] <= 0.0 {
                    let denom = x[i] - s_p[slot];
                    if denom > 0.0 {
                        step = step.min(x[i] / denom);
                    } else {
                        step = 0.0;
                    }
                }
            }
            for (slot, &i) in cols.iter().enumerate() {
                x[i] += step * (s_p[slot] - x[i]);
            }
            let mut dropped = false;
            for &i in &cols {
                if x[i] <= tol {
                    x[i] = 0.0;
                    passive[i] = false;
                    dropped = true;
                }
            }
            if !dropped || !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}
