//! Dense Gaussian elimination with partial pivoting: the test oracle for the
//! Toeplitz solvers. Never linked into library code.

#![allow(dead_code)]

pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        assert!(d != 0.0, "singular matrix");
        for row in col + 1..n {
            let f = a[row][col] / d;
            if f == 0.0 {
                continue;
            }
            let (top, bottom) = a.split_at_mut(row);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - tail) / a[i][i];
    }
    x
}

pub fn toeplitz_dense(first_row: &[f64]) -> Vec<Vec<f64>> {
    let n = first_row.len();
    (0..n)
        .map(|i| (0..n).map(|j| first_row[i.abs_diff(j)]).collect())
        .collect()
}

pub fn solve_symmetric_toeplitz(first_row: &[f64], rhs: &[f64]) -> Vec<f64> {
    solve(toeplitz_dense(first_row), rhs.to_vec())
}
