/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty column range");
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        let (top, rest) = a.split_at_mut(col + 1);
        let lead = &top[col];
        for r in rest.iter_mut() {
            let factor = r[col] / p;
            if factor != 0.0 {
                for (x, y) in r[col..n].iter_mut().zip(&lead[col..n]) {
                    *x -= factor * y;
                }
            }
        }
    }
    det
}

#[cfg(test)]
pub(crate) fn cofactor_determinant(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> =
                a[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect()).collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[0][j] * cofactor_determinant(&minor)
        })
        .sum()
}
