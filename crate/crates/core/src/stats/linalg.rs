/// Dense row-major matrix, just enough for regression design matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// A column whose Householder pivot fell below the rank tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankDeficient {
    pub column: usize,
}

/// Least-squares solution of `a · x ≈ b` by Householder QR.
///
/// Column `j` is rank deficient when its pivot `|R_jj|` is at most
/// `rel_tol` times the norm of the original column, which keeps the test
/// independent of column scaling.
pub fn least_squares(a: &Matrix, b: &[f64], rel_tol: f64) -> Result<Vec<f64>, RankDeficient> {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(b.len(), m);
    assert!(m >= n);
    let mut r = a.clone();
    let mut qtb = b.to_vec();
    let col_norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| a.get(i, j).powi(2)).sum::<f64>().sqrt())
        .collect();

    let mut v = vec![0.0; m];
    for k in 0..n {
        let norm = (k..m).map(|i| r.get(i, k).powi(2)).sum::<f64>().sqrt();
        if norm <= rel_tol * col_norms[k] || norm == 0.0 {
            return Err(RankDeficient { column: k });
        }
        let x0 = r.get(k, k);
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in k..m {
            v[i] = r.get(i, k);
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..m).map(|i| v[i] * v[i]).sum();
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i] * r.get(i, j)).sum();
            let s = 2.0 * dot / vnorm2;
            for i in k..m {
                r.set(i, j, r.get(i, j) - s * v[i]);
            }
        }
        let dot: f64 = (k..m).map(|i| v[i] * qtb[i]).sum();
        let s = 2.0 * dot / vnorm2;
        for i in k..m {
            qtb[i] -= s * v[i];
        }
    }

    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let tail: f64 = (k + 1..n).map(|j| r.get(k, j) * x[j]).sum();
        x[k] = (qtb[k] - tail) / r.get(k, k);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = least_squares(&a, &[3.0, 5.0], 1e-10).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn overdetermined_line_fit() {
        // y = 1 + 2t observed with symmetric errors
        let rows: Vec<Vec<f64>> = (0..5).map(|t| vec![1.0, t as f64]).collect();
        let y = [1.1, 2.9, 5.1, 6.9, 9.0];
        let x = least_squares(&Matrix::from_rows(&rows), &y, 1e-10).unwrap();
        // normal equations by hand: sum t = 10, sum t^2 = 30, sum y = 25, sum ty = 69.8
        let slope = (5.0 * 69.8 - 10.0 * 25.0) / (5.0 * 30.0 - 100.0);
        let icpt = (25.0 - slope * 10.0) / 5.0;
        assert!((x[1] - slope).abs() < 1e-12);
        assert!((x[0] - icpt).abs() < 1e-12);
    }

    #[test]
    fn detects_duplicate_column_at_any_scale() {
        let rows: Vec<Vec<f64>> = (0..6).map(|t| vec![1.0, 5e10 * t as f64, 5e10 * t as f64]).collect();
        assert_eq!(
            least_squares(&Matrix::from_rows(&rows), &[0.0; 6], 1e-10),
            Err(RankDeficient { column: 2 })
        );
        // widely different column scales are fine when independent
        let rows: Vec<Vec<f64>> = (0..6).map(|t| vec![1.0, 5e10 * (t * t) as f64, 1e-3 * t as f64]).collect();
        assert!(least_squares(&Matrix::from_rows(&rows), &[1.0; 6], 1e-10).is_ok());
    }
}
