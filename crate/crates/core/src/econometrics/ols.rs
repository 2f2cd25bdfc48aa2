//! Least squares through a Householder QR decomposition.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
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

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Argument("matrix rows differ in length".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Argument("matrix columns differ in length".into()));
        }
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// QR factorisation of a design matrix with the response rotated alongside.
#[derive(Debug, Clone)]
pub struct Qr {
    /// Upper triangle `R` stored column-major (`r[j][i]` for `i <= j`).
    r: Vec<Vec<f64>>,
    /// `Qᵀ y`, length equal to the number of rows.
    qty: Vec<f64>,
    rows: usize,
}

/// Relative size below which a diagonal entry of `R` counts as zero.
const RANK_TOL: f64 = 1e-10;

impl Qr {
    /// Factorises `x` (rows ≥ cols, full column rank) and applies the same
    /// reflections to `y`.
    pub fn new(x: &Matrix, y: &[f64]) -> Result<Self> {
        let (n, k) = (x.rows(), x.cols());
        if y.len() != n {
            return Err(Error::Argument(format!(
                "design has {n} rows but response has {}",
                y.len()
            )));
        }
        if n < k || k == 0 {
            return Err(Error::Argument(format!(
                "need rows >= cols > 0, got {n}x{k}"
            )));
        }
        let mut a: Vec<Vec<f64>> = (0..k)
            .map(|j| (0..n).map(|i| x.get(i, j)).collect())
            .collect();
        let norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
        let mut qty = y.to_vec();
        for j in 0..k {
            let alpha = norm(&a[j][j..]);
            if alpha <= RANK_TOL * norms[j].max(f64::MIN_POSITIVE) {
                return Err(Error::Numeric(format!(
                    "design matrix is rank deficient at column {j}"
                )));
            }
            let alpha = if a[j][j] > 0.0 { -alpha } else { alpha };
            // v = a_j[j..] - alpha e_1, H = I - 2 v vᵀ / vᵀv
            let mut v: Vec<f64> = a[j][j..].to_vec();
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|t| t * t).sum();
            let reflect = |col: &mut [f64]| {
                let s: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum::<f64>() * 2.0 / vtv;
                for (c, vi) in col.iter_mut().zip(&v) {
                    *c -= s * vi;
                }
            };
            for col in a.iter_mut().skip(j + 1) {
                reflect(&mut col[j..]);
            }
            reflect(&mut qty[j..]);
            a[j][j] = alpha;
            for t in a[j].iter_mut().skip(j + 1) {
                *t = 0.0;
            }
            if a[j][j].abs() <= RANK_TOL * norms[j] {
                return Err(Error::Numeric(format!(
                    "design matrix is rank deficient at column {j}"
                )));
            }
        }
        Ok(Qr { r: a, qty, rows: n })
    }

    pub fn cols(&self) -> usize {
        self.r.len()
    }

    /// Coefficients of the fit using the first `k` columns.
    pub fn coefficients(&self, k: usize) -> Vec<f64> {
        let mut beta = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = self.qty[i];
            for j in i + 1..k {
                s -= self.r[j][i] * beta[j];
            }
            beta[i] = s / self.r[i][i];
        }
        beta
    }

    /// Residual sum of squares of the fit using the first `k` columns. The
    /// leading columns of a QR factorisation span the same space as the
    /// leading columns of the design, so every nested model comes from one
    /// decomposition.
    pub fn rss(&self, k: usize) -> f64 {
        self.qty[k..].iter().map(|v| v * v).sum()
    }

    /// Diagonal of `(XᵀX)⁻¹` restricted to the first `k` columns.
    pub fn inverse_gram_diagonal(&self, k: usize) -> Vec<f64> {
        // rows of R⁻¹: solve R z = e_i column by column
        let mut rinv = vec![vec![0.0; k]; k];
        for c in 0..k {
            rinv[c][c] = 1.0 / self.r[c][c];
            for i in (0..c).rev() {
                let s: f64 = (i + 1..=c).map(|j| self.r[j][i] * rinv[j][c]).sum();
                rinv[i][c] = -s / self.r[i][i];
            }
        }
        rinv.iter()
            .map(|row| row.iter().map(|v| v * v).sum())
            .collect()
    }

    pub fn n_obs(&self) -> usize {
        self.rows
    }
}

fn norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub rss: f64,
    pub n_obs: usize,
}

impl OlsFit {
    pub fn residual_df(&self) -> usize {
        self.n_obs - self.coefficients.len()
    }
}

/// Least-squares coefficients and residual sum of squares. Standard errors are
/// NaN when there are no residual degrees of freedom.
pub fn ols(design: &Matrix, response: &[f64]) -> Result<OlsFit> {
    let qr = Qr::new(design, response)?;
    Ok(fit_prefix(&qr, qr.cols()))
}

pub(crate) fn fit_prefix(qr: &Qr, k: usize) -> OlsFit {
    let coefficients = qr.coefficients(k);
    let rss = qr.rss(k);
    let dof = qr.n_obs() - k;
    let sigma2 = if dof > 0 { rss / dof as f64 } else { f64::NAN };
    let std_errors = qr
        .inverse_gram_diagonal(k)
        .into_iter()
        .map(|d| (sigma2 * d).sqrt())
        .collect();
    OlsFit {
        coefficients,
        std_errors,
        rss,
        n_obs: qr.n_obs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Solves (XᵀX) b = Xᵀy by Gaussian elimination with partial pivoting.
    fn normal_equations(x: &Matrix, y: &[f64]) -> Vec<f64> {
        let k = x.cols();
        let mut a = vec![vec![0.0; k + 1]; k];
        for i in 0..x.rows() {
            let row = x.row(i);
            for p in 0..k {
                for q in 0..k {
                    a[p][q] += row[p] * row[q];
                }
                a[p][k] += row[p] * y[i];
            }
        }
        for c in 0..k {
            let pivot = (c..k)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap();
            a.swap(c, pivot);
            for r in 0..k {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for t in c..=k {
                        a[r][t] -= f * a[c][t];
                    }
                }
            }
        }
        (0..k).map(|i| a[i][k] / a[i][i]).collect()
    }

    #[test]
    fn exact_line() {
        let x = Matrix::from_columns(&[vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        let fit = ols(&x, &[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-14);
        assert!(fit.rss < 1e-24);
    }

    #[test]
    fn intercept_only() {
        let y = [3.0, 5.0, 4.0, 10.0, -2.0];
        let x = Matrix::from_columns(&[vec![1.0; 5]]).unwrap();
        let fit = ols(&x, &y).unwrap();
        let mean = y.iter().sum::<f64>() / 5.0;
        let ss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        assert!((fit.coefficients[0] - mean).abs() < 1e-14);
        assert!((fit.rss - ss).abs() < 1e-12);
        // standard error of the mean
        assert!((fit.std_errors[0] - (ss / 4.0 / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let cols: Vec<Vec<f64>> = (0..3)
                .map(|j| {
                    (0..50)
                        .map(|_| {
                            if j == 0 {
                                1.0
                            } else {
                                rng.random_range(-3.0..3.0)
                            }
                        })
                        .collect()
                })
                .collect();
            let x = Matrix::from_columns(&cols).unwrap();
            let y: Vec<f64> = (0..50).map(|_| rng.random_range(-10.0..10.0)).collect();
            let fit = ols(&x, &y).unwrap();
            let oracle = normal_equations(&x, &y);
            for (a, b) in fit.coefficients.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8);
            }
            let rss: f64 = (0..50)
                .map(|i| {
                    y[i] - x
                        .row(i)
                        .iter()
                        .zip(&oracle)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                })
                .map(|e| e * e)
                .sum();
            assert!((fit.rss - rss).abs() < 1e-8 * rss.max(1.0));
            // nested fits agree with refitting on the leading columns
            let qr = Qr::new(&x, &y).unwrap();
            let sub = Matrix::from_columns(&cols[..2]).unwrap();
            assert!((qr.rss(2) - ols(&sub, &y).unwrap().rss).abs() < 1e-8);
        }
    }

    #[test]
    fn rank_deficiency_detected() {
        let x = Matrix::from_columns(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert!(matches!(ols(&x, &[1.0, 2.0, 3.0]), Err(Error::Numeric(_))));
        let x = Matrix::from_columns(&[vec![1.0; 3], vec![0.0; 3]]).unwrap();
        assert!(matches!(ols(&x, &[1.0, 2.0, 3.0]), Err(Error::Numeric(_))));
        let x = Matrix::from_columns(&[vec![1.0; 2], vec![1.0, 2.0], vec![0.0, 5.0]]).unwrap();
        assert!(matches!(ols(&x, &[1.0, 2.0]), Err(Error::Argument(_))));
    }
}
