//! Dense row-major matrices and a Householder QR factorization that skips
//! numerically dependent columns instead of failing on them.

use crate::error::{Error, Result};

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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data has {} values, expected {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(Error::invalid(format!(
                    "row {i} has {} values, expected {ncols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols: ncols,
            data,
        })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let nrows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().position(|c| c.len() != nrows) {
            return Err(Error::invalid(format!(
                "column {bad} has {} values, expected {nrows}",
                columns[bad].len()
            )));
        }
        let mut m = Matrix::zeros(nrows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                m.set(i, jj, self.get(i, j));
            }
        }
        m
    }

    /// Copy with a leading column of ones.
    pub fn with_intercept(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            m.set(i, 0, 1.0);
            for j in 0..self.cols {
                m.set(i, j + 1, self.get(i, j));
            }
        }
        m
    }

    pub fn insert_column(&self, at: usize, col: &[f64]) -> Result<Matrix> {
        if col.len() != self.rows || at > self.cols {
            return Err(Error::invalid("column insert out of shape"));
        }
        let mut m = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..=self.cols {
                let v = match j.cmp(&at) {
                    std::cmp::Ordering::Less => self.get(i, j),
                    std::cmp::Ordering::Equal => col[i],
                    std::cmp::Ordering::Greater => self.get(i, j - 1),
                };
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }
}

/// Relative tolerance below which a column's residual norm, after projection on
/// the previously accepted columns, marks it as dependent.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Householder QR of an `n x p` matrix. Columns whose remaining norm falls
/// below `tol * ||original column||` are skipped and reported in `dropped`.
#[derive(Debug, Clone)]
pub struct Qr {
    n: usize,
    /// Householder vectors, one per accepted column; reflector `k` acts on rows `k..n`.
    reflectors: Vec<Vec<f64>>,
    /// Upper triangle of R over accepted columns, `r[m]` holds column `m` rows `0..=m`.
    r: Vec<Vec<f64>>,
    kept: Vec<usize>,
    dropped: Vec<usize>,
}

impl Qr {
    pub fn new(a: &Matrix) -> Qr {
        Qr::with_tol(a, DEFAULT_RANK_TOL)
    }

    pub fn with_tol(a: &Matrix, tol: f64) -> Qr {
        let (n, p) = (a.nrows(), a.ncols());
        let mut cols = a.columns();
        let norms: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
        let mut reflectors: Vec<Vec<f64>> = Vec::new();
        let mut r: Vec<Vec<f64>> = Vec::new();
        let mut kept = Vec::new();
        let mut dropped = Vec::new();

        for j in 0..p {
            let k = reflectors.len();
            if k >= n {
                dropped.push(j);
                continue;
            }
            let tail_norm = norm(&cols[j][k..]);
            if norms[j] == 0.0 || tail_norm <= tol * norms[j] {
                dropped.push(j);
                continue;
            }
            let x0 = cols[j][k];
            let alpha = if x0 >= 0.0 { -tail_norm } else { tail_norm };
            let mut v = cols[j][k..].to_vec();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            // Apply to this and every later column.
            for col in cols.iter_mut().skip(j) {
                apply_reflector(&v, vnorm2, &mut col[k..]);
            }
            let mut rcol = cols[j][..k].to_vec();
            rcol.push(alpha);
            r.push(rcol);
            reflectors.push(v);
            kept.push(j);
        }
        Qr {
            n,
            reflectors,
            r,
            kept,
            dropped,
        }
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    /// Qᵀ y.
    pub fn qt_mul(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n);
        let mut out = y.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            apply_reflector(v, vnorm2, &mut out[k..]);
        }
        out
    }

    /// Least-squares coefficients for the accepted columns, in `kept` order.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let qty = self.qt_mul(y);
        self.back_substitute(&qty[..self.rank()])
    }

    fn back_substitute(&self, rhs: &[f64]) -> Vec<f64> {
        let k = self.rank();
        let mut b = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = rhs[i];
            for m in (i + 1)..k {
                s -= self.r[m][i] * b[m];
            }
            b[i] = s / self.r[i][i];
        }
        b
    }

    /// R⁻¹ for the accepted columns.
    pub fn r_inverse(&self) -> Matrix {
        let k = self.rank();
        let mut inv = Matrix::zeros(k, k);
        for col in 0..k {
            let mut e = vec![0.0; k];
            e[col] = 1.0;
            let x = self.back_substitute(&e);
            for (i, v) in x.into_iter().enumerate() {
                inv.set(i, col, v);
            }
        }
        inv
    }

    /// (AᵀA)⁻¹ restricted to the accepted columns, computed as R⁻¹R⁻ᵀ.
    pub fn gram_inverse(&self) -> Matrix {
        let ri = self.r_inverse();
        ri.matmul(&ri.transpose())
    }
}

fn apply_reflector(v: &[f64], vnorm2: f64, x: &mut [f64]) {
    if vnorm2 == 0.0 {
        return;
    }
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * dot / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}

pub fn norm(x: &[f64]) -> f64 {
    // Scaled to avoid overflow on large visitor counts squared.
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-squares fit tolerant of dependent columns: dependent columns get a
/// zero coefficient. Returns (coefficients over all columns, residuals).
pub fn lstsq_tolerant(a: &Matrix, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let qr = Qr::new(a);
    let sol = qr.solve(y);
    let mut coef = vec![0.0; a.ncols()];
    for (&j, b) in qr.kept().iter().zip(sol) {
        coef[j] = b;
    }
    let fitted = a.mul_vec(&coef);
    let resid = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    (coef, resid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_solves_square_system() {
        let a = Matrix::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ])
        .unwrap();
        let x = [1.0, -2.0, 0.5];
        let y = a.mul_vec(&x);
        let b = Qr::new(&a).solve(&y);
        for (bi, xi) in b.iter().zip(x) {
            assert!((bi - xi).abs() < 1e-12);
        }
    }

    #[test]
    fn qr_drops_dependent_column() {
        let c0 = vec![1.0, 1.0, 1.0, 1.0, 1.0];
        let c1 = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let c2: Vec<f64> = c1.iter().map(|v| 2.0 * v + 3.0).collect();
        let c3 = vec![0.3, -1.0, 2.0, 0.0, 1.0];
        let a = Matrix::from_columns(&[c0, c1, c2, c3]).unwrap();
        let qr = Qr::new(&a);
        assert_eq!(qr.kept(), &[0, 1, 3]);
        assert_eq!(qr.dropped(), &[2]);
    }

    #[test]
    fn gram_inverse_matches_direct_inverse() {
        let a = Matrix::from_rows(&[
            vec![1.0, 0.5],
            vec![1.0, 1.5],
            vec![1.0, 2.0],
            vec![1.0, 4.0],
        ])
        .unwrap();
        let g = a.transpose().matmul(&a);
        let inv = Qr::new(&a).gram_inverse();
        let id = g.matmul(&inv);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn insert_column_places_values() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = a.insert_column(1, &[9.0, 8.0]).unwrap();
        assert_eq!(b.row(0), &[1.0, 9.0, 2.0]);
        assert_eq!(b.row(1), &[3.0, 8.0, 4.0]);
    }
}
