//! Minimal dense vector/matrix helpers.
//!
//! Ambient dimensions in this crate are tiny (a handful of coordinates, at
//! most a few dozen constraint rows), so unblocked O(n^3) elimination and
//! plain power iteration are entirely adequate and keep the dependency
//! surface small.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// y += s * x
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// Normalize in place; returns the original norm (leaves the vector
/// untouched when it is numerically zero).
pub fn normalize(a: &mut [f64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        for x in a.iter_mut() {
            *x /= n;
        }
    }
    n
}

pub fn unit(dim: usize, i: usize, sign: f64) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = sign;
    e
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Build from rows; all rows must share a length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let cols = rows.first().map(|r| r.len())?;
        if rows.iter().any(|r| r.len() != cols) || cols == 0 {
            return None;
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            data.extend_from_slice(r);
        }
        Some(Mat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// A^T x.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                axpy(*xi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.at(i, j) - self.at(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Solve A x = b by partial-pivot elimination. `None` when A is singular to
/// working precision.
pub fn solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows;
    if n != a.cols || b.len() != n {
        return None;
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale: f64 = m.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let pivot_tol = 1e-13 * scale.max(1.0);
    for col in 0..n {
        let (pivot_row, pivot_val) = (col..n)
            .map(|r| (r, m.at(r, col).abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if pivot_val <= pivot_tol {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = m.at(col, j);
                m.set(col, j, m.at(pivot_row, j));
                m.set(pivot_row, j, tmp);
            }
            x.swap(col, pivot_row);
        }
        let inv = 1.0 / m.at(col, col);
        for r in (col + 1)..n {
            let f = m.at(r, col) * inv;
            if f != 0.0 {
                for j in col..n {
                    let v = m.at(r, j) - f * m.at(col, j);
                    m.set(r, j, v);
                }
                x[r] -= f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for j in (col + 1)..n {
            s -= m.at(col, j) * x[j];
        }
        x[col] = s / m.at(col, col);
    }
    Some(x)
}

/// Spectral norm of a symmetric matrix by power iteration.
///
/// The estimate is inflated by a relative 1e-12 so that callers using it as
/// a Lipschitz constant stay on the conservative side of the true value.
pub fn spectral_norm_sym(p: &Mat) -> f64 {
    assert_eq!(p.rows, p.cols);
    let n = p.rows;
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return p.at(0, 0).abs();
    }
    // Deterministic start with all-distinct components so no eigenvector is
    // exactly orthogonal to it in common cases.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * (i as f64 + 1.0)).collect();
    normalize(&mut v);
    let mut est = 0.0_f64;
    for _ in 0..20_000 {
        let mut w = p.matvec(&v);
        let nw = normalize(&mut w);
        if nw == 0.0 {
            return 0.0;
        }
        if (nw - est).abs() <= 1e-14 * nw.max(1.0) {
            est = nw;
            break;
        }
        est = nw;
        v = w;
    }
    est * (1.0 + 1e-12)
}

/// Compensated (Kahan) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = solve(&a, &[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_detects_singular() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(solve(&a, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let mut p = Mat::zeros(3, 3);
        p.set(0, 0, 0.5);
        p.set(1, 1, -2.5);
        p.set(2, 2, 1.0);
        let s = spectral_norm_sym(&p);
        assert!((s - 2.5).abs() < 1e-9, "got {s}");
    }

    #[test]
    fn kahan_matches_exact_sum() {
        let mut k = KahanSum::default();
        for _ in 0..1_000_000 {
            k.add(0.1);
        }
        assert!((k.value() - 100_000.0).abs() < 1e-9);
    }
}
