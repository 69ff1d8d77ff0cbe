//! Eigenvalues of dense real symmetric matrices.
//!
//! Householder reduction to tridiagonal form followed by implicit QL with
//! Wilkinson-style shifts. Only eigenvalues are produced; the reduction works
//! on the lower triangle, row by row, so every inner loop is contiguous.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Dense symmetric matrix, row-major. Only the lower triangle is referenced.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Sets entries (i, j) and (j, i).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.data[r * self.n + c] = value;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.data[r * self.n + c]
    }

    /// Adds `value` to the diagonal entry (i, i).
    #[inline]
    pub fn add_diagonal(&mut self, i: usize, value: f64) {
        self.data[i * self.n + i] += value;
    }

    /// Ascending eigenvalues. Consumes the matrix, whose storage is used as workspace.
    pub fn eigenvalues(mut self) -> Vec<f64> {
        let (d, e) = self.tridiagonalize();
        tridiagonal_eigenvalues(d, e)
    }

    /// Householder reduction. Returns the diagonal and the sub-diagonal, with
    /// the sub-diagonal stored in `e[1..n]` (`e[0] = 0`).
    fn tridiagonalize(&mut self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut e = vec![0.0; n];
        let mut u = vec![0.0; n];
        let mut p = vec![0.0; n];
        for i in (1..n).rev() {
            let l = i - 1;
            let row_i = i * n;
            if l == 0 {
                e[i] = self.data[row_i];
                continue;
            }
            let scale: f64 = self.data[row_i..=row_i + l].iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                e[i] = self.data[row_i + l];
                continue;
            }
            let mut h = 0.0;
            for k in 0..=l {
                let v = self.data[row_i + k] / scale;
                u[k] = v;
                h += v * v;
            }
            let f = u[l];
            let g = if f >= 0.0 { -math::sqrt(h) } else { math::sqrt(h) };
            e[i] = scale * g;
            h -= f * g;
            u[l] = f - g;

            // p = A[0..=l, 0..=l] u / h, from the lower triangle only.
            p[..=l].iter_mut().for_each(|v| *v = 0.0);
            for j in 0..=l {
                let row = &self.data[j * n..j * n + j];
                let uj = u[j];
                let mut acc = self.data[j * n + j] * uj;
                for ((pk, &a), &uk) in p[..j].iter_mut().zip(row).zip(&u[..j]) {
                    acc += a * uk;
                    *pk += a * uj;
                }
                p[j] += acc;
            }
            let mut f_acc = 0.0;
            for j in 0..=l {
                p[j] /= h;
                f_acc += p[j] * u[j];
            }
            let hh = f_acc / (h + h);
            for j in 0..=l {
                p[j] -= hh * u[j];
            }
            // A -= u q^T + q u^T on the lower triangle.
            for j in 0..=l {
                let (uj, qj) = (u[j], p[j]);
                let row = &mut self.data[j * n..=j * n + j];
                for ((a, &qk), &uk) in row.iter_mut().zip(&p[..=j]).zip(&u[..=j]) {
                    *a -= uj * qk + qj * uk;
                }
            }
        }
        let d = (0..n).map(|i| self.data[i * n + i]).collect();
        (d, e)
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e[1..n]`, ascending.
pub fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Vec<f64> {
    let n = d.len();
    if n == 0 {
        return d;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 64 {
                // Never observed; accept the current diagonal.
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = math::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = math::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    d
}
