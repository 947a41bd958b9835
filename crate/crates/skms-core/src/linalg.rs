//! Small dense complex linear algebra.
//!
//! Everything here targets the modest problem sizes of this crate (matrices up
//! to a few hundred rows): dense storage, a cyclic Jacobi eigensolver for
//! hermitian matrices, LU determinants, a skew-symmetric Pfaffian by
//! congruence elimination, and a few convenience transforms built on the
//! eigendecomposition. Determinism matters more than peak speed.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub type CVec = Vec<Complex64>;

pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..a.len() {
        s += a[i].conj() * b[i];
    }
    s
}

pub fn vec_norm(a: &[Complex64]) -> f64 {
    cdot(a, a).re.sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = entries[i];
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(entries[i], 0.0);
        }
        m
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, c: Complex64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * c)
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> CVec {
        assert_eq!(self.cols, v.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                s += self[(i, j)] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.rows.min(self.cols) {
            s += self[(i, i)];
        }
        s
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> CVec {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let t = self[(a, j)];
            self[(a, j)] = self[(b, j)];
            self[(b, j)] = t;
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let t = self[(i, a)];
            self[(i, a)] = self[(i, b)];
            self[(i, b)] = t;
        }
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with matching orthonormal
/// eigenvector columns. The input is symmetrized first; the off-diagonal
/// remainder after convergence is below `1e-13` times the Frobenius norm.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0));
    let mut v = CMat::identity(n);
    let scale = m.frobenius().max(1e-300);
    for _sweep in 0..80 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let abs_apq = apq.norm();
                if abs_apq <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let ph = apq / abs_apq;
                // rotation angle zeroing the (p,q) element
                let tau = (aqq - app) / (2.0 * abs_apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_ph = ph * s; // s * e^{i alpha}
                // column update: A <- A J
                for i in 0..n {
                    let aip = m[(i, p)];
                    let aiq = m[(i, q)];
                    m[(i, p)] = aip * c - aiq * s_ph.conj();
                    m[(i, q)] = aip * s_ph + aiq * c;
                }
                // row update: A <- J^* A
                for j in 0..n {
                    let apj = m[(p, j)];
                    let aqj = m[(q, j)];
                    m[(p, j)] = apj * c - aqj * s_ph;
                    m[(q, j)] = apj * s_ph.conj() + aqj * c;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * s_ph.conj();
                    v[(i, q)] = vip * s_ph + viq * c;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap().then(i.cmp(&j)));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (newcol, &oldcol) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, newcol)] = v[(i, oldcol)];
        }
    }
    (sorted_vals, vecs)
}

/// Apply a real scalar function to a hermitian matrix through its spectrum.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    hermitian_function_c(a, |x| Complex64::new(f(x), 0.0))
}

/// Apply a complex scalar function to a hermitian matrix through its spectrum.
pub fn hermitian_function_c(a: &CMat, f: impl Fn(f64) -> Complex64) -> CMat {
    let (vals, v) = hermitian_eigen(a);
    let n = a.rows;
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let fv = f(vals[k]);
        if fv.norm_sqr() == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = v[(i, k)];
            for j in 0..n {
                out[(i, j)] += fv * vik * v[(j, k)].conj();
            }
        }
    }
    out
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    CMat::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

/// Trace norm of a hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(a: &CMat) -> f64 {
    hermitian_eigen(a).0.iter().map(|x| x.abs()).sum()
}

/// Trace norm through singular values, valid for any square matrix.
pub fn trace_norm_singular(a: &CMat) -> f64 {
    let ata = a.adjoint().mul(a);
    hermitian_eigen(&ata)
        .0
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .sum()
}

/// Determinant by LU with partial pivoting.
pub fn det(a: &CMat) -> Complex64 {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    let mut d = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = m[(k, k)].norm();
        for i in (k + 1)..n {
            let c = m[(i, k)].norm();
            if c > best {
                best = c;
                piv = i;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            m.swap_rows(piv, k);
            d = -d;
        }
        d *= m[(k, k)];
        for i in (k + 1)..n {
            let factor = m[(i, k)] / m[(k, k)];
            for j in k..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= factor * mkj;
            }
        }
    }
    d
}

/// Pfaffian of an antisymmetric matrix by congruence elimination with pivoting.
///
/// For odd dimension (or an exactly singular input) the result is zero.
pub fn pfaffian(a: &CMat) -> Complex64 {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mut m = a.clone();
    let mut result = Complex64::new(1.0, 0.0);
    let scale = m.max_abs().max(1e-300);
    let mut k = 0;
    while k < n - 1 {
        let mut piv = k + 1;
        let mut best = m[(k + 1, k)].norm();
        for i in (k + 2)..n {
            let c = m[(i, k)].norm();
            if c > best {
                best = c;
                piv = i;
            }
        }
        if best <= 1e-280 * scale {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k + 1 {
            m.swap_rows(piv, k + 1);
            m.swap_cols(piv, k + 1);
            result = -result;
        }
        result *= m[(k, k + 1)];
        let pivot = m[(k + 1, k)];
        for i in (k + 2)..n {
            let factor = m[(i, k)] / pivot;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                let mkj = m[(k + 1, j)];
                m[(i, j)] -= factor * mkj;
            }
            for row in 0..n {
                let mrk = m[(row, k + 1)];
                m[(row, i)] -= factor * mrk;
            }
        }
        k += 2;
    }
    result
}

/// Orthonormalize the columns of `a` in place (modified Gram-Schmidt, two passes).
pub fn orthonormalize_columns(a: &mut CMat) {
    let n = a.cols;
    for j in 0..n {
        let mut col = a.column(j);
        for _pass in 0..2 {
            for k in 0..j {
                let prev = a.column(k);
                let proj = cdot(&prev, &col);
                for i in 0..col.len() {
                    col[i] -= proj * prev[i];
                }
            }
        }
        let nrm = vec_norm(&col);
        assert!(nrm > 1e-12, "rank-deficient column set");
        for z in col.iter_mut() {
            *z /= nrm;
        }
        a.set_column(j, &col);
    }
}
