//! Small dense/sparse linear-algebra layer shared by the engine.
//!
//! Vectors are plain `[C64]` slices. Dense matrices are `faer::Mat<C64>`;
//! eigen- and singular-value problems are delegated to faer.

use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// A linear map on `C^dim`, applied without materializing the matrix.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Overwrites `y` with `A x`.
    fn apply(&self, x: &[C64], y: &mut [C64]);

    /// True when every matrix element is real in the working basis.
    fn is_real(&self) -> bool {
        false
    }

    fn to_dense(&self) -> CMat {
        let n = self.dim();
        let mut out = CMat::zeros(n, n);
        let mut e = vec![ZERO; n];
        let mut col = vec![ZERO; n];
        for j in 0..n {
            e[j] = ONE;
            self.apply(&e, &mut col);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
            e[j] = ZERO;
        }
        out
    }
}

/// Compressed-row sparse matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists. Columns within a row are
    /// sorted; duplicate columns are summed.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                debug_assert!(c < n);
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let row = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[row.clone()].binary_search(&j) {
            Ok(pos) => self.values[row.start + pos],
            Err(_) => ZERO,
        }
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(i, yi)| {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *yi = acc;
        });
    }

    fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    fn to_dense(&self) -> CMat {
        let mut out = CMat::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[(i, self.cols[k])] = self.values[k];
            }
        }
        out
    }
}

/// Dense matrices act as operators too.
impl LinearOperator for CMat {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        matvec(self, x, y);
    }

    fn is_real(&self) -> bool {
        (0..self.ncols()).all(|j| (0..self.nrows()).all(|i| self[(i, j)].im == 0.0))
    }

    fn to_dense(&self) -> CMat {
        self.clone()
    }
}

/// `<a, b>` antilinear in the first argument.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn scale(a: &mut [C64], s: C64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// `y += s x`
pub fn axpy(s: C64, x: &[C64], y: &mut [C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += s * xi);
}

pub fn matvec(m: &CMat, x: &[C64], y: &mut [C64]) {
    assert_eq!(m.ncols(), x.len());
    assert_eq!(m.nrows(), y.len());
    y.iter_mut().for_each(|v| *v = ZERO);
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += m[(i, j)] * xj;
        }
    }
}

pub fn adjoint(m: &CMat) -> CMat {
    CMat::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

pub fn hermitian_part(m: &CMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    CMat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn identity(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn trace(m: &CMat) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// `|u><v|`
pub fn outer(u: &[C64], v: &[C64]) -> CMat {
    CMat::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// unitary whose columns are the eigenvectors. Only the lower triangle is read.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().map(|v| v.re).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Real symmetric eigensolve; eigenvectors returned column-major.
pub fn real_symmetric_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, evd.U().to_owned()))
}

pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    m.singular_values()
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Sum of absolute eigenvalues of the Hermitian part.
pub fn trace_norm_hermitian(m: &CMat) -> Result<f64> {
    Ok(hermitian_eigenvalues(&hermitian_part(m))?
        .iter()
        .map(|v| v.abs())
        .sum())
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.into_iter().fold(0.0, f64::max))
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}
