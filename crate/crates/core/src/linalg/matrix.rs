use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use super::{StateVector, C64};
use crate::math;
use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension("entry count must equal rows * cols"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// The rank-one operator `|a⟩⟨b|`.
    pub fn outer(a: &StateVector, b: &StateVector) -> Self {
        Self::from_fn(a.dim(), b.dim(), |i, j| a[i] * b[j].conj())
    }

    pub fn projector(v: &StateVector) -> Self {
        Self::outer(v, v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> StateVector {
        StateVector::from_amplitudes((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square(), "hermitian part of a non-square matrix");
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| math::modulus(a - b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|&z| math::modulus(z)).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `max |M - M†|`; infinite for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max(math::modulus(self[(i, j)] - self[(j, i)].conj()));
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() < tol
    }

    /// `max |M†M - I|`; infinite for non-square input.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() < tol
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector shape mismatch");
        StateVector::from_amplitudes(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(v.amplitudes())
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
        )
    }

    /// `⟨v| M |v⟩`.
    pub fn expectation(&self, v: &StateVector) -> C64 {
        v.inner(&self.apply(v))
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        assert_eq!(self.rows, other.cols, "shape mismatch");
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// Kronecker product, left factor major.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    let base = (i * other.rows + k) * cols + j * other.cols;
                    for l in 0..other.cols {
                        out.data[base + l] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Column-stacked blocks `⟨b| M |b'⟩` of an operator on `X ⊗ Y`, indexed by
    /// the `Y` basis: returns the `dim_x × dim_x` block for `(b, b')`.
    pub fn block_of_second(&self, dim_x: usize, dim_y: usize, b: usize, b2: usize) -> Self {
        assert_eq!(self.rows, dim_x * dim_y, "shape mismatch");
        Self::from_fn(dim_x, dim_x, |i, j| self[(i * dim_y + b, j * dim_y + b2)])
    }

    /// Partial trace over every factor not listed in `keep`.
    ///
    /// `dims` lists the tensor factors; `keep` names the surviving factors in
    /// increasing order. Keeping nothing returns the `1 × 1` matrix `Tr M`.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        self.check_dims(dims)?;
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::Dimension("keep must be increasing factor indices"));
        }
        let strides = strides(dims);
        let kept: Vec<usize> = keep.to_vec();
        let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
        let keep_offsets = offsets(dims, &strides, &kept);
        let trace_offsets = offsets(dims, &strides, &traced);
        let n = keep_offsets.len();
        let mut out = Self::zeros(n, n);
        for (a, &oa) in keep_offsets.iter().enumerate() {
            for (b, &ob) in keep_offsets.iter().enumerate() {
                let mut acc = ZERO;
                for &t in &trace_offsets {
                    acc += self[(oa + t, ob + t)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(out)
    }

    /// Transpose on tensor factor `factor` only.
    pub fn partial_transpose(&self, dims: &[usize], factor: usize) -> Result<Self> {
        self.check_dims(dims)?;
        if factor >= dims.len() {
            return Err(Error::Dimension("factor index out of range"));
        }
        let stride = strides(dims)[factor];
        let d = dims[factor];
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let di = (i / stride) % d;
            for j in 0..self.cols {
                let dj = (j / stride) % d;
                let ni = i - di * stride + dj * stride;
                let nj = j - dj * stride + di * stride;
                out[(ni, nj)] = self[(i, j)];
            }
        }
        Ok(out)
    }

    /// Reorders tensor factors: factor `k` of the result is factor `order[k]`
    /// of the input.
    pub fn permute_factors(&self, dims: &[usize], order: &[usize]) -> Result<Self> {
        self.check_dims(dims)?;
        let map = factor_permutation(dims, order)?;
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(map[i], map[j])] = self[(i, j)];
            }
        }
        Ok(out)
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension("factor dimensions must be positive"));
        }
        if dims.iter().product::<usize>() != self.rows {
            return Err(Error::Dimension("product of factor dimensions must equal matrix size"));
        }
        Ok(())
    }
}

/// Row-major strides of a tensor index (left factor major).
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

// Linear offsets of every joint index over `factors`, in lexicographic order.
fn offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &o in &out {
            for v in 0..dims[f] {
                next.push(o + v * strides[f]);
            }
        }
        out = next;
    }
    out
}

/// Index map sending an input basis index to its position after reordering
/// factors so that output factor `k` is input factor `order[k]`.
pub(crate) fn factor_permutation(dims: &[usize], order: &[usize]) -> Result<Vec<usize>> {
    let n = dims.len();
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::Dimension("order must list every factor once"));
    }
    for &o in order {
        if o >= n || seen[o] {
            return Err(Error::Dimension("order must list every factor once"));
        }
        seen[o] = true;
    }
    let in_strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let out_strides = strides(&new_dims);
    let total: usize = dims.iter().product();
    Ok((0..total)
        .map(|idx| {
            order
                .iter()
                .enumerate()
                .map(|(k, &o)| ((idx / in_strides[o]) % dims[o]) * out_strides[k])
                .sum()
        })
        .collect())
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl core::ops::AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}
