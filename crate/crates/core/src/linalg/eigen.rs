//! Eigendecompositions for Hermitian and unitary matrices.
//!
//! Hermitian matrices use cyclic complex Jacobi rotations; the matrices in
//! this crate are at most a few dozen rows, where Jacobi is accurate to a few
//! ulps and needs no external LAPACK. Unitary matrices are diagonalized as a
//! commuting pair of Hermitian matrices.

use alloc::vec::Vec;

use super::{CMatrix, StateVector, C64};
use crate::math;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, k: usize) -> StateVector {
        self.vectors.column(k)
    }

    /// `V f(Λ) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for (k, &w) in fv.iter().enumerate() {
                if w != 0.0 {
                    acc += self.vectors[(i, k)] * self.vectors[(j, k)].conj() * w;
                }
            }
            acc
        })
    }
}

/// Diagonalizes a Hermitian matrix. The input is symmetrized first, so tiny
/// rounding asymmetries are tolerated; gross asymmetry is an error.
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let scale = m.max_abs().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > 1e-8 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        let total: f64 = a.as_slice().iter().map(|z| z.norm_sqr()).sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let values = order.iter().map(|&k| diag[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

// One Jacobi rotation zeroing a[p][q]. With c = r e^{iφ} the 2×2 block is
// P S P† for real symmetric S and P = diag(1, e^{-iφ}); rotating by P R
// diagonalizes it.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = math::modulus(apq);
    if r < 1e-300 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / r;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + math::sqrt(1.0 + tau * tau))
    } else {
        -1.0 / (-tau + math::sqrt(1.0 + tau * tau))
    };
    let c = 1.0 / math::sqrt(1.0 + t * t);
    let s = t * c;
    let e = phase.conj();
    // Columns of the 2x2 unitary: (c, -e s) and (s, e c).
    let u00 = C64::new(c, 0.0);
    let u01 = C64::new(s, 0.0);
    let u10 = -e * s;
    let u11 = e * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u00 + akq * u10;
        a[(k, q)] = akp * u01 + akq * u11;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u00.conj() * apk + u10.conj() * aqk;
        a[(q, k)] = u01.conj() * apk + u11.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u00 + vkq * u10;
        v[(k, q)] = vkp * u01 + vkq * u11;
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigen(m)?.min())
}

/// `M^{-1/2}` on the support of a PSD matrix; eigenvalues at or below
/// `cutoff` are treated as zero. Also returns the projector onto the kernel.
pub fn inverse_sqrt_psd(m: &CMatrix, cutoff: f64) -> Result<(CMatrix, CMatrix)> {
    let eig = hermitian_eigen(m)?;
    let inv = eig.map_values(|x| if x > cutoff { 1.0 / math::sqrt(x) } else { 0.0 });
    let kernel = eig.map_values(|x| if x > cutoff { 0.0 } else { 1.0 });
    Ok((inv, kernel))
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: C64,
    pub vector: StateVector,
}

/// Residual tolerance for accepting a unitary eigenpair.
pub const EIG_TOL: f64 = 1e-9;

/// Orthonormal eigenbasis of a unitary matrix.
///
/// Eigenvalues are sorted by phase angle in `[0, 2π)`. Each eigenvector is
/// phase-fixed so that its first component of (numerically) largest modulus
/// is real and positive.
pub fn eig_unitary(u: &CMatrix) -> Result<Vec<Eigenpair>> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let defect = u.unitarity_defect();
    if defect >= 1e-12 {
        return Err(Error::NotUnitary(defect));
    }
    let n = u.rows();
    let ud = u.adjoint();
    let re_part = (u + &ud).scale_real(0.5);
    let im_part = (u - &ud).scale(C64::new(0.0, -0.5));

    let first = hermitian_eigen(&re_part)?;
    let mut columns: Vec<StateVector> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && first.values[end] - first.values[end - 1] < 1e-7 {
            end += 1;
        }
        let block = CMatrix::from_fn(n, end - start, |i, j| first.vectors[(i, start + j)]);
        if end - start == 1 {
            columns.push(block.column(0));
        } else {
            // Resolve the cluster with the anti-Hermitian part.
            let sub = &(&block.adjoint() * &im_part) * &block;
            let second = hermitian_eigen(&sub)?;
            let rotated = &block * &second.vectors;
            for k in 0..(end - start) {
                columns.push(rotated.column(k));
            }
        }
        start = end;
    }

    let mut pairs = Vec::with_capacity(n);
    for v in columns {
        let uv = u.apply(&v);
        let value = v.inner(&uv);
        let residual = uv.distance(&v.scale(value));
        if residual >= EIG_TOL {
            return Err(Error::UnresolvedCluster(residual));
        }
        pairs.push(Eigenpair {
            value,
            vector: phase_fix(&v),
        });
    }
    pairs.sort_by(|a, b| math::angle_0_2pi(a.value).total_cmp(&math::angle_0_2pi(b.value)));
    Ok(pairs)
}

/// Rotates a vector's global phase so that its first component whose modulus
/// is within `EIG_TOL` of the maximum becomes real and positive.
pub fn phase_fix(v: &StateVector) -> StateVector {
    let max = v
        .amplitudes()
        .iter()
        .map(|&z| math::modulus(z))
        .fold(0.0, f64::max);
    let Some(lead) = v
        .amplitudes()
        .iter()
        .copied()
        .find(|&z| math::modulus(z) >= max - EIG_TOL)
    else {
        return v.clone();
    };
    let m = math::modulus(lead);
    if m == 0.0 {
        return v.clone();
    }
    v.scale(lead.conj() / m)
}
