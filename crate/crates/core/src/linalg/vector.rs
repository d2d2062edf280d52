use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use super::{CMatrix, C64};
use crate::math;
use crate::{Error, Result};

/// A vector in `C^dim`, typically a pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sqr())
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        math::abs(self.norm_sqr() - 1.0) < tol
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scale(C64::new(1.0 / n, 0.0))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            amps: self.amps.iter().map(|&a| a * s).collect(),
        }
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.amps {
            for &b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    pub fn conj(&self) -> Self {
        Self {
            amps: self.amps.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        math::sqrt(
            self.amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum(),
        )
    }
}

impl Index<usize> for StateVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.amps[i]
    }
}

/// `|M⟩⟩ = Σ_kl m_kl |k⟩|l⟩`, with `k` as the major index.
pub fn vectorize(m: &CMatrix) -> Result<StateVector> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(StateVector::from_amplitudes(m.as_slice().to_vec()))
}
