//! Seeded randomness and random test objects (states, effects, unitaries).
//!
//! All sampling goes through [`ChaCha8Rng`], so every result is a pure
//! function of its seed on every platform.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::FieldElement;
use crate::linalg::{hermitian_eigen, CMatrix, StateVector, C64};
use crate::math;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seed number `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index.wrapping_add(1));
    rng.next_u64()
}

/// Uniform element of `F_p`. `p` must already be known prime.
pub fn uniform_field<R: Rng + ?Sized>(rng: &mut R, p: u32) -> FieldElement {
    FieldElement::reduce(rng.random_range(0..p) as u64, p)
}

/// Standard normal sample (Box–Muller).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    math::sqrt(-2.0 * math::ln(u1)) * libm::cos(2.0 * PI * u2)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(gaussian(rng), gaussian(rng)) * core::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    let amps: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    StateVector::from_amplitudes(amps).normalized()
}

/// `A A†` for Gaussian `A`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let a = random_matrix(rng, dim, dim);
    &a * &a.adjoint()
}

/// Density matrix `G / Tr G` with `G = A A†`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = random_psd(rng, dim);
    let tr = g.trace().re;
    g.scale_real(1.0 / tr)
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let a = random_matrix(rng, dim, dim);
    (&a + &a.adjoint()).scale_real(0.5)
}

/// Random effect `0 ≤ Π ≤ I`: a random eigenbasis with eigenvalues uniform
/// in `[0, 1]`.
pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let h = random_hermitian(rng, dim);
    let eig = hermitian_eigen(&h).expect("hermitian by construction");
    let values: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let n = dim;
    CMatrix::from_fn(n, n, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for (k, &w) in values.iter().enumerate() {
            acc += eig.vectors[(i, k)] * eig.vectors[(j, k)].conj() * w;
        }
        acc
    })
}

/// Haar-like random unitary from Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let a = random_matrix(rng, dim, dim);
    let mut cols: Vec<StateVector> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = a.column(j);
        for q in &cols {
            let proj = q.inner(&v);
            let amps: Vec<C64> = v
                .amplitudes()
                .iter()
                .zip(q.amplitudes())
                .map(|(&x, &y)| x - y * proj)
                .collect();
            v = StateVector::from_amplitudes(amps);
        }
        cols.push(v.normalized());
    }
    CMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}
