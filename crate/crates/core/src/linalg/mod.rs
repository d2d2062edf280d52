//! Dense complex linear algebra: tensor products, partial traces and
//! transposes, vectorization, and eigendecompositions.

mod eigen;
mod matrix;
mod vector;

pub use eigen::{
    eig_unitary, hermitian_eigen, inverse_sqrt_psd, min_eigenvalue, phase_fix, Eigenpair,
    HermitianEigen, EIG_TOL,
};
pub use matrix::CMatrix;
pub use num_complex::Complex64 as C64;
pub use vector::{vectorize, StateVector};

/// `A ⊗ B`, left factor major.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> crate::Result<CMatrix> {
    m.partial_trace(dims, keep)
}

pub fn partial_transpose(m: &CMatrix, dims: &[usize], factor: usize) -> crate::Result<CMatrix> {
    m.partial_transpose(dims, factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, seeded};
    use crate::Error;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_vec(2, 2, vec![c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap()
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_real_diag(&[1.0, -1.0])
    }

    #[test]
    fn kron_identities() {
        assert_eq!(tensor(&CMatrix::identity(2), &CMatrix::identity(2)), CMatrix::identity(4));
        assert_eq!(
            tensor(&CMatrix::from_real_diag(&[1.0, 2.0]), &CMatrix::identity(2)),
            CMatrix::from_real_diag(&[1.0, 1.0, 2.0, 2.0])
        );
    }

    #[test]
    fn kron_x_z() {
        let m = tensor(&pauli_x(), &pauli_z());
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 2)] = c(1.0);
        expected[(1, 3)] = c(-1.0);
        expected[(2, 0)] = c(1.0);
        expected[(3, 1)] = c(-1.0);
        assert_eq!(m, expected);
    }

    #[test]
    fn partial_trace_examples() {
        let pt = partial_trace(&CMatrix::identity(4), &[2, 2], &[0]).unwrap();
        assert_eq!(pt, CMatrix::identity(2).scale_real(2.0));

        let a = CMatrix::from_real_diag(&[1.0, 2.0]);
        let b = CMatrix::from_real_diag(&[3.0, 4.0]);
        let pt = partial_trace(&tensor(&a, &b), &[2, 2], &[0]).unwrap();
        assert_eq!(pt, a.scale_real(7.0));

        let mut rng = seeded(3);
        let m = random_matrix(&mut rng, 6, 6);
        let full = partial_trace(&m, &[2, 3], &[]).unwrap();
        assert_eq!((full.rows(), full.cols()), (1, 1));
        assert!((full[(0, 0)] - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_errors() {
        let m = CMatrix::identity(4);
        assert!(matches!(partial_trace(&m, &[2, 3], &[0]), Err(Error::Dimension(_))));
        assert!(matches!(partial_trace(&m, &[2, 2], &[1, 0]), Err(Error::Dimension(_))));
        assert!(matches!(partial_trace(&m, &[2, 2], &[2]), Err(Error::Dimension(_))));
        let rect = CMatrix::zeros(2, 4);
        assert!(matches!(partial_trace(&rect, &[2], &[0]), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn partial_transpose_examples() {
        let mut rng = seeded(5);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 3, 3);
        let ab = tensor(&a, &b);
        let pt = partial_transpose(&ab, &[2, 3], 0).unwrap();
        assert!(pt.max_abs_diff(&tensor(&a.transpose(), &b)) < 1e-15);
        let twice = partial_transpose(&pt, &[2, 3], 0).unwrap();
        assert_eq!(twice, ab);
        assert!(partial_transpose(&ab, &[2, 3], 2).is_err());
    }

    #[test]
    fn partial_transpose_of_max_entangled_is_swap() {
        let omega = vectorize(&CMatrix::identity(2)).unwrap();
        let pt = partial_transpose(&CMatrix::projector(&omega), &[2, 2], 0).unwrap();
        let mut swap = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = c(1.0);
            }
        }
        assert_eq!(pt, swap);
    }

    #[test]
    fn vectorize_examples() {
        let v = vectorize(&CMatrix::identity(2)).unwrap();
        assert_eq!(v.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(1.0)]);
        let v = vectorize(&pauli_z()).unwrap();
        assert_eq!(v.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        assert!(matches!(
            vectorize(&CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn eig_unitary_diagonal_and_shift() {
        let z = eig_unitary(&pauli_z()).unwrap();
        assert!((z[0].value - c(1.0)).norm() < 1e-12);
        assert_eq!(z[0].vector, StateVector::basis(2, 0));
        assert!((z[1].value - c(-1.0)).norm() < 1e-12);
        assert_eq!(z[1].vector, StateVector::basis(2, 1));

        let x = eig_unitary(&pauli_x()).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((x[0].value - c(1.0)).norm() < 1e-12);
        assert!(x[0].vector.distance(&StateVector::from_amplitudes(vec![c(h), c(h)])) < 1e-12);
        assert!((x[1].value - c(-1.0)).norm() < 1e-12);
        assert!(x[1].vector.distance(&StateVector::from_amplitudes(vec![c(h), c(-h)])) < 1e-12);
    }

    #[test]
    fn eig_unitary_degenerate_and_errors() {
        let id = eig_unitary(&CMatrix::identity(3)).unwrap();
        assert_eq!(id.len(), 3);
        let not_unitary = CMatrix::from_real_diag(&[1.0, 2.0]);
        assert!(matches!(eig_unitary(&not_unitary), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let mut rng = seeded(11);
        for n in [1, 2, 3, 5, 8, 13] {
            let a = random_matrix(&mut rng, n, n);
            let h = (&a + &a.adjoint()).scale_real(0.5);
            let eig = hermitian_eigen(&h).unwrap();
            let back = eig.map_values(|x| x);
            assert!(back.max_abs_diff(&h) < 1e-12, "n={n}");
            let gram = &eig.vectors.adjoint() * &eig.vectors;
            assert!(gram.max_abs_diff(&CMatrix::identity(n)) < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn inverse_sqrt_on_support() {
        let m = CMatrix::from_real_diag(&[4.0, 0.0, 1.0]);
        let (inv, kernel) = inverse_sqrt_psd(&m, 1e-12).unwrap();
        assert!(inv.max_abs_diff(&CMatrix::from_real_diag(&[0.5, 0.0, 1.0])) < 1e-14);
        assert!(kernel.max_abs_diff(&CMatrix::from_real_diag(&[0.0, 1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn permute_factors_swaps_kron() {
        let mut rng = seeded(7);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 3, 3);
        let swapped = tensor(&a, &b).permute_factors(&[2, 3], &[1, 0]).unwrap();
        assert!(swapped.max_abs_diff(&tensor(&b, &a)) < 1e-15);
    }

    fn small_square(n: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            CMatrix::from_vec(n, n, v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
                .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn mixed_product(a in small_square(2), b in small_square(3), c2 in small_square(2), d in small_square(3)) {
            let lhs = &tensor(&a, &b) * &tensor(&c2, &d);
            let rhs = tensor(&(&a * &c2), &(&b * &d));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn kron_associative(a in small_square(2), b in small_square(3), c2 in small_square(2)) {
            let lhs = tensor(&tensor(&a, &b), &c2);
            let rhs = tensor(&a, &tensor(&b, &c2));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn partial_trace_of_product(a in small_square(2), b in small_square(3)) {
            let ab = tensor(&a, &b);
            let keep_a = partial_trace(&ab, &[2, 3], &[0]).unwrap();
            prop_assert!(keep_a.max_abs_diff(&a.scale(b.trace())) < 1e-12);
            let keep_b = partial_trace(&ab, &[2, 3], &[1]).unwrap();
            prop_assert!(keep_b.max_abs_diff(&b.scale(a.trace())) < 1e-12);
        }

        #[test]
        fn vectorize_inner_is_hilbert_schmidt(a in small_square(3), b in small_square(3)) {
            let lhs = vectorize(&a).unwrap().inner(&vectorize(&b).unwrap());
            let rhs = (&a.adjoint() * &b).trace();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn eig_unitary_orthonormal(a in small_square(3)) {
            // Cayley transform of a Hermitian matrix is unitary.
            let h = (&a + &a.adjoint()).scale_real(0.5);
            let i = CMatrix::identity(3);
            let ih = h.scale(C64::new(0.0, 1.0));
            let num = &i - &ih;
            let den = &i + &ih;
            let eig = hermitian_eigen(&h).unwrap();
            // (I + iH)^{-1} via the eigendecomposition of H.
            let den_inv = {
                let n = 3;
                let mut acc = CMatrix::zeros(n, n);
                for k in 0..n {
                    let v = eig.vector(k);
                    let w = C64::new(1.0, eig.values[k]).inv();
                    acc += &CMatrix::projector(&v).scale(w);
                }
                acc
            };
            prop_assert!((&den * &den_inv).max_abs_diff(&i) < 1e-10);
            let u = &num * &den_inv;
            let pairs = eig_unitary(&u.scale_real(1.0)).unwrap();
            let vs: Vec<StateVector> = pairs.iter().map(|p| p.vector.clone()).collect();
            for (x, vx) in vs.iter().enumerate() {
                for (y, vy) in vs.iter().enumerate() {
                    let g = vx.inner(vy);
                    let target = if x == y { 1.0 } else { 0.0 };
                    prop_assert!((g - C64::new(target, 0.0)).norm() < 1e-9);
                }
            }
        }
    }
}
