//! Property tests: structural invariants that must hold for every seed,
//! not just the ones unit tests happen to pick.

use bandlab_core::linalg::{lu_factor, qr_positive, singular_values};
use bandlab_core::lyapunov::newman_exponent;
use bandlab_core::model::{anticommutator_norm, build_model, ChiralSignature, ModelKind};
use bandlab_core::resolvent::{dagger_inverse, resolvent_block, zero_energy_corner_block};
use bandlab_core::sampling::{sample_ginibre, EntryField};
use bandlab_core::{ComplexMatrix, RngStream};
use num_complex::Complex64;
use proptest::prelude::*;

fn ginibre(width: usize, seed: u64) -> ComplexMatrix {
    // Unit-scale entries keep condition numbers reasonable for W <= 6.
    sample_ginibre(width, &RngStream::new(seed))
        .unwrap()
        .scale(Complex64::new((width as f64).sqrt(), 0.0))
}

fn kind_strategy() -> impl Strategy<Value = ModelKind> {
    prop_oneof![
        Just(ModelKind::Full),
        Just(ModelKind::Chiral),
        Just(ModelKind::GeneralChiral),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_models_are_exactly_hermitian(
        seed in any::<u64>(),
        n in 2usize..6,
        w in 1usize..4,
        kind in kind_strategy(),
    ) {
        let h = build_model(kind, EntryField::Complex, n, w, &RngStream::new(seed)).unwrap();
        prop_assert_eq!(h.to_dense().hermitian_defect(), 0.0);
    }

    #[test]
    fn band_anticommutator_equals_dense_anticommutator(
        seed in any::<u64>(),
        n in 2usize..6,
        w in 1usize..4,
        kind in kind_strategy(),
    ) {
        let h = build_model(kind, EntryField::Complex, n, w, &RngStream::new(seed)).unwrap();
        let dense = h.to_dense();
        let s = ChiralSignature::new(n, w).to_dense();
        let dense_norm = (&(&s * &dense) + &(&dense * &s)).frobenius_norm();
        let band_norm = anticommutator_norm(&h);
        if kind == ModelKind::Full {
            prop_assert!((band_norm - dense_norm).abs() <= 1e-12 * (1.0 + band_norm));
        } else {
            prop_assert_eq!(band_norm, 0.0);
            prop_assert_eq!(dense_norm, 0.0);
        }
    }

    #[test]
    fn signature_squares_to_identity(n in 2usize..8, w in 1usize..4) {
        let s = ChiralSignature::new(n, w).to_dense();
        prop_assert_eq!(&s * &s, ComplexMatrix::identity(n * w));
    }

    #[test]
    fn qr_reconstructs_with_positive_diagonal(seed in any::<u64>(), w in 1usize..6) {
        let a = ginibre(w, seed);
        let (q, r) = qr_positive(&a).unwrap();
        prop_assert!((&(&q.adjoint() * &q) - &ComplexMatrix::identity(w)).max_abs() < 1e-12);
        prop_assert!((&(&q * &r) - &a).max_abs() < 1e-11);
        for k in 0..w {
            prop_assert!(r[(k, k)].im == 0.0 && r[(k, k)].re > 0.0);
            for j in 0..k {
                prop_assert_eq!(r[(k, j)], Complex64::ZERO);
            }
        }
    }

    #[test]
    fn dagger_inverse_is_an_involution(seed in any::<u64>(), w in 1usize..5) {
        let t = ginibre(w, seed);
        let twice = dagger_inverse(&dagger_inverse(&t).unwrap()).unwrap();
        prop_assert!((&twice - &t).max_abs() < 1e-8 * (1.0 + t.max_abs()));
    }

    #[test]
    fn singular_values_are_sorted_and_adjoint_invariant(seed in any::<u64>(), w in 1usize..6) {
        let a = ginibre(w, seed);
        let sv = singular_values(&a);
        prop_assert_eq!(sv.len(), w);
        for pair in sv.windows(2) {
            prop_assert!(pair[0] >= pair[1]);
        }
        prop_assert!(sv.iter().all(|&s| s >= 0.0));
        let sv_adj = singular_values(&a.adjoint());
        for (x, y) in sv.iter().zip(&sv_adj) {
            prop_assert!((x - y).abs() < 1e-11 * (1.0 + x));
        }
    }

    #[test]
    fn log_determinant_is_additive_over_products(seed in any::<u64>(), w in 1usize..5) {
        let a = ginibre(w, seed);
        let b = ginibre(w, seed.wrapping_add(1));
        let lhs = lu_factor(&(&a * &b)).unwrap().log_abs_det();
        let rhs = lu_factor(&a).unwrap().log_abs_det() + lu_factor(&b).unwrap().log_abs_det();
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn corner_formula_equals_dense_inversion(
        seed in any::<u64>(),
        half_n in 1usize..4,
        w in 1usize..4,
        general in any::<bool>(),
    ) {
        let n = 2 * half_n;
        let kind = if general { ModelKind::GeneralChiral } else { ModelKind::Chiral };
        let h = build_model(kind, EntryField::Complex, n, w, &RngStream::new(seed)).unwrap();
        let corner = zero_energy_corner_block(&h).unwrap();
        let dense_corner = lu_factor(&h.to_dense())
            .unwrap()
            .inverse()
            .block(0, (n - 1) * w, w, w);
        let scale = corner.max_abs().max(1.0);
        prop_assert!((&corner - &dense_corner).max_abs() < 1e-9 * scale);
    }

    #[test]
    fn resolvent_blocks_obey_conjugate_symmetry(
        seed in any::<u64>(),
        n in 2usize..5,
        w in 1usize..3,
        re in -1.0f64..1.0,
        im in 0.2f64..2.0,
        kind in kind_strategy(),
    ) {
        let h = build_model(kind, EntryField::Complex, n, w, &RngStream::new(seed)).unwrap();
        let z = Complex64::new(re, im);
        let g_1n = resolvent_block(&h, z, 1, n).unwrap();
        let g_n1 = resolvent_block(&h, z.conj(), n, 1).unwrap();
        prop_assert!(
            (&g_n1.block.adjoint() - &g_1n.block).max_abs() < 1e-10 * (1.0 + g_1n.norm)
        );
        // Spectral norm bound away from the real axis.
        prop_assert!(g_1n.norm <= 1.0 / im + 1e-9);
    }

    #[test]
    fn reference_spectra_are_strictly_ordered(w in 2usize..40) {
        for k in 1..w {
            prop_assert!(newman_exponent(w, k).unwrap() > newman_exponent(w, k + 1).unwrap());
        }
    }
}
