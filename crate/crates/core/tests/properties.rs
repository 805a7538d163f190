use charfun_core::equivalence::{kraus_invariance_defect, mixing_transform, tuples_unitarily_equivalent};
use charfun_core::fock::{apply_symbol, MultiAnalyticSymbol, Word, WordIndexer};
use charfun_core::numerics::{
    c, hermitian_eig, isometry_defect, orthonormal_range, pseudo_inverse, psd_sqrt, r, singular_values,
    solve_linear_nullspace, ComplexMatrix, ComplexVector, Svd,
};
use charfun_core::tuple::{
    gaussian_matrix, random_ergodic_tuple, random_ergodic_tuple_with_omega, random_unitary, star_stability_matrices,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random complex matrix of the given shape and rank.
fn low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> ComplexMatrix {
    let mut g = rng(seed);
    gaussian_matrix(rows, rank, &mut g) * gaussian_matrix(rank, cols, &mut g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn svd_reconstructs(rows in 1usize..10, cols in 1usize..10, seed in any::<u64>()) {
        let m = gaussian_matrix(rows, cols, &mut rng(seed));
        let svd = Svd::new(&m);
        let k = svd.sigma.len();
        let sigma = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(k, svd.sigma.iter().map(|&s| r(s))));
        prop_assert!((&svd.u * sigma * svd.v.adjoint() - &m).norm() < 1e-12 * m.norm().max(1.0));
        prop_assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(isometry_defect(&svd.v) < 1e-12);
    }

    #[test]
    fn eig_and_sqrt_reconstruct(n in 1usize..=12, rank in 1usize..=12, seed in any::<u64>()) {
        let rank = rank.min(n);
        let g = gaussian_matrix(n, rank, &mut rng(seed));
        let m = &g * g.adjoint();
        let eig = hermitian_eig(&m, 1e-10).unwrap();
        prop_assert!((eig.reconstruct() - &m).norm() < 1e-10 * m.norm());
        let root = psd_sqrt(&m, 1e-12).unwrap();
        prop_assert!((&root * &root - &m).norm() < 1e-8 * m.norm());
    }

    #[test]
    fn range_of_projector(n in 1usize..=8, rank in 1usize..=8, seed in any::<u64>()) {
        let rank = rank.min(n);
        let u = random_unitary(n, &mut rng(seed));
        let q = u.columns(0, rank).into_owned();
        let p = &q * q.adjoint();
        let basis = orthonormal_range(&p, 1e-9);
        prop_assert_eq!(basis.ncols(), rank);
        prop_assert!(isometry_defect(&basis) < 1e-12);
        prop_assert!((&basis * basis.adjoint() - &p).norm() < 1e-12);
        // The complement is orthogonal to the range.
        let complement = ComplexMatrix::identity(n, n) - &p;
        prop_assert!((complement * &basis).norm() < 1e-12);
    }

    #[test]
    fn range_and_kernel_of_low_rank(rows in 2usize..9, cols in 2usize..9, rank in 1usize..4, seed in any::<u64>()) {
        let rank = rank.min(rows).min(cols);
        let m = low_rank(rows, cols, rank, seed);
        prop_assert_eq!(orthonormal_range(&m, 1e-9).ncols(), rank);
        let kernel = solve_linear_nullspace(&m, 1e-9);
        prop_assert_eq!(kernel.ncols(), cols - rank);
        prop_assert!((&m * &kernel).norm() < 1e-9 * m.norm());
        prop_assert_eq!(singular_values(&m).iter().filter(|&&s| s > 1e-9 * m.norm()).count(), rank);
    }

    #[test]
    fn pseudo_inverse_penrose(rows in 1usize..8, cols in 1usize..8, rank in 1usize..4, seed in any::<u64>()) {
        let rank = rank.min(rows).min(cols);
        let m = low_rank(rows, cols, rank, seed);
        let p = pseudo_inverse(&m, 1e-10);
        let scale = m.norm().max(1.0);
        prop_assert!((&m * &p * &m - &m).norm() < 1e-9 * scale);
        prop_assert!((&p * &m * &p - &p).norm() < 1e-9 * p.norm().max(1.0));
        let mp = &m * &p;
        prop_assert!((&mp - mp.adjoint()).norm() < 1e-9);
    }

    #[test]
    fn word_indexing_is_a_bijection(d in 1usize..=4, depth in 0usize..=5) {
        let ix = WordIndexer::new(d, depth).unwrap();
        for (k, w) in ix.words().enumerate() {
            prop_assert_eq!(ix.index(&w).unwrap(), k);
            prop_assert_eq!(ix.word(k), w.clone());
            prop_assert_eq!(ix.len_of(k), w.len());
            if !w.is_empty() {
                let (parent, letter) = ix.split_last(k);
                prop_assert_eq!(ix.append_index(parent, letter), k);
                let first = w.letters()[0];
                let rest = Word(w.letters()[1..].to_vec());
                prop_assert_eq!(ix.prepend_index(ix.index(&rest).unwrap(), first), k);
            }
        }
        prop_assert_eq!(ix.count(), ix.words().count());
    }

    #[test]
    fn symbol_action_is_linear(d in 2usize..=3, depth in 0usize..=3, src in 1usize..=3, seed in any::<u64>()) {
        let mut g = rng(seed);
        let frame = random_unitary(d, &mut g).columns(0, d - 1).into_owned();
        let mut sym = MultiAnalyticSymbol::new(d, depth, src, frame).unwrap();
        let words: Vec<Word> = WordIndexer::new(d, depth).unwrap().words().collect();
        for w in words.iter().step_by(2) {
            sym.insert(w, gaussian_matrix(d - 1, src, &mut g)).unwrap();
        }
        let x = gaussian_matrix(src, 1, &mut g).column(0).into_owned();
        let y = gaussian_matrix(src, 1, &mut g).column(0).into_owned();
        let a = c(0.7, -1.3);
        let lhs = apply_symbol(&sym, &(&x * a + &y)).unwrap();
        let fx = apply_symbol(&sym, &x).unwrap();
        let fy = apply_symbol(&sym, &y).unwrap();
        let scale = 1.0 + lhs.norm();
        prop_assert!((lhs.data - (fx.data * a + fy.data)).norm() < 1e-12 * scale);
    }
}

/// `Σ_{|α|=len} Å_αÅ_α*` by enumerating words.
fn brute_force_m(a_ring: &[ComplexMatrix], len: usize) -> ComplexMatrix {
    let n = a_ring[0].nrows();
    let mut products = vec![ComplexMatrix::identity(n, n)];
    for _ in 0..len {
        products = products.iter().flat_map(|p| a_ring.iter().map(move |a| p * a)).collect();
    }
    products.iter().fold(ComplexMatrix::zeros(n, n), |acc, p| acc + p * p.adjoint())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn star_stability_recursion_matches_enumeration(d in 2usize..=3, n in 2usize..=4, seed in any::<u64>()) {
        let et = random_ergodic_tuple(d, n, seed).unwrap();
        let ms = star_stability_matrices(&et.profile, 6);
        for len in 1..=6 {
            let brute = brute_force_m(&et.profile.a_ring, len);
            prop_assert!((&ms[len - 1] - brute).norm() < 1e-12);
        }
    }

    #[test]
    fn ring_is_spanned_by_word_images_of_ell(d in 2usize..=3, n in 2usize..=5, seed in any::<u64>()) {
        let et = random_ergodic_tuple(d, n, seed).unwrap();
        let p = &et.profile;
        let mut cols = Vec::new();
        let mut frontier: Vec<ComplexVector> = p.ell.clone();
        for _ in 0..n {
            cols.extend(frontier.iter().cloned());
            frontier = frontier.iter().flat_map(|v| p.a_ring.iter().map(move |a| a * v)).collect();
        }
        let span = ComplexMatrix::from_columns(&cols);
        prop_assert_eq!(orthonormal_range(&span, 1e-9).ncols(), n - 1);
    }

    #[test]
    fn unitary_equivalence_is_symmetric(d in 2usize..=3, n in 2usize..=4, seed in any::<u64>(), conj in any::<bool>()) {
        let a = random_ergodic_tuple(d, n, seed).unwrap();
        let mut g = rng(seed ^ 0x5eed);
        let b = if conj {
            a.tuple.conjugate_by(&random_unitary(n, &mut g))
        } else {
            random_ergodic_tuple_with_omega(&a.profile.omega, n, &mut g).unwrap().tuple
        };
        let ab = tuples_unitarily_equivalent(&a.tuple, &b, 1e-8);
        let ba = tuples_unitarily_equivalent(&b, &a.tuple, 1e-8);
        prop_assert_eq!(ab.u.is_some(), ba.u.is_some());
        prop_assert_eq!(ab.u.is_some(), conj);
        if let (Some(u), Some(v)) = (ab.u, ba.u) {
            // V is U* up to a phase.
            let prod = &v * &u;
            let phase = prod[(0, 0)];
            prop_assert!((prod - ComplexMatrix::identity(n, n) * phase).norm() < 1e-8);
        }
    }

    #[test]
    fn mixing_preserves_kraus_map(d in 2usize..=3, n in 2usize..=4, seed in any::<u64>()) {
        let a = random_ergodic_tuple(d, n, seed).unwrap();
        let u = random_unitary(d, &mut rng(seed.wrapping_add(1)));
        let (mixed, w) = mixing_transform(&a.tuple, &a.profile.omega, &u, 1e-12).unwrap();
        prop_assert!(kraus_invariance_defect(&a.tuple, &mixed) < 1e-12);
        prop_assert!((w.norm() - 1.0).abs() < 1e-12);
    }
}
