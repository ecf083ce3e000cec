use proptest::prelude::*;
use weakkam_core::*;

#[test]
fn generator_for_four_sites() {
    let l = build_generator::<f64>(4).unwrap();
    let expected = [
        [-2.0, 1.0, 0.0, 1.0],
        [1.0, -2.0, 1.0, 0.0],
        [0.0, 1.0, -2.0, 1.0],
        [1.0, 0.0, 1.0, -2.0],
    ];
    for (i, row) in expected.iter().enumerate() {
        for (j, want) in row.iter().enumerate() {
            assert_eq!(l.entry(i, j), *want);
        }
    }
}

#[test]
fn two_site_couplings_are_summed() {
    let l = build_generator::<f64>(2).unwrap().to_dense();
    assert_eq!((l.get(0, 0), l.get(0, 1), l.get(1, 0), l.get(1, 1)), (-2.0, 2.0, 2.0, -2.0));
}

#[test]
fn tiny_lattices_are_rejected() {
    assert!(matches!(build_generator::<f64>(1), Err(Error::InvalidLattice { .. })));
    assert!(matches!(build_generator::<f64>(0), Err(Error::InvalidLattice { .. })));
}

proptest! {
    #[test]
    fn generator_is_a_symmetric_rate_matrix(k in 2usize..400) {
        let l = build_generator::<f64>(k).unwrap();
        prop_assert!(l.row_sums().iter().all(|s| *s == 0.0));
        prop_assert!(l.is_symmetric(0.0));
        for i in 0..k.min(8) {
            for j in 0..k {
                if i != j {
                    prop_assert!(l.entry(i, j) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn apply_matches_dense_product(k in 2usize..40, seed in any::<u64>()) {
        let x: Vec<f64> = (0..k).map(|j| ((seed.wrapping_mul(j as u64 + 1) % 1000) as f64) / 97.0 - 5.0).collect();
        let v = Potential::cosine(0.7);
        let s = schrodinger_matrix(k, &v).unwrap();
        let dense = s.to_dense();
        let a = s.apply(&x);
        let b = dense.mul_vec(&x);
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() <= 1e-12 * (1.0 + q.abs()));
        }
        let at = s.apply_transpose(&x);
        let bt = dense.transpose().mul_vec(&x);
        for (p, q) in at.iter().zip(&bt) {
            prop_assert!((p - q).abs() <= 1e-12 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn nearest_site_is_the_left_neighbour(x in -3.0f64..3.0, k in 2usize..500) {
        let j = nearest_site(x, k);
        prop_assert!(j < k);
        let frac = x - x.floor();
        let site = j as f64 / k as f64;
        prop_assert!(site <= frac + 1e-12 && frac - site < 1.0 / k as f64 + 1e-12);
    }

    #[test]
    fn extension_interpolates_and_preserves_sites(k in 2usize..64, mult in 1usize..8, amp in -3.0f64..3.0) {
        let lattice = Lattice::new(k).unwrap();
        let f = GridFunction::new(lattice, (0..k).map(|j| amp * (j as f64).sin()).collect()).unwrap();
        let fine = extend_profile(&f, k * mult).unwrap();
        for j in 0..k {
            prop_assert_eq!(fine.values()[j * mult], f[j]);
        }
        prop_assert!(fine.max() <= f.max() && fine.min() >= f.min());
    }
}
