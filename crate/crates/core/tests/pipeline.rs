//! End-to-end use of the public API: from module to window to the Hecke
//! kernel, plus randomized invariants.

use std::sync::Arc;

use phigamma::borel::{check_acbormu, random_representatives, BorelElem, PsiWindow};
use phigamma::ffield::FiniteField;
use phigamma::induction::{act_induction, evaluate_pi, kernel_generators, moment_vectors, window_requirements};
use phigamma::modules::build_rho;
use phigamma::padic::{CharacterData, PadicScalar};
use phigamma::series::CharSeries;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn kernel_generators_vanish_on_windows_after_translation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = FiniteField::new(5, 2).unwrap();
    let lambda = k.generator();
    let (r, s) = (3, 1);
    let module = Arc::new(build_rho(&k, r, s, lambda).unwrap());
    let chars = CharacterData::new(5, r, s, lambda).unwrap();
    let reps = random_representatives(5, 20, &mut rng);
    let gens = kernel_generators(&k, &chars, &reps, &moment_vectors(&k, r)).unwrap();
    assert_eq!(gens.len(), 5);
    let g = BorelElem::from_ints(5, 2, 7, 3).unwrap();
    let family: Vec<_> = gens.iter().map(|f| act_induction(&g, f).unwrap()).collect();
    let (depth, base) = family.iter().map(window_requirements).fold((0, 1), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    for _ in 0..5 {
        let w = PsiWindow::random(module.clone(), depth, base, &mut rng).unwrap();
        for f in &family {
            assert!(evaluate_pi(f, &w).unwrap().is_zero());
        }
    }
}

fn small_case() -> impl Strategy<Value = (u32, u32, i64, u64)> {
    prop_oneof![Just(3u32), Just(5u32)].prop_flat_map(|p| (Just(p), 0..p, 0i64..2, any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn psi_inverts_phi(p in prop_oneof![Just(3u32), Just(5), Just(7)], v in -3i64..4, seed in any::<u64>()) {
        let k = FiniteField::new(p, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = CharSeries::random(&k, v, 40, &mut rng);
        prop_assert!(f.phi_linear().psi_linear().agrees_with(&f));
    }

    #[test]
    fn theta_transforms_by_the_bkz_character((p, r, s, seed) in small_case()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = FiniteField::new(p, 2).unwrap();
        let module = Arc::new(build_rho(&k, r, s, k.generator()).unwrap());
        let w = PsiWindow::random(module, 0, 16, &mut rng).unwrap();
        let v = (seed % 3) as i64 - 1;
        let g = BorelElem::new(
            PadicScalar::random_unit(p, 12, &mut rng).shift(v),
            PadicScalar::random_integral(p, 12, &mut rng).shift(v),
            PadicScalar::random_unit(p, 12, &mut rng).shift(v),
        ).unwrap();
        prop_assert!(check_acbormu(&g, &w).unwrap());
    }
}
