use proptest::prelude::*;
use rand::Rng;

use schurmult::completion::{complete, CompletionError, complete_with_fill_in, gram_factorize, verify_extension};
use schurmult::linalg::ComplexMatrix;
use schurmult::multiplier::{
    admissible_chordal, assemble_full, restrict, schur_apply, BlockMultiplier, ScalarKernel,
};
use schurmult::pattern::{fill_in, is_chordal, Pattern};
use schurmult::random::{gue, trial_rng, wishart};
use schurmult::schur_engine::{factorize, positivity_equivalences};

fn random_pattern(seed: u64, n: usize, p: f64) -> Pattern {
    let mut rng = trial_rng(seed, 99);
    let mut edges = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            if rng.random_bool(p) {
                edges.push((x, y));
            }
        }
    }
    Pattern::from_edges(n, &edges)
}

fn gram_multiplier(seed: u64, n: usize, d: usize, rank: usize) -> BlockMultiplier {
    let w = wishart(&mut trial_rng(seed, 0), n * d, rank);
    BlockMultiplier::from_assembled(n, d, w.as_matrix()).unwrap()
}

#[test]
fn completion_then_factorization_passes_equivalences() {
    let full = gram_multiplier(3, 6, 2, 4);
    let (pattern, _) = fill_in(&random_pattern(3, 6, 0.4));
    let phi = restrict(&full, &pattern).unwrap();
    let res = complete(&phi, 1e-9).unwrap();
    let fac = gram_factorize(&res, 1e-8).unwrap();
    let rebuilt = BlockMultiplier::from_assembled(6, 2, &fac.reconstruct_all()).unwrap();
    let report = positivity_equivalences(&rebuilt, 100, 3, 1).unwrap();
    assert_eq!(report.verdicts(), [true; 4]);
    let two_sided = factorize(&res.psi).unwrap();
    assert!(two_sided.symmetric);
}

#[test]
fn fill_in_route_matches_verification() {
    let mut accepted = 0;
    for seed in 0..25u64 {
        let n = 4 + seed as usize % 6;
        let pattern = random_pattern(seed, n, 0.45);
        let full = gram_multiplier(seed, n, 1 + seed as usize % 2, n);
        let phi = restrict(&full, &pattern).unwrap();
        match complete_with_fill_in(&phi, 1e-9) {
            Ok(out) => {
                assert!(is_chordal(&fill_in(&pattern).0).is_chordal());
                let report = verify_extension(&phi, &out.result.psi, 50, seed);
                assert!(report.passed(), "seed {seed}: {:?}", report.failures);
                accepted += 1;
            }
            Err(CompletionError::FillInRejected { min_eig, .. }) => assert!(min_eig < 0.0),
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    assert!(accepted >= 15, "only {accepted} of 25 accepted");
}

#[test]
fn indefinite_clique_data_never_completes() {
    for seed in 0..20u64 {
        let n = 3 + seed as usize % 5;
        let (pattern, _) = fill_in(&random_pattern(seed, n, 0.5));
        let h = gue(&mut trial_rng(seed, 5), n);
        let full = BlockMultiplier::from_assembled(n, 1, h.as_matrix()).unwrap();
        let phi = restrict(&full, &pattern).unwrap();
        let clique_ok = admissible_chordal(&phi, 1e-9).unwrap().is_admissible();
        assert_eq!(complete(&phi, 1e-9).is_ok(), clique_ok, "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn specified_blocks_survive_bitwise(n in 2usize..=10, d in 1usize..=3, p in 0.1f64..0.8, seed in any::<u64>()) {
        let (pattern, _) = fill_in(&random_pattern(seed, n, p));
        let full = gram_multiplier(seed, n, d, 1 + seed as usize % (n * d));
        let phi = restrict(&full, &pattern).unwrap();
        let res = complete(&phi, 1e-9).unwrap();
        for (&(x, y), b) in phi.blocks() {
            let got = res.psi.block(x, y);
            prop_assert!(got.as_slice().iter().zip(b.as_slice()).all(|(u, v)| u.re.to_bits() == v.re.to_bits() && u.im.to_bits() == v.im.to_bits()));
        }
        let norm = assemble_full(&full).frobenius_norm();
        prop_assert!(res.min_eig >= -1e-8 * norm);
        let fac = gram_factorize(&res, 1e-8).unwrap();
        let assembled = assemble_full(&res.psi);
        let err = (&fac.reconstruct_all() - assembled.as_matrix()).frobenius_norm();
        prop_assert!(err <= 1e-7 * assembled.frobenius_norm());
    }

    #[test]
    fn all_ones_kernel_reproduces_assembly(n in 1usize..=8, d in 1usize..=3, seed in any::<u64>()) {
        let h = gue(&mut trial_rng(seed, 0), n * d);
        let phi = BlockMultiplier::from_assembled(n, d, h.as_matrix()).unwrap();
        let out = schur_apply(&phi, &ScalarKernel::ones(n)).unwrap();
        let assembled: &ComplexMatrix = &assemble_full(&phi).into_matrix();
        prop_assert_eq!(&out, assembled);
    }
}
