//! Cross-validation of the automata pipeline against direct lasso
//! evaluation: the deterministic parity automaton of a formula must agree
//! with the semantics on every sampled word, and complementation must agree
//! with negation.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rv_core::{evaluate_on_lasso, ltl_to_dpw, LtlFormula, DEFAULT_DPW_STATE_CAP};

use common::{gen_formula, gen_lasso};

#[test]
fn dpw_acceptance_matches_lasso_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let props = ["p", "q"];
    for round in 0..500 {
        let f = gen_formula(&mut rng, 6, &props);
        let dpw = ltl_to_dpw(&f, DEFAULT_DPW_STATE_CAP).unwrap();
        for _ in 0..20 {
            let w = gen_lasso(&mut rng, &props);
            assert_eq!(
                dpw.accepts_lasso(&w),
                evaluate_on_lasso(&f, &w),
                "round {round}: formula {f} disagrees with the oracle on {w:?}"
            );
        }
    }
}

#[test]
fn complement_agrees_with_negation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let props = ["p", "q"];
    for _ in 0..150 {
        let f = gen_formula(&mut rng, 6, &props);
        let dpw = ltl_to_dpw(&f, DEFAULT_DPW_STATE_CAP).unwrap();
        let complemented = dpw.complement();
        let negated = ltl_to_dpw(&LtlFormula::negate(f.clone()), DEFAULT_DPW_STATE_CAP).unwrap();
        for _ in 0..10 {
            let w = gen_lasso(&mut rng, &props);
            let direct = dpw.accepts_lasso(&w);
            assert_eq!(complemented.accepts_lasso(&w), !direct, "formula {f}, word {w:?}");
            assert_eq!(negated.accepts_lasso(&w), !direct, "formula {f}, word {w:?}");
        }
    }
}
