mod common;

use common::{dims, small_rational};
use num_traits::Zero;
use painleve::rational::{int, Rational};
use painleve::{build_bb_system, build_warped_system, QuadraticSystem};
use proptest::prelude::*;

/// Replaces `state[var]` so that `G(state) = 0`; `var` must enter `G` only
/// through a unit linear term.
fn onto_constraint(sys: &QuadraticSystem, mut state: Vec<Rational>, var: usize) -> Vec<Rational> {
    let g = sys.eval_constraint(&state).unwrap();
    state[var] -= g;
    state
}

fn bb_d2() -> impl Strategy<Value = u32> {
    (1u32..=5).prop_map(|k| 2 * k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn warped_constraint_is_invariant_on_its_zero_set(
        (dims, state) in dims(4).prop_flat_map(|d| {
            let n = 2 * d.len() + 2;
            (Just(d), proptest::collection::vec(small_rational(), n))
        }),
        pick in any::<proptest::sample::Index>(),
    ) {
        let sys = build_warped_system(&dims).unwrap();
        let var = pick.index(dims.len());
        let state = onto_constraint(&sys, state, var);
        prop_assert!(sys.eval_constraint(&state).unwrap().is_zero());
        prop_assert!(sys.constraint_rate(&state).unwrap().is_zero());
    }

    #[test]
    fn bb_constraint_is_invariant_on_its_zero_set(
        d2 in bb_d2(),
        state in proptest::collection::vec(small_rational(), 6),
        var in 0usize..2,
    ) {
        let sys = build_bb_system(d2).unwrap();
        let state = onto_constraint(&sys, state, var);
        prop_assert!(sys.eval_constraint(&state).unwrap().is_zero());
        prop_assert!(sys.constraint_rate(&state).unwrap().is_zero());
    }

    /// Along `p + s v` a quadratic right-hand side has vanishing third
    /// differences in `s`.
    #[test]
    fn right_hand_sides_are_at_most_quadratic(
        (dims, p, v) in dims(3).prop_flat_map(|d| {
            let n = 2 * d.len() + 2;
            (
                Just(d),
                proptest::collection::vec(small_rational(), n),
                proptest::collection::vec(small_rational(), n),
            )
        }),
        use_bb in any::<bool>(),
        d2 in bb_d2(),
    ) {
        let sys = if use_bb { build_bb_system(d2).unwrap() } else { build_warped_system(&dims).unwrap() };
        let n = sys.n_vars();
        let at = |s: i64| {
            let x: Vec<Rational> = (0..n).map(|k| &p[k % p.len()] + int(s) * &v[k % v.len()]).collect();
            sys.eval_rhs(&x).unwrap()
        };
        let f: Vec<Vec<Rational>> = (0..4).map(at).collect();
        for (j, (((f0, f1), f2), f3)) in f[0].iter().zip(&f[1]).zip(&f[2]).zip(&f[3]).enumerate() {
            let third = f3 - int(3) * f2 + int(3) * f1 - f0;
            prop_assert!(third.is_zero(), "equation {j}");
        }
    }
}
