#![allow(dead_code)]

use std::collections::BTreeMap;

use painleve::balance::{
    balance_bb, balance_multi_case_i, balance_multi_case_ii, dos, uno, Balance, EllipsoidPoint, Sign,
};
use painleve::ellipsoid::{enumerate_points, QuadricSpec};
use painleve::rational::{frac, Rational};
use proptest::prelude::*;

/// Rationals `p/q` with `|p| <= 12`, `1 <= q <= 6`.
pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=6).prop_map(|(p, q)| frac(p, q))
}

pub fn nonzero_rational() -> impl Strategy<Value = Rational> {
    small_rational().prop_filter("nonzero", |r| *r != frac(0, 1))
}

/// Warped dimension tuples with `r <= max_r` factors of dimension `2..=10`.
pub fn dims(max_r: usize) -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(2u32..=10, 1..=max_r)
}

/// Every balance family over small dimension grids, with a label for
/// failure messages. Case II points come from the enumerator.
pub fn representative_balances() -> Vec<Balance> {
    let mut out = Vec::new();
    for d in 2..=6 {
        out.push(uno(d).unwrap());
    }
    for d in [4, 9] {
        out.push(dos(d, Sign::Plus).unwrap());
        out.push(dos(d, Sign::Minus).unwrap());
    }
    for dims in [vec![2, 3], vec![3, 2], vec![2, 2, 3]] {
        for l in 1..=dims.len() {
            out.push(balance_multi_case_i(&dims, l).unwrap());
        }
    }
    for dims in [vec![2, 2], vec![2, 4], vec![8, 8]] {
        let spec = QuadricSpec::new(&dims).unwrap();
        for p in enumerate_points(&spec, 3).points.into_iter().take(4) {
            out.push(balance_multi_case_ii(&dims, &p).unwrap());
        }
    }
    out.push(balance_multi_case_ii(&[2, 2, 3], &EllipsoidPoint::new(vec![frac(1, 1), frac(-1, 1)])).unwrap());
    for d2 in [2, 4, 6] {
        out.push(balance_bb(d2).unwrap());
    }
    out
}

/// Binds every free parameter of `bal` from `values`, cycling.
pub fn bind(bal: &Balance, values: &[Rational]) -> BTreeMap<String, Rational> {
    bal.free_parameters
        .iter()
        .enumerate()
        .map(|(k, name)| (name.clone(), values[k % values.len()].clone()))
        .collect()
}
