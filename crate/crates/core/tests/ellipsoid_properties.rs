mod common;

use std::collections::BTreeSet;

use common::small_rational;
use num_integer::Integer;
use num_traits::Zero;
use painleve::balance::EllipsoidPoint;
use painleve::ellipsoid::{
    enumerate_points, modular_obstruction, one_factor_points, secant_family, ObstructionVerdict, QuadricSpec,
};
use painleve::rational::{frac, Rational};
use proptest::prelude::*;

fn small_dims() -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(2u32..=12, 1..=3)
}

/// Brute force over every pair `(a/q1, b/q2)` with small denominators; keeps
/// those whose reduced common denominator is at most `bound`.
fn brute_force_pairs(dims: [u32; 2], bound: i64) -> BTreeSet<Vec<Rational>> {
    let spec = QuadricSpec::new(&dims).unwrap();
    let mut out = BTreeSet::new();
    for q in 1..=bound {
        for a in -2 * q..=2 * q {
            for b in -2 * q..=2 * q {
                let p = vec![frac(a, q), frac(b, q)];
                let den = p[0].denom().lcm(p[1].denom());
                if a != 0 && b != 0 && spec.contains(&p) && den <= bound.into() {
                    out.insert(p);
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumerated_points_lie_on_the_quadric(dims in small_dims(), bound in 1u32..=5) {
        let spec = QuadricSpec::new(&dims).unwrap();
        let found = enumerate_points(&spec, bound);
        let distinct: BTreeSet<_> = found.points.iter().collect();
        prop_assert_eq!(distinct.len(), found.points.len());
        for p in &found.points {
            prop_assert!(spec.contains(&p.coordinates));
            prop_assert!(p.coordinates.iter().all(|c| !c.is_zero()));
        }
    }

    #[test]
    fn two_factor_enumeration_matches_brute_force(d1 in 2u32..=9, d2 in 2u32..=9, bound in 1u32..=4) {
        let found: BTreeSet<Vec<Rational>> = enumerate_points(&QuadricSpec::new(&[d1, d2]).unwrap(), bound)
            .points
            .into_iter()
            .map(|p| p.coordinates)
            .collect();
        prop_assert_eq!(found, brute_force_pairs([d1, d2], i64::from(bound)));
    }

    #[test]
    fn obstruction_rules_out_points(dims in small_dims(), modulus in 2u32..=9) {
        let spec = QuadricSpec::new(&dims).unwrap();
        if modular_obstruction(&spec, modulus).unwrap() == ObstructionVerdict::Obstructed {
            let found = enumerate_points(&spec, 8);
            prop_assert!(found.points.is_empty());
            prop_assert_eq!(found.with_zero_coordinate, 0);
        }
    }

    #[test]
    fn one_factor_points_exist_only_for_squares(d in 2u32..=100) {
        let spec = QuadricSpec::new(&[d]).unwrap();
        let found = enumerate_points(&spec, 12).points;
        let root = (d as f64).sqrt().round() as u32;
        let square = root * root == d;
        prop_assert_eq!(!found.is_empty(), square && root <= 12);
        prop_assert_eq!(one_factor_points(d).len(), if square { 2 } else { 0 });
        if square && root <= 12 {
            prop_assert_eq!(found, one_factor_points(d));
        }
    }

    #[test]
    fn secant_points_are_distinct_and_on_the_quadric(
        dims in prop_oneof![Just(vec![2u32, 2]), Just(vec![2, 4]), Just(vec![8, 8]), Just(vec![2, 2, 2]), Just(vec![3, 6])],
        pick in any::<proptest::sample::Index>(),
        direction in proptest::collection::vec(small_rational(), 3),
        count in 1usize..12,
    ) {
        let spec = QuadricSpec::new(&dims).unwrap();
        let points = enumerate_points(&spec, 3).points;
        prop_assume!(!points.is_empty());
        let base = &points[pick.index(points.len())];
        let direction = direction[..dims.len()].to_vec();
        prop_assume!(direction.iter().any(|c| !c.is_zero()));
        let family = secant_family(&spec, base, &direction, count).unwrap();
        prop_assert_eq!(family.points.len() + family.skipped.len(), count);
        let distinct: BTreeSet<&EllipsoidPoint> = family.points.iter().collect();
        prop_assert_eq!(distinct.len(), family.points.len());
        for p in &family.points {
            prop_assert!(spec.contains(&p.coordinates));
            prop_assert!(p.coordinates.iter().all(|c| !c.is_zero()));
        }
    }
}

#[test]
fn mod_eight_obstructs_three_sevens() {
    let spec = QuadricSpec::new(&[7, 7, 7]).unwrap();
    assert_eq!(modular_obstruction(&spec, 8).unwrap(), ObstructionVerdict::Obstructed);
    assert!(enumerate_points(&spec, 20).points.is_empty());
}
