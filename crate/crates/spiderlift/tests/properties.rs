use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use spiderlift::angle_lift::{kneading_transform, lift_angle, lift_inverse, orbit_avoids_sector};
use spiderlift::angles::{from_digits, kneading, mu, orbit, static_sector, to_digits};
use spiderlift::external_address::{address_plan, cmp_cyl, theta_at};
use spiderlift::spider_combinatorics::{angular_class, build_spider, spiders_isomorphic};
use spiderlift::spider_dynamics::{exp_spider_solve, poly_spider_solve, DEFAULT_MAX_ITER};
use spiderlift::{Angle, ExternalAddress};

fn angle(max_den: u64) -> impl Strategy<Value = Angle> {
    (1..=max_den).prop_flat_map(|den| (0..den).prop_map(move |num| Angle::new(num, den).unwrap()))
}

/// `(d, j, θ)` with `d ∈ 2..=5` and `j < d`.
fn lift_input(max_den: u64) -> impl Strategy<Value = (u32, u32, Angle)> {
    (2u32..=5).prop_flat_map(move |d| (Just(d), 0..d, angle(max_den)))
}

fn address() -> impl Strategy<Value = ExternalAddress> {
    (
        prop::collection::vec(-2i64..=2, 0..3),
        prop::collection::vec(-2i64..=2, 1..4),
    )
        .prop_map(|(pre, rep)| ExternalAddress::new([vec![0], pre].concat(), rep).unwrap())
}

fn is_fixed(d: u32, t: &Angle) -> bool {
    mu(d, t) == *t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn digit_expansion_round_trips((d, _, t) in lift_input(3000)) {
        let e = to_digits(d, &t);
        prop_assert_eq!(from_digits(&e), t.clone());
        let o = orbit(d, &t);
        prop_assert_eq!((e.pre.len(), e.rep.len()), (o.preperiod, o.period));
        prop_assert!(e.pre.iter().chain(&e.rep).all(|&x| x < d));
    }

    #[test]
    fn lift_inverse_undoes_lift((d, j, t) in lift_input(3000)) {
        let z = lift_angle(d, j, &t).unwrap();
        prop_assert_eq!(lift_inverse(d + 1, j, &z).unwrap(), t);
        prop_assert!(orbit_avoids_sector(d + 1, j, &z));
    }

    #[test]
    fn lift_is_monotone((d, j, s) in lift_input(2000), t in angle(2000)) {
        let (zs, zt) = (lift_angle(d, j, &s).unwrap(), lift_angle(d, j, &t).unwrap());
        prop_assert_eq!(s.cmp(&t), zs.cmp(&zt));
    }

    #[test]
    fn lift_preserves_preperiod_and_period((d, j, t) in lift_input(3000)) {
        let z = lift_angle(d, j, &t).unwrap();
        let (a, b) = (orbit(d, &t), orbit(d + 1, &z));
        prop_assert_eq!((a.preperiod, a.period), (b.preperiod, b.period));
    }

    #[test]
    fn kneading_commutes_with_lift((d, j, t) in lift_input(2000)) {
        prop_assume!(!t.is_zero() && !is_fixed(d, &t));
        let m = static_sector(d, &t, &t).unwrap();
        let z = lift_angle(d, j, &t).unwrap();
        let direct = kneading(d + 1, &z).unwrap();
        prop_assert_eq!(kneading_transform(d, j, &kneading(d, &t).unwrap(), m), direct);
    }

    #[test]
    fn lift_conjugates_spiders((d, j, t) in lift_input(1000)) {
        prop_assume!(!is_fixed(d, &t));
        let z = lift_angle(d, j, &t).unwrap();
        prop_assert!(spiders_isomorphic(&build_spider(d, &t), &build_spider(d + 1, &z)));
    }

    /// Angles avoiding sector `j` are lifts, with two exceptions. When the
    /// orbit of `θ` hits the cut `(θ + j)/d`, the boundary symbol picks one
    /// of two angles a gap `1/((d+1)^k − 1)` apart, and the other is missed.
    /// And `μ_{d+1}` has one more fixed angle than `μ_d`.
    #[test]
    fn image_of_lift_is_characterized_by_the_missed_sector((d, j, _) in lift_input(2), phi in angle(3000)) {
        let avoids = orbit_avoids_sector(d + 1, j, &phi);
        match lift_inverse(d + 1, j, &phi) {
            Ok(t) => {
                prop_assert!(avoids);
                prop_assert_eq!(lift_angle(d, j, &t).unwrap(), phi);
            }
            Err(_) if avoids => {
                let o = orbit(d + 1, &phi);
                prop_assert!(o.is_periodic());
                if o.period == 1 {
                    return Ok(());
                }
                let gap = BigRational::new(BigInt::from(1), num_traits::pow(BigInt::from(d + 1), o.period) - 1);
                let boundary_partner = [gap.clone(), -gap].iter().any(|g| {
                    lift_inverse(d + 1, j, &phi.add_ratio(g)).is_ok_and(|t| {
                        let cut = Angle::from_ratio((t.ratio() + BigInt::from(j)) / BigInt::from(d));
                        orbit(d, &t).points.contains(&cut)
                    })
                });
                prop_assert!(boundary_partner, "d = {}, j = {}, φ = {}", d, j, phi);
            }
            Err(_) => {}
        }
    }

    #[test]
    fn cylinder_order_is_transitive(a in address(), b in address(), c in address()) {
        use std::cmp::Ordering::Less;
        if cmp_cyl(&a, &b) == Less && cmp_cyl(&b, &c) == Less {
            prop_assert_eq!(cmp_cyl(&a, &c), Less);
        }
    }

    #[test]
    fn address_plan_invariants(s in address()) {
        let plan = address_plan(&s).unwrap();
        prop_assert!(plan.q.degree().is_none_or(|deg| deg + 2 <= plan.ell + plan.k));
        prop_assert_eq!(plan.min_degree % 2, 1);
        for d in plan.min_degree..plan.min_degree + 4 {
            let theta = theta_at(&plan, d).unwrap();
            let e = to_digits(d, &theta);
            prop_assert!(e.pre.iter().chain(&e.rep).all(|&x| x < d));
            prop_assert_eq!(lift_angle(d, plan.j, &theta).unwrap(), theta_at(&plan, d + 1).unwrap());
        }
    }
}

#[test]
fn angular_classes_are_transported_by_the_lift() {
    for (d, j, t) in [
        (2u32, 1u32, "17/240"),
        (2, 0, "17/240"),
        (2, 0, "1/6"),
        (3, 1, "1/18"),
    ] {
        let t: Angle = t.parse().unwrap();
        let class = angular_class(d, &t).unwrap();
        let mut lifted: Vec<Angle> = class.iter().map(|s| lift_angle(d, j, s).unwrap()).collect();
        lifted.sort();
        let z = lift_angle(d, j, &t).unwrap();
        assert_eq!(
            lifted,
            angular_class(d + 1, &z).unwrap(),
            "d = {d}, j = {j}, θ = {t}"
        );
    }
}

#[test]
fn symmetry_under_translation_fails_at_a_fixed_point() {
    // Z₁(0) = 0 but Z₁(1/2) = 2/3 for d = 3, so Z_j(θ + 1/(d−1)) = Z_j(θ) + 1/d
    // cannot hold in general.
    let zero = Angle::zero();
    let half: Angle = "1/2".parse().unwrap();
    assert_eq!(lift_angle(3, 1, &zero).unwrap(), zero);
    assert_eq!(
        lift_angle(3, 1, &half).unwrap(),
        "2/3".parse::<Angle>().unwrap()
    );
    let shifted = lift_angle(3, 1, &zero)
        .unwrap()
        .add_ratio(&BigRational::new(BigInt::from(1), BigInt::from(3)));
    assert_ne!(shifted, lift_angle(3, 1, &half).unwrap());
}

#[test]
fn polynomial_residuals_are_eventually_monotone() {
    for (d, t) in [(2u32, "1/7"), (3, "163/6480"), (2, "17/240"), (4, "1/15")] {
        let r = poly_spider_solve(d, &t.parse().unwrap(), 1e-12, DEFAULT_MAX_ITER).unwrap();
        let tail = &r.residual_history[r.residual_history.len() / 2..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0]), "d = {d}, θ = {t}");
        assert_eq!(r.config.points[0], num_complex::Complex64::new(0.0, 0.0));
    }
}

#[test]
fn exponential_residuals_are_eventually_monotone() {
    for s in ["0|1", "0|-2", "0 0 0 -1|0 0 1 0", "0 0 0 1|0 0 1 0"] {
        let r = exp_spider_solve(&s.parse().unwrap(), 1e-12, DEFAULT_MAX_ITER).unwrap();
        let tail = &r.residual_history[r.residual_history.len() / 2..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0]), "s = {s}");
    }
}
