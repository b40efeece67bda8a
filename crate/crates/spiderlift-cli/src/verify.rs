//! Randomized and exhaustive invariant checks, deterministic given a seed.

use std::cmp::Ordering;

use clap::ValueEnum;
use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use spiderlift::angle_lift::{kneading_transform, lift_angle, lift_inverse, orbit_avoids_sector};
use spiderlift::angles::{
    angle_from_digits, from_digits, kneading, mu, orbit, static_sector, to_digits,
};
use spiderlift::external_address::{address_plan, cmp_cyl, theta_at};
use spiderlift::spider_combinatorics::{
    angular_class, build_spider, companion_pair, companion_pair_exhaustive,
    orbit_portrait_from_pair, spiders_isomorphic,
};
use spiderlift::spider_dynamics::{approximate, poly_spider_solve, DEFAULT_MAX_ITER};
use spiderlift::{Angle, ExternalAddress};

use crate::output::{chain_residual, float};

const TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Angles,
    Lift,
    Address,
    Combinatorics,
    Dynamics,
    All,
}

pub struct Property {
    suite: &'static str,
    name: &'static str,
    cases: usize,
    counterexample: Option<String>,
}

pub struct Report {
    seed: u64,
    properties: Vec<Property>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.counterexample.is_none())
    }

    pub fn to_json(&self) -> Value {
        let props: Vec<Value> = self
            .properties
            .iter()
            .map(|p| {
                json!({
                    "suite": p.suite,
                    "name": p.name,
                    "cases": p.cases,
                    "passed": p.counterexample.is_none(),
                    "counterexample": p.counterexample,
                })
            })
            .collect();
        let failed = self
            .properties
            .iter()
            .filter(|p| p.counterexample.is_some())
            .count();
        json!({ "seed": self.seed, "passed": self.passed(), "failed": failed, "properties": props })
    }
}

/// Checks `check` on every input; the first failure in input order is the
/// counterexample, so the report does not depend on scheduling.
fn property<T: Sync>(
    suite: &'static str,
    name: &'static str,
    inputs: &[T],
    check: impl Fn(&T) -> Option<String> + Sync + Send,
) -> Property {
    let counterexample = inputs.par_iter().find_map_first(check);
    Property {
        suite,
        name,
        cases: inputs.len(),
        counterexample,
    }
}

fn random_angle(rng: &mut ChaCha8Rng, max_den: u64) -> Angle {
    let den = rng.random_range(1..=max_den);
    Angle::new(rng.random_range(0..den), den).expect("positive denominator")
}

/// `(d, j, θ)` with `d ∈ 2..=5`, `j < d`.
fn lift_inputs(rng: &mut ChaCha8Rng, n: usize, max_den: u64) -> Vec<(u32, u32, Angle)> {
    (0..n)
        .map(|_| {
            let d = rng.random_range(2..=5);
            (d, rng.random_range(0..d), random_angle(rng, max_den))
        })
        .collect()
}

fn random_address(rng: &mut ChaCha8Rng) -> ExternalAddress {
    let pre_len = rng.random_range(0..=2);
    let rep_len = rng.random_range(1..=3);
    let mut pre = vec![0];
    pre.extend((0..pre_len).map(|_| rng.random_range(-2..=2)));
    let rep = (0..rep_len).map(|_| rng.random_range(-2..=2)).collect();
    ExternalAddress::new(pre, rep).expect("nonempty period")
}

fn random_digits(rng: &mut ChaCha8Rng, d: u32, len: usize) -> Vec<u32> {
    (0..len).map(|_| rng.random_range(0..d)).collect()
}

fn is_fixed(d: u32, t: &Angle) -> bool {
    mu(d, t) == *t
}

fn angles(rng: &mut ChaCha8Rng) -> Vec<Property> {
    let inputs = lift_inputs(rng, 1000, 10_000);
    vec![
        property(
            "angles",
            "digit expansion round trip",
            &inputs,
            |(d, _, t)| {
                let e = to_digits(*d, t);
                (from_digits(&e) != *t).then(|| format!("d = {d}, θ = {t}, digits {e}"))
            },
        ),
        property(
            "angles",
            "digit lengths are the preperiod and period",
            &inputs,
            |(d, _, t)| {
                let (e, o) = (to_digits(*d, t), orbit(*d, t));
                ((e.pre.len(), e.rep.len()) != (o.preperiod, o.period))
                    .then(|| format!("d = {d}, θ = {t}"))
            },
        ),
        property(
            "angles",
            "multiplication shifts the digits",
            &inputs,
            |(d, _, t)| {
                let e = to_digits(*d, t);
                let shifted = match e.pre.split_first() {
                    Some((_, rest)) => angle_from_digits(*d, rest, &e.rep),
                    None => {
                        let rep: Vec<u32> = e
                            .rep
                            .iter()
                            .cycle()
                            .skip(1)
                            .take(e.rep.len())
                            .copied()
                            .collect();
                        angle_from_digits(*d, &[], &rep)
                    }
                };
                (shifted != mu(*d, t)).then(|| format!("d = {d}, θ = {t}"))
            },
        ),
    ]
}

fn lift(rng: &mut ChaCha8Rng) -> Vec<Property> {
    let inputs = lift_inputs(rng, 1000, 2000);
    let pairs: Vec<(u32, u32, Angle, Angle)> = lift_inputs(rng, 1000, 2000)
        .into_iter()
        .map(|(d, j, s)| (d, j, s, random_angle(rng, 2000)))
        .collect();
    let small = lift_inputs(rng, 200, 300);
    vec![
        property("lift", "inverse undoes the lift", &inputs, |(d, j, t)| {
            let z = lift_angle(*d, *j, t).ok()?;
            (lift_inverse(d + 1, *j, &z).ok().as_ref() != Some(t))
                .then(|| format!("d = {d}, j = {j}, θ = {t}"))
        }),
        property(
            "lift",
            "lifted orbit avoids sector j",
            &inputs,
            |(d, j, t)| {
                let z = lift_angle(*d, *j, t).ok()?;
                (!orbit_avoids_sector(d + 1, *j, &z)).then(|| format!("d = {d}, j = {j}, θ = {t}"))
            },
        ),
        property("lift", "monotonicity", &pairs, |(d, j, s, t)| {
            let (zs, zt) = (lift_angle(*d, *j, s).ok()?, lift_angle(*d, *j, t).ok()?);
            (s.cmp(t) != zs.cmp(&zt)).then(|| format!("d = {d}, j = {j}, s = {s}, t = {t}"))
        }),
        property(
            "lift",
            "preperiod and period preserved",
            &inputs,
            |(d, j, t)| {
                let z = lift_angle(*d, *j, t).ok()?;
                let (a, b) = (orbit(*d, t), orbit(d + 1, &z));
                ((a.preperiod, a.period) != (b.preperiod, b.period))
                    .then(|| format!("d = {d}, j = {j}, θ = {t}"))
            },
        ),
        property(
            "lift",
            "kneading transform commutes with the lift",
            &inputs,
            |(d, j, t)| {
                if t.is_zero() || is_fixed(*d, t) {
                    return None;
                }
                let m = static_sector(*d, t, t)?;
                let z = lift_angle(*d, *j, t).ok()?;
                let direct = kneading(d + 1, &z).ok();
                let transformed = kneading(*d, t)
                    .ok()
                    .map(|nu| kneading_transform(*d, *j, &nu, m));
                (direct != transformed).then(|| format!("d = {d}, j = {j}, θ = {t}"))
            },
        ),
        property(
            "lift",
            "spiders are isomorphic across the lift",
            &small,
            |(d, j, t)| {
                if is_fixed(*d, t) {
                    return None;
                }
                let z = lift_angle(*d, *j, t).ok()?;
                (!spiders_isomorphic(&build_spider(*d, t), &build_spider(d + 1, &z)))
                    .then(|| format!("d = {d}, j = {j}, θ = {t}"))
            },
        ),
    ]
}

fn address(rng: &mut ChaCha8Rng) -> Vec<Property> {
    let ladder: Vec<ExternalAddress> = (0..5).map(|_| random_address(rng)).collect();
    let many: Vec<ExternalAddress> = (0..200).map(|_| random_address(rng)).collect();
    let triples: Vec<[ExternalAddress; 3]> = (0..1000)
        .map(|_| {
            [
                random_address(rng),
                random_address(rng),
                random_address(rng),
            ]
        })
        .collect();
    let worked: ExternalAddress = "0 0 0 -1|0 0 1 0".parse().expect("valid address");
    let closed_form: Vec<u32> = (5..=20).collect();
    vec![
        property("address", "θ_{d+1} = Z_j(θ_d) ladder", &ladder, |s| {
            let plan = address_plan(s).ok()?;
            (plan.min_degree..plan.min_degree + 6).find_map(|d| {
                let next = theta_at(&plan, d + 1).ok();
                let lifted = theta_at(&plan, d)
                    .and_then(|t| lift_angle(d, plan.j, &t))
                    .ok();
                (next != lifted).then(|| format!("s = {s}, d = {d}"))
            })
        }),
        property("address", "deg q ≤ ℓ + k − 2", &many, |s| {
            let plan = address_plan(s).ok()?;
            plan.q
                .degree()
                .is_some_and(|deg| deg + 2 > plan.ell + plan.k)
                .then(|| format!("s = {s}, q = {}", plan.q))
        }),
        property(
            "address",
            "cylinder order is transitive",
            &triples,
            |[a, b, c]| {
                let chain = cmp_cyl(a, b) == Ordering::Less && cmp_cyl(b, c) == Ordering::Less;
                (chain && cmp_cyl(a, c) != Ordering::Less).then(|| format!("{a} < {b} < {c}"))
            },
        ),
        property(
            "address",
            "closed form for 0 0 0 -1|0 0 1 0",
            &closed_form,
            |&d| {
                let plan = address_plan(&worked).ok()?;
                let x = BigInt::from(d);
                let p = |e: usize| num_traits::pow(x.clone(), e);
                let want = Angle::from_ratio(num_rational::BigRational::new(
                    p(5) - p(4) + 1,
                    p(4) * (p(4) - 1),
                ));
                (theta_at(&plan, d).ok() != Some(want)).then(|| format!("d = {d}"))
            },
        ),
    ]
}

fn combinatorics(rng: &mut ChaCha8Rng) -> Vec<Property> {
    let periodic: Vec<(u32, Angle)> = (0..100)
        .map(|_| {
            let d = rng.random_range(2..=3);
            let k = rng.random_range(1..=if d == 2 { 7 } else { 4 });
            (d, angle_from_digits(d, &[], &random_digits(rng, d, k)))
        })
        .collect();
    let preperiodic: Vec<(u32, u32, Angle)> = (0..30)
        .map(|_| {
            let d = rng.random_range(2..=3);
            let j = rng.random_range(0..d);
            let pre_len = rng.random_range(1..=2);
            let pre = random_digits(rng, d, pre_len);
            let rep_len = rng.random_range(1..=2);
            let rep = random_digits(rng, d, rep_len);
            (d, j, angle_from_digits(d, &pre, &rep))
        })
        .collect();
    vec![
        property(
            "combinatorics",
            "companion by branches matches the exhaustive scan",
            &periodic,
            |(d, t)| {
                let (fast, slow) = (companion_pair(*d, t), companion_pair_exhaustive(*d, t));
                (fast != slow).then(|| format!("d = {d}, θ = {t}: {fast:?} vs {slow:?}"))
            },
        ),
        property(
            "combinatorics",
            "companion pair generates a valid portrait",
            &periodic,
            |(d, t)| {
                let other = companion_pair(*d, t)?;
                let p = match orbit_portrait_from_pair(*d, t, &other) {
                    Ok(p) => p,
                    Err(e) => return Some(format!("d = {d}, θ = {t}: {e}")),
                };
                let pair = if *t < other {
                    (t.clone(), other)
                } else {
                    (other, t.clone())
                };
                (p.characteristic_pair != pair).then(|| format!("d = {d}, θ = {t}"))
            },
        ),
        property(
            "combinatorics",
            "companion pairs survive the lift",
            &periodic,
            |(d, t)| {
                let other = companion_pair(*d, t)?;
                (0..*d).find_map(|j| {
                    let (zt, zo) = (lift_angle(*d, j, t).ok()?, lift_angle(*d, j, &other).ok()?);
                    (companion_pair(d + 1, &zt) != Some(zo))
                        .then(|| format!("d = {d}, j = {j}, θ = {t}"))
                })
            },
        ),
        property(
            "combinatorics",
            "angular classes are transported by the lift",
            &preperiodic,
            |(d, j, t)| {
                if orbit(*d, t).is_periodic() {
                    return None;
                }
                let class = angular_class(*d, t).ok()?;
                let mut lifted: Vec<Angle> = class
                    .iter()
                    .filter_map(|x| lift_angle(*d, *j, x).ok())
                    .collect();
                lifted.sort();
                let target = angular_class(d + 1, &lift_angle(*d, *j, t).ok()?).ok();
                (target != Some(lifted)).then(|| format!("d = {d}, j = {j}, θ = {t}"))
            },
        ),
    ]
}

fn close(z: Complex64, w: Complex64, tol: f64) -> bool {
    (z.re - w.re).abs() <= tol && (z.im - w.im).abs() <= tol
}

fn dynamics(rng: &mut ChaCha8Rng) -> Vec<Property> {
    let ladder = [
        (10u32, Complex64::new(1.1176, 0.86608)),
        (50, Complex64::new(1.1545, 0.74281)),
        (100, Complex64::new(1.1575, 0.72671)),
        (200, Complex64::new(1.15891, 0.71869)),
    ];
    let family: Vec<(i64, u32)> = [1i64, -1, 2, -2, 3]
        .into_iter()
        .map(|r| {
            (
                r,
                2 * r.unsigned_abs() as u32 + 3 + rng.random_range(0..=10),
            )
        })
        .collect();
    let rabbit = [
        (2u32, "1/7", Complex64::new(-0.122561, 0.744862)),
        (3, "163/6480", Complex64::new(0.62745, 0.29882)),
    ];
    vec![
        property(
            "dynamics",
            "degree ladder golden table for 0 0 0 -1|0 0 1 0",
            &[()],
            |_| {
                let s: ExternalAddress = "0 0 0 -1|0 0 1 0".parse().ok()?;
                let degrees: Vec<u32> = ladder.iter().map(|(d, _)| *d).collect();
                let approx = match approximate(&s, &degrees, TOL, DEFAULT_MAX_ITER) {
                    Ok(a) => a,
                    Err(e) => return Some(e.to_string()),
                };
                let limit = match &approx.exponential {
                    Ok(r) => r.lambda,
                    Err(e) => return Some(e.to_string()),
                };
                let mut dists = Vec::new();
                for ((d, row), (_, want)) in approx.rows.iter().zip(ladder) {
                    let lambda = match row {
                        Ok(row) => row.report.lambda,
                        Err(e) => return Some(format!("d = {d}: {e}")),
                    };
                    if !close(lambda, want, 1e-3) {
                        return Some(format!("λ_{d} = {lambda}, expected {want}"));
                    }
                    dists.push((lambda - limit).norm());
                }
                (!dists.windows(2).all(|w| w[1] < w[0]))
                    .then(|| format!("|λ_d − λ| not decreasing: {dists:?}"))
            },
        ),
        property(
            "dynamics",
            "closed form λ_d = d(e^{2πir/d} − 1) for 0|r",
            &family,
            |&(r, d)| {
                let s = ExternalAddress::new(vec![0], vec![r]).ok()?;
                let approx = approximate(&s, &[d], TOL, DEFAULT_MAX_ITER).ok()?;
                let lambda = approx.rows[0].1.as_ref().ok()?.report.lambda;
                let turn = Complex64::new(0.0, std::f64::consts::TAU * r as f64);
                let want = ((turn / d as f64).exp() - 1.0) * d as f64;
                (!close(lambda, want, 1e-9))
                    .then(|| format!("r = {r}, d = {d}: λ_d = {lambda}, expected {want}"))
            },
        ),
        property(
            "dynamics",
            "polynomial golden parameters",
            &rabbit,
            |(d, t, want)| {
                let r = poly_spider_solve(*d, &t.parse().ok()?, TOL, DEFAULT_MAX_ITER).ok()?;
                let c = r.c_selected?;
                (!close(c, *want, 2e-4)).then(|| format!("d = {d}, θ = {t}: c = {c}"))
            },
        ),
        property(
            "dynamics",
            "preimage chain holds at convergence",
            &rabbit,
            |(d, t, _)| {
                let r = poly_spider_solve(*d, &t.parse().ok()?, TOL, DEFAULT_MAX_ITER).ok()?;
                let residual = chain_residual(&r);
                (residual > 10.0 * TOL)
                    .then(|| format!("d = {d}, θ = {t}: residual {}", float(residual)))
            },
        ),
    ]
}

type SuiteFn = fn(&mut ChaCha8Rng) -> Vec<Property>;

pub fn run(suite: Suite, seed: u64) -> Report {
    let suites: [(Suite, SuiteFn); 5] = [
        (Suite::Angles, angles),
        (Suite::Lift, lift),
        (Suite::Address, address),
        (Suite::Combinatorics, combinatorics),
        (Suite::Dynamics, dynamics),
    ];
    let mut properties = Vec::new();
    for (i, (name, build)) in suites.into_iter().enumerate() {
        if suite == name || suite == Suite::All {
            // Each suite draws from its own stream so `all` matches the single runs.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            properties.extend(build(&mut rng));
        }
    }
    Report { seed, properties }
}
