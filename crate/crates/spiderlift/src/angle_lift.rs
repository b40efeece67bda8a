//! The degree-raising maps `Z_j : ℚ/ℤ → ℚ/ℤ` from degree `d` to `d + 1`,
//! their inverses on the image, and the induced kneading transform.
//!
//! `Z_j(θ)` is the angle whose base-`(d+1)` digits are `u_{j,θ}(μ_d^{n-1} θ)`,
//! where the symbol shift `u_{j,θ}` opens a gap at the cut point `(θ+j)/d`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::angles::{angle_from_digits, orbit, scaled_orbit, scaled_sector, Angle, Itinerary};
use crate::error::{Error, Result};
use crate::spider_combinatorics::companion_pair;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftContext {
    pub d: u32,
    pub j: u32,
    pub theta: Angle,
    /// Whether `θ` is the smaller angle of a companion pair. Only consulted
    /// when the orbit of `θ` hits the cut point; `None` means detect it.
    pub smaller_companion: Option<bool>,
}

impl LiftContext {
    pub fn new(d: u32, j: u32, theta: Angle) -> Result<LiftContext> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!(
                "degree {d} must be at least 2"
            )));
        }
        if j >= d {
            return Err(Error::InvalidArgument(format!(
                "branch j = {j} must be below d = {d}"
            )));
        }
        Ok(LiftContext {
            d,
            j,
            theta,
            smaller_companion: None,
        })
    }

    pub fn with_smaller_companion(mut self, flag: bool) -> LiftContext {
        self.smaller_companion = Some(flag);
        self
    }

    fn cut_point(&self) -> BigRational {
        (self.theta.ratio() + BigInt::from(self.j)) / BigInt::from(self.d)
    }

    fn resolve_smaller_companion(&self) -> bool {
        self.smaller_companion.unwrap_or_else(|| {
            companion_pair(self.d, &self.theta).is_some_and(|other| self.theta < other)
        })
    }

    fn shift_with(&self, t: &Angle, at_cut: impl FnOnce() -> Result<u32>) -> Result<u32> {
        let (d, j) = (self.d, self.j);
        let m = (t.ratio() * BigInt::from(d))
            .floor()
            .to_integer()
            .to_u32()
            .expect("digit fits");
        if m < j {
            return Ok(m);
        }
        if m > j {
            return Ok(m + 1);
        }
        match t.ratio().cmp(&self.cut_point()) {
            Ordering::Less => Ok(j),
            Ordering::Greater => Ok(j + 1),
            Ordering::Equal => at_cut(),
        }
    }

    fn boundary_symbol(&self) -> u32 {
        if self.resolve_smaller_companion() {
            self.j
        } else {
            self.j + 1
        }
    }
}

/// The symbol shift `u_{j,θ}(t) ∈ {0, …, d}`.
pub fn symbol_shift(ctx: &LiftContext, t: &Angle) -> Result<u32> {
    ctx.shift_with(t, || {
        if orbit(ctx.d, &ctx.theta).points.contains(t) {
            Ok(ctx.boundary_symbol())
        } else {
            Err(Error::UndefinedAtCut(t.to_string()))
        }
    })
}

/// `Z_j(θ)`, computed exactly over one preperiod plus one period.
pub fn lift(ctx: &LiftContext) -> Angle {
    let (d, j) = (ctx.d, ctx.j);
    let o = scaled_orbit(d, &ctx.theta, ctx.theta.denom());
    // `t < (θ + j)/d` reads `d·x < a + j·den` on numerators.
    let cut = ctx.theta.numer() + BigInt::from(j) * &o.den;
    let mut boundary = None;
    let mut digits: Vec<u32> = o
        .nums
        .iter()
        .zip(o.digits(d))
        .map(|(x, m)| match m.cmp(&j) {
            Ordering::Less => m,
            Ordering::Greater => m + 1,
            Ordering::Equal => match (x * d).cmp(&cut) {
                Ordering::Less => j,
                Ordering::Greater => j + 1,
                Ordering::Equal => *boundary.get_or_insert_with(|| ctx.boundary_symbol()),
            },
        })
        .collect();
    let rep = digits.split_off(o.preperiod);
    angle_from_digits(d + 1, &digits, &rep)
}

/// Shorthand for `lift(LiftContext::new(d, j, θ))`.
pub fn lift_angle(d: u32, j: u32, theta: &Angle) -> Result<Angle> {
    Ok(lift(&LiftContext::new(d, j, theta.clone())?))
}

/// Whether the `μ_{d+1}`-orbit of `φ` avoids the open static sector `j` of `φ`.
pub fn orbit_avoids_sector(d_plus_1: u32, j: u32, phi: &Angle) -> bool {
    let o = scaled_orbit(d_plus_1, phi, phi.denom());
    o.nums
        .iter()
        .all(|x| scaled_sector(d_plus_1, phi.numer(), &o.den, x) != Some(j))
}

/// The unique `θ` with `Z_j(θ) = φ`, or `NotInImage`.
pub fn lift_inverse(d_plus_1: u32, j: u32, phi: &Angle) -> Result<Angle> {
    if d_plus_1 < 3 {
        return Err(Error::InvalidArgument(format!(
            "target degree {d_plus_1} must be at least 3"
        )));
    }
    let d = d_plus_1 - 1;
    if j >= d {
        return Err(Error::InvalidArgument(format!(
            "branch j = {j} must be below d = {d}"
        )));
    }
    let not_in_image = || Error::NotInImage(phi.to_string());
    let o = scaled_orbit(d_plus_1, phi, phi.denom());
    // Cuts `(φ + j)/(d+1)` and `(φ + j + 1)/(d+1)` on the scale `(d+1)·x`.
    let lower_cut = phi.numer() + BigInt::from(j) * &o.den;
    let upper_cut = &lower_cut + &o.den;
    let mut digits = Vec::with_capacity(o.nums.len());
    for (x, m) in o.nums.iter().zip(o.digits(d_plus_1)) {
        let w = if m < j {
            m
        } else if (m == j && x * d_plus_1 <= lower_cut) || (m == j + 1 && x * d_plus_1 >= upper_cut)
        {
            j
        } else if m >= j + 2 {
            m - 1
        } else {
            return Err(not_in_image());
        };
        digits.push(w);
    }
    let rep = digits.split_off(o.preperiod);
    let theta = angle_from_digits(d, &digits, &rep);
    if lift_angle(d, j, &theta)? == *phi {
        Ok(theta)
    } else {
        Err(not_in_image())
    }
}

/// Kneading sequence of `Z_j(θ)` from the kneading sequence `ν` of `θ`,
/// where `m` is the static sector containing `θ`.
///
/// Dynamic labels `≥ (j − m) mod d` move up by one; the others and `*` stay.
/// When `m = j` nothing moves.
pub fn kneading_transform(d: u32, j: u32, nu: &Itinerary, m: u32) -> Itinerary {
    if m == j {
        return nu.clone();
    }
    let c = (j as i64 - m as i64).rem_euclid(d as i64);
    nu.map_labels(|x| if x >= c { x + 1 } else { x })
}

/// `(ψ, ψ′)` with `ψ = Z_j(θ)` and `ψ′ = ψ − 1/((d+1)^k − 1)` for periodic `θ`.
pub fn coroot_gap(d: u32, j: u32, theta: &Angle) -> Result<(Angle, Angle)> {
    let o = orbit(d, theta);
    if !o.is_periodic() {
        return Err(Error::InvalidArgument(format!(
            "{theta} is not periodic under μ_{d}"
        )));
    }
    let psi = lift_angle(d, j, theta)?;
    let gap = BigRational::new(1.into(), num_traits::pow(BigInt::from(d + 1), o.period) - 1);
    let psi_prime = psi.add_ratio(&-gap);
    Ok((psi, psi_prime))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::{kneading, static_sector, to_digits};

    fn a(s: &str) -> Angle {
        s.parse().unwrap()
    }

    #[test]
    fn symbol_shift_examples() {
        let ctx = LiftContext::new(2, 1, a("17/240")).unwrap();
        assert_eq!(symbol_shift(&ctx, &a("17/240")).unwrap(), 0);
        assert_eq!(symbol_shift(&ctx, &a("17/30")).unwrap(), 2);
        let ctx = LiftContext::new(2, 0, a("1/7")).unwrap();
        assert_eq!(symbol_shift(&ctx, &a("1/7")).unwrap(), 1);
    }

    #[test]
    fn symbol_shift_cut_outside_orbit_is_undefined() {
        // (θ + 0)/2 = 17/480 is not on the orbit of 17/240.
        let ctx = LiftContext::new(2, 0, a("17/240")).unwrap();
        assert!(matches!(
            symbol_shift(&ctx, &a("17/480")),
            Err(Error::UndefinedAtCut(_))
        ));
    }

    #[test]
    fn boundary_rule_follows_companion_flag() {
        // 4/7 = (1/7 + 1)/2 lies on the orbit of 1/7, whose companion is 2/7.
        let ctx = LiftContext::new(2, 1, a("1/7")).unwrap();
        assert_eq!(symbol_shift(&ctx, &a("4/7")).unwrap(), 1);
        let forced = ctx.clone().with_smaller_companion(false);
        assert_eq!(symbol_shift(&forced, &a("4/7")).unwrap(), 2);
    }

    #[test]
    fn lifted_expansions() {
        let z0 = lift_angle(2, 0, &a("17/240")).unwrap();
        assert_eq!(to_digits(3, &z0).to_string(), "1 1 1 2|1 1 2 1");
        let z1 = lift_angle(2, 1, &a("1/7")).unwrap();
        assert_eq!(to_digits(3, &z1).to_string(), "|0 0 1");
    }

    #[test]
    fn inverse_rejects_orbit_through_forbidden_sector() {
        // 1/3 under μ_3 is fixed at 0 after one step; 1/3 itself sits in sector 0 of 1/3.
        assert!(!orbit_avoids_sector(3, 0, &a("1/3")));
        assert!(matches!(
            lift_inverse(3, 0, &a("1/3")),
            Err(Error::NotInImage(_))
        ));
    }

    #[test]
    fn kneading_transform_matches_direct_computation() {
        let th = a("17/240");
        let m = static_sector(2, &th, &th).unwrap();
        let nu = kneading(2, &th).unwrap();
        let lifted = kneading(3, &a("163/6480")).unwrap();
        assert_eq!(kneading_transform(2, 1, &nu, m), lifted);
    }

    #[test]
    fn coroot_gap_width() {
        let (psi, psi_prime) = coroot_gap(2, 1, &a("1/7")).unwrap();
        assert_eq!(psi, a("1/26"));
        assert_eq!(psi_prime, Angle::zero());
        assert!(coroot_gap(2, 1, &a("17/240")).is_err());
    }
}
