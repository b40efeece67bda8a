//! Exact rational angles in `ℝ/ℤ` and the combinatorics of `μ_d(t) = d·t mod 1`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::seq;

/// A rational angle `num/den` in `[0, 1)`, always in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Angle(BigRational);

impl Angle {
    /// Builds `num/den`, rejecting values outside `[0, 1)`.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Angle> {
        let (num, den) = (num.into(), den.into());
        if !den.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "denominator {den} must be positive"
            )));
        }
        if num.is_negative() || num >= den {
            return Err(Error::InvalidArgument(format!(
                "{num}/{den} is not in [0, 1)"
            )));
        }
        Ok(Angle(BigRational::new(num, den)))
    }

    /// Reduces an arbitrary rational modulo 1.
    pub fn from_ratio(r: BigRational) -> Angle {
        let frac = &r - r.floor();
        Angle(frac)
    }

    pub fn zero() -> Angle {
        Angle(BigRational::zero())
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Nearest double; exact angles stay the source of truth.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Ratios of huge integers: scale down before dividing.
            let shift = self.denom().bits().saturating_sub(60);
            let n = (self.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (self.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        })
    }

    /// `self + r` reduced modulo 1.
    pub fn add_ratio(&self, r: &BigRational) -> Angle {
        Angle::from_ratio(&self.0 + r)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Angle> {
        let s = s.trim();
        let parse = |x: &str| {
            x.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("bad angle {s:?}; expected num/den")))
        };
        match s.split_once('/') {
            Some((n, d)) => Angle::new(parse(n)?, parse(d)?),
            None => Angle::new(parse(s)?, 1),
        }
    }
}

fn check_degree(d: u32) {
    assert!(d >= 2, "degree must be at least 2, got {d}");
}

/// `μ_d(t) = d·t mod 1`.
pub fn mu(d: u32, t: &Angle) -> Angle {
    check_degree(d);
    Angle::from_ratio(t.ratio() * BigInt::from(d))
}

/// Forward orbit of an angle up to its first repetition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub preperiod: usize,
    pub period: usize,
    /// `t, μ_d t, …`, exactly `preperiod + period` distinct angles.
    pub points: Vec<Angle>,
}

impl Orbit {
    /// Orbit point `n` with 0-based indexing that wraps around the cycle.
    pub fn point(&self, n: usize) -> &Angle {
        seq::at(
            &self.points[..self.preperiod],
            &self.points[self.preperiod..],
            n,
        )
    }

    pub fn is_periodic(&self) -> bool {
        self.preperiod == 0
    }
}

pub fn orbit(d: u32, t: &Angle) -> Orbit {
    let o = scaled_orbit(d, t, t.denom());
    let points = o
        .nums
        .into_iter()
        .map(|n| Angle(BigRational::new(n, o.den.clone())))
        .collect();
    Orbit {
        preperiod: o.preperiod,
        period: o.period,
        points,
    }
}

/// Orbit numerators over one fixed denominator. Every orbit point shares the
/// denominator of the starting angle, so no reduction is needed along the way.
#[derive(Clone, Debug)]
pub(crate) struct ScaledOrbit {
    pub den: BigInt,
    pub nums: Vec<BigInt>,
    pub preperiod: usize,
    pub period: usize,
}

impl ScaledOrbit {
    /// Base-`d` digit `⌊d·x/den⌋` of each point.
    pub fn digits(&self, d: u32) -> Vec<u32> {
        self.nums
            .iter()
            .map(|x| {
                div_small(&(x * d), &self.den)
                    .0
                    .to_u32()
                    .expect("digit fits")
            })
            .collect()
    }
}

/// Floor division `(q, r)` of `y` by a positive `den` when the quotient is a
/// machine-size integer. The quotient is estimated from the leading bits and
/// corrected, which is much cheaper than a general long division.
pub(crate) fn div_small(y: &BigInt, den: &BigInt) -> (i64, BigInt) {
    let ds: Vec<u64> = den.iter_u64_digits().collect();
    let n = ds.len();
    if n <= 1 {
        let (q, r) = y.div_mod_floor(den);
        return (q.to_i64().expect("quotient fits"), r);
    }
    // Leading words of both operands, in units of 2^(64(n−1)).
    let ys: Vec<u64> = y.iter_u64_digits().skip(n - 2).collect();
    let word = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let top = 2f64.powi(64);
    let yv = ys
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &w)| w as f64 * top.powi(i as i32 - 1))
        .sum::<f64>()
        + word(&ys, 0) / top;
    let dv = ds[n - 1] as f64 + ds[n - 2] as f64 / top;
    let magnitude = yv / dv;
    let estimate = if y.is_negative() {
        -magnitude.ceil()
    } else {
        magnitude.floor()
    } as i64;
    let mut q = estimate;
    let mut r = y - den * q;
    while r.is_negative() {
        r += den;
        q -= 1;
    }
    while r >= *den {
        r -= den;
        q += 1;
    }
    (q, r)
}

/// Numerator of `t` over `den`, which must be a multiple of its denominator.
pub(crate) fn scaled(t: &Angle, den: &BigInt) -> BigInt {
    t.numer() * (den / t.denom())
}

pub(crate) fn scaled_orbit(d: u32, t: &Angle, den: &BigInt) -> ScaledOrbit {
    scaled_orbit_from(d, scaled(t, den), den)
}

/// Orbit of the numerator `x` over `den`, which need not be reduced.
pub(crate) fn scaled_orbit_from(d: u32, x: BigInt, den: &BigInt) -> ScaledOrbit {
    check_degree(d);
    // Each step divides the reduced denominator by its gcd with `d`; once
    // they are coprime the orbit is periodic and returns to its start.
    let mut reduced = den / x.gcd(den);
    let base = BigInt::from(d);
    let mut preperiod = 0;
    loop {
        let g = reduced.gcd(&base);
        if g.is_one() {
            break;
        }
        reduced /= &g;
        preperiod += 1;
    }
    let mut nums = Vec::new();
    let mut cur = x;
    for _ in 0..preperiod {
        let next = div_small(&(&cur * d), den).1;
        nums.push(cur);
        cur = next;
    }
    let start = cur.clone();
    loop {
        let next = div_small(&(&cur * d), den).1;
        nums.push(cur);
        if next == start {
            break;
        }
        cur = next;
    }
    ScaledOrbit {
        den: den.clone(),
        preperiod,
        period: nums.len() - preperiod,
        nums,
    }
}

/// [`static_sector`] for numerators over a common denominator.
pub(crate) fn scaled_sector(d: u32, theta: &BigInt, den: &BigInt, x: &BigInt) -> Option<u32> {
    let (q, r) = div_small(&(x * d - theta), den);
    if r.is_zero() {
        return None;
    }
    Some(q.rem_euclid(d as i64) as u32)
}

/// A base-`d` expansion `.pre rep rep …` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitExpansion {
    pub base: u32,
    pub pre: Vec<u32>,
    pub rep: Vec<u32>,
}

impl DigitExpansion {
    /// Validates digits and normalizes to the canonical expansion of the
    /// same angle (carrying away repeating blocks of `base − 1`).
    pub fn new(base: u32, pre: Vec<u32>, rep: Vec<u32>) -> Result<DigitExpansion> {
        if base < 2 {
            return Err(Error::InvalidArgument(format!(
                "base {base} must be at least 2"
            )));
        }
        if rep.is_empty() {
            return Err(Error::InvalidArgument(
                "repeating block must be nonempty".into(),
            ));
        }
        if let Some(bad) = pre.iter().chain(&rep).find(|&&x| x >= base) {
            return Err(Error::InvalidArgument(format!(
                "digit {bad} out of range for base {base}"
            )));
        }
        Ok(to_digits(base, &angle_from_digits(base, &pre, &rep)))
    }

    /// Parses `"0 0 0 1|0 0 1 0"`.
    pub fn parse(base: u32, s: &str) -> Result<DigitExpansion> {
        let (pre, rep) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("expected pre|rep, got {s:?}")))?;
        let digits = |part: &str| -> Result<Vec<u32>> {
            part.split_whitespace()
                .map(|x| {
                    x.parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad digit {x:?}")))
                })
                .collect()
        };
        DigitExpansion::new(base, digits(pre)?, digits(rep)?)
    }

    pub fn value(&self) -> Angle {
        angle_from_digits(self.base, &self.pre, &self.rep)
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for DigitExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", join(&self.pre), join(&self.rep))
    }
}

/// Value of `.pre rep rep …` in base `base`, reduced modulo 1.
pub fn angle_from_digits(base: u32, pre: &[u32], rep: &[u32]) -> Angle {
    let b = BigInt::from(base);
    let value = |ds: &[u32]| -> BigInt {
        if ds.is_empty() {
            return BigInt::zero();
        }
        match u8::try_from(base) {
            Ok(radix) if base >= 2 => {
                let bytes: Vec<u8> = ds.iter().map(|&x| x as u8).collect();
                BigInt::from_radix_be(Sign::Plus, &bytes, radix.into())
                    .expect("digits below the base")
            }
            _ => ds.iter().fold(BigInt::zero(), |acc, &x| acc * &b + x),
        }
    };
    let bl = num_traits::pow(b.clone(), pre.len());
    let bk1 = num_traits::pow(b.clone(), rep.len()) - 1;
    let num = value(pre) * &bk1 + value(rep);
    Angle::from_ratio(BigRational::new(num, bl * bk1))
}

/// Canonical base-`d` expansion; lengths of `pre`/`rep` equal the orbit's
/// preperiod and period.
pub fn to_digits(d: u32, t: &Angle) -> DigitExpansion {
    let o = scaled_orbit(d, t, t.denom());
    let mut pre = o.digits(d);
    let rep = pre.split_off(o.preperiod);
    DigitExpansion { base: d, pre, rep }
}

pub fn from_digits(e: &DigitExpansion) -> Angle {
    e.value()
}

/// Whether `t ∈ μ_d⁻¹(θ)`.
pub fn is_preimage_of(d: u32, theta: &Angle, t: &Angle) -> bool {
    mu(d, t) == *theta
}

/// Index `j` with `t ∈ ((θ+j)/d, (θ+j+1)/d)`, or `None` when `t` is one of
/// the boundary points `μ_d⁻¹(θ)`.
pub fn static_sector(d: u32, theta: &Angle, t: &Angle) -> Option<u32> {
    check_degree(d);
    let x = t.ratio() * BigInt::from(d) - theta.ratio();
    if x.is_integer() {
        return None;
    }
    let j = x.floor().to_integer().mod_floor(&BigInt::from(d));
    Some(j.to_u32().expect("sector index fits"))
}

/// An itinerary symbol: a sector label or the boundary marker `*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Label(i64),
    Star,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Label(x) => write!(f, "{x}"),
            Symbol::Star => f.write_str("*"),
        }
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Symbol> {
        match s {
            "*" => Ok(Symbol::Star),
            _ => s
                .parse::<i64>()
                .map(Symbol::Label)
                .map_err(|_| Error::Parse(format!("bad symbol {s:?}"))),
        }
    }
}

/// An eventually periodic symbol sequence in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Itinerary {
    pub pre: Vec<Symbol>,
    pub rep: Vec<Symbol>,
}

impl Itinerary {
    pub fn new(pre: Vec<Symbol>, rep: Vec<Symbol>) -> Itinerary {
        let (pre, rep) = seq::canonicalize(pre, rep);
        Itinerary { pre, rep }
    }

    pub fn parse(s: &str) -> Result<Itinerary> {
        let (pre, rep) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("expected pre|rep, got {s:?}")))?;
        let syms = |part: &str| {
            part.split_whitespace()
                .map(str::parse)
                .collect::<Result<Vec<Symbol>>>()
        };
        let rep = syms(rep)?;
        if rep.is_empty() {
            return Err(Error::Parse("repeating block must be nonempty".into()));
        }
        Ok(Itinerary::new(syms(pre)?, rep))
    }

    /// Symbol `ν_n` with the 1-based indexing used throughout.
    pub fn symbol(&self, n: usize) -> Symbol {
        assert!(n >= 1, "itinerary indices start at 1");
        *seq::at(&self.pre, &self.rep, n - 1)
    }

    pub fn preperiod(&self) -> usize {
        self.pre.len()
    }

    pub fn eventual_period(&self) -> usize {
        self.rep.len()
    }

    pub fn map_labels(&self, f: impl Fn(i64) -> i64) -> Itinerary {
        let g = |s: &Symbol| match *s {
            Symbol::Label(x) => Symbol::Label(f(x)),
            Symbol::Star => Symbol::Star,
        };
        Itinerary::new(
            self.pre.iter().map(g).collect(),
            self.rep.iter().map(g).collect(),
        )
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", join(&self.pre), join(&self.rep))
    }
}

pub fn itinerary_eventual_period(i: &Itinerary) -> usize {
    i.eventual_period()
}

/// Itinerary `Σ_{d,θ}(t)` with dynamic labels: sector 0 is the one containing `θ`.
pub fn itinerary(d: u32, theta: &Angle, t: &Angle) -> Result<Itinerary> {
    let m = static_sector(d, theta, theta)
        .ok_or_else(|| Error::UndefinedDynamicSectors(theta.to_string()))?;
    let den = theta.denom().lcm(t.denom());
    let a = scaled(theta, &den);
    let o = scaled_orbit(d, t, &den);
    let mut pre: Vec<Symbol> = o
        .nums
        .iter()
        .map(|x| match scaled_sector(d, &a, &den, x) {
            Some(s) => Symbol::Label((s as i64 - m as i64).rem_euclid(d as i64)),
            None => Symbol::Star,
        })
        .collect();
    let rep = pre.split_off(o.preperiod);
    Ok(Itinerary::new(pre, rep))
}

/// Kneading sequence `Σ_{d,θ}(θ)`.
pub fn kneading(d: u32, theta: &Angle) -> Result<Itinerary> {
    itinerary(d, theta, theta)
}
