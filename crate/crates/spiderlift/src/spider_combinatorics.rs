//! Combinatorial spiders, orbit portraits, companion pairs, internal
//! addresses and angular classes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::angles::{
    angle_from_digits, div_small, kneading, orbit, scaled, scaled_orbit, scaled_orbit_from,
    scaled_sector, to_digits, Angle, Itinerary, Symbol,
};
use crate::cyclic::{Rot, Rotations};
use crate::error::{Error, Result};
use crate::external_address::{cmp_cyl, exp_itinerary, ExternalAddress};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpiderKind {
    Polynomial { d: u32, theta: Angle },
    Exponential { address: ExternalAddress },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LegKey {
    Angle(Angle),
    Address(ExternalAddress),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leg {
    /// 1-based orbit index.
    pub index: usize,
    pub key: LegKey,
}

/// A spider as a combinatorial record: legs, their circular order at
/// infinity, and the endpoint identifications of the quotient spider.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpiderGraph {
    pub kind: SpiderKind,
    pub legs: Vec<Leg>,
    /// Orbit indices in counterclockwise order, starting after the cut
    /// (angle 0, or the `β` edge for exponential spiders).
    pub cyclic_order: Vec<usize>,
    /// Partition of orbit indices; identified endpoints share a class.
    pub endpoint_classes: Vec<Vec<usize>>,
    pub preperiod: usize,
    pub period: usize,
}

impl SpiderGraph {
    /// Periodic spiders carry the extra segment from the last endpoint to the
    /// critical point.
    pub fn has_internal_segment(&self) -> bool {
        self.preperiod == 0
    }
}

fn quotient_classes(preperiod: usize, period: usize, eventual_period: usize) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = (1..=preperiod).map(|n| vec![n]).collect();
    for r in 0..eventual_period {
        classes.push(
            (preperiod + 1 + r..=preperiod + period)
                .step_by(eventual_period)
                .collect(),
        );
    }
    classes
}

pub fn build_spider(d: u32, theta: &Angle) -> SpiderGraph {
    let o = orbit(d, theta);
    let legs: Vec<Leg> = o
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| Leg {
            index: i + 1,
            key: LegKey::Angle(p.clone()),
        })
        .collect();
    let mut cyclic_order: Vec<usize> = (1..=legs.len()).collect();
    cyclic_order.sort_by(|&a, &b| o.points[a - 1].cmp(&o.points[b - 1]));
    let k_prime = kneading(d, theta)
        .map(|nu| nu.eventual_period())
        .unwrap_or(o.period);
    SpiderGraph {
        kind: SpiderKind::Polynomial {
            d,
            theta: theta.clone(),
        },
        legs,
        cyclic_order,
        endpoint_classes: quotient_classes(o.preperiod, o.period, k_prime),
        preperiod: o.preperiod,
        period: o.period,
    }
}

pub fn build_exp_spider(s: &ExternalAddress) -> SpiderGraph {
    let shifts: Vec<ExternalAddress> = (0..s.orbit_len()).map(|n| s.shift_n(n)).collect();
    let legs: Vec<Leg> = shifts
        .iter()
        .enumerate()
        .map(|(i, a)| Leg {
            index: i + 1,
            key: LegKey::Address(a.clone()),
        })
        .collect();
    let mut cyclic_order: Vec<usize> = (1..=legs.len()).collect();
    cyclic_order.sort_by(|&a, &b| cmp_cyl(&shifts[a - 1], &shifts[b - 1]));
    let k_prime = exp_itinerary(s, s).eventual_period();
    SpiderGraph {
        kind: SpiderKind::Exponential { address: s.clone() },
        legs,
        cyclic_order,
        endpoint_classes: quotient_classes(s.preperiod(), s.period(), k_prime),
        preperiod: s.preperiod(),
        period: s.period(),
    }
}

/// Same number of legs and the same circular order of orbit indices.
pub fn spiders_isomorphic(a: &SpiderGraph, b: &SpiderGraph) -> bool {
    let n = a.cyclic_order.len();
    if n != b.cyclic_order.len() {
        return false;
    }
    n == 0 || (0..n).any(|r| (0..n).all(|i| a.cyclic_order[(i + r) % n] == b.cyclic_order[i]))
}

/// A validated formal orbit portrait.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitPortrait {
    pub d: u32,
    /// `A₁, …, A_r` with `μ_d(A_i) = A_{i+1}`; each class sorted ascending.
    pub classes: Vec<Vec<Angle>>,
    /// The unique closest pair, smaller angle first.
    pub characteristic_pair: (Angle, Angle),
}

/// Exact arithmetic on circle points, enough to check the portrait axioms.
trait PointModel {
    type Point: Ord + Clone;
    type Translate: Ord;

    fn degree(&self) -> u32;
    fn image(&self, p: &Self::Point) -> Self::Point;
    /// Exact period, or `None` for strictly preperiodic points.
    fn period(&self, p: &Self::Point) -> Option<usize>;
    /// Sort key of `p + i/d`.
    fn translate(&self, p: &Self::Point, i: u32) -> Self::Translate;
    /// Whether sorted distinct points lie in an open arc of length `< 1/d`.
    fn in_short_arc(&self, sorted: &[Self::Point]) -> bool;
    fn cmp_dist(
        &self,
        a: (&Self::Point, &Self::Point),
        b: (&Self::Point, &Self::Point),
    ) -> Ordering;
}

/// Numerators over a common denominator `den`; `μ_d` is `x ↦ d·x mod den`.
struct Scaled {
    d: u32,
    den: BigInt,
}

impl Scaled {
    fn circ_dist(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let diff = (a - b).abs();
        let other = &self.den - &diff;
        diff.min(other)
    }
}

impl PointModel for Scaled {
    type Point = BigInt;
    type Translate = BigInt;

    fn degree(&self) -> u32 {
        self.d
    }

    fn image(&self, x: &BigInt) -> BigInt {
        (x * self.d) % &self.den
    }

    fn period(&self, x: &BigInt) -> Option<usize> {
        let o = scaled_orbit_from(self.d, x.clone(), &self.den);
        (o.preperiod == 0).then_some(o.period)
    }

    fn translate(&self, x: &BigInt, i: u32) -> BigInt {
        (x * self.d + &self.den * i) % (&self.den * self.d)
    }

    fn in_short_arc(&self, sorted: &[BigInt]) -> bool {
        let n = sorted.len();
        if n < 2 {
            return true;
        }
        let wrap = &self.den - &sorted[n - 1] + &sorted[0];
        let max_gap = sorted
            .windows(2)
            .map(|w| &w[1] - &w[0])
            .fold(wrap, |m, g| m.max(g));
        (&self.den - max_gap) * self.d < self.den
    }

    fn cmp_dist(&self, a: (&BigInt, &BigInt), b: (&BigInt, &BigInt)) -> Ordering {
        self.circ_dist(a.0, a.1).cmp(&self.circ_dist(b.0, b.1))
    }
}

/// Rotations of periodic digit blocks of common exact period, identified by
/// their dense rank.
struct Periodic {
    rot: Rotations,
    /// A rotation carrying each rank.
    reps: Vec<Rot>,
}

impl Periodic {
    fn new(d: u32, blocks: Vec<Vec<u32>>) -> Periodic {
        let rot = Rotations::new(d, blocks);
        let k = rot.k;
        let distinct = (0..rot.count())
            .map(|x| rot.rank((x / k, x % k)) + 1)
            .max()
            .unwrap_or(0);
        let mut reps = vec![(0, 0); distinct as usize];
        for x in 0..rot.count() {
            let p = (x / k, x % k);
            reps[rot.rank(p) as usize] = p;
        }
        Periodic { rot, reps }
    }

    fn rep(&self, r: u32) -> Rot {
        self.reps[r as usize]
    }
}

impl PointModel for Periodic {
    type Point = u32;
    type Translate = (u32, u32);

    fn degree(&self) -> u32 {
        self.rot.d
    }

    fn image(&self, &r: &u32) -> u32 {
        self.rot.rank(self.rot.shift(self.rep(r), 1))
    }

    fn period(&self, _: &u32) -> Option<usize> {
        Some(self.rot.k)
    }

    fn translate(&self, &r: &u32, i: u32) -> (u32, u32) {
        let p = self.rep(r);
        ((self.rot.digit(p, 0) + i) % self.rot.d, self.image(&r))
    }

    fn in_short_arc(&self, sorted: &[u32]) -> bool {
        // Some arc from one point forward round to its predecessor spans the
        // set; it is shorter than 1/d exactly when its leading digit is 0.
        let n = sorted.len();
        n < 2
            || (0..n).any(|t| {
                let (start, end) = (self.rep(sorted[(t + 1) % n]), self.rep(sorted[t]));
                self.rot.diff_digit(end, start, 0) == 0
            })
    }

    fn cmp_dist(&self, a: (&u32, &u32), b: (&u32, &u32)) -> Ordering {
        let da = self.rot.distance(self.rep(*a.0), self.rep(*a.1));
        let db = self.rot.distance(self.rep(*b.0), self.rep(*b.1));
        da.cmp(&db)
    }
}

/// Whether a sequence of distinct points is in counterclockwise order.
fn is_cyclically_sorted<T: Ord>(xs: &[T]) -> bool {
    let n = xs.len();
    (0..n).filter(|&i| xs[i] > xs[(i + 1) % n]).count() <= 1
}

/// Whether the sets are pairwise disjoint with pairwise disjoint convex
/// hulls in the disk: walking once around the circle, the set labels must
/// nest like parentheses.
fn pairwise_unlinked<T: Ord>(sets: &[Vec<T>]) -> bool {
    let mut points: Vec<(&T, usize)> = sets
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |t| (t, i)))
        .collect();
    points.sort();
    if points.windows(2).any(|w| w[0].0 == w[1].0) {
        return false;
    }
    let mut remaining: Vec<usize> = sets.iter().map(Vec::len).collect();
    let mut open: Vec<usize> = Vec::new();
    for (_, i) in points {
        if remaining[i] < sets[i].len() && open.last() != Some(&i) {
            return false;
        }
        if remaining[i] == sets[i].len() {
            open.push(i);
        }
        remaining[i] -= 1;
        if remaining[i] == 0 {
            open.pop();
        }
    }
    true
}

fn validate_in<M: PointModel>(
    model: &M,
    classes: &[Vec<M::Point>],
) -> Result<(M::Point, M::Point)> {
    let bad = |msg: String| Err(Error::InvalidPortrait(msg));
    let d = model.degree();
    let r = classes.len();
    if r == 0 || classes.iter().any(|c| c.is_empty()) {
        return bad("classes must be nonempty".into());
    }
    let sorted: Vec<Vec<M::Point>> = classes
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort();
            c
        })
        .collect();
    for (i, c) in sorted.iter().enumerate() {
        let next = &sorted[(i + 1) % r];
        let images: Vec<M::Point> = c.iter().map(|x| model.image(x)).collect();
        let mut img_sorted = images.clone();
        img_sorted.sort();
        img_sorted.dedup();
        if img_sorted.len() != images.len() || img_sorted != *next {
            return bad(format!(
                "μ_{d} does not map class {} bijectively onto class {}",
                i + 1,
                (i + 1) % r + 1
            ));
        }
        if !is_cyclically_sorted(&images) {
            return bad(format!(
                "μ_{d} does not preserve the cyclic order of class {}",
                i + 1
            ));
        }
        if !model.in_short_arc(c) {
            return bad(format!(
                "class {} is not inside an arc of length < 1/{d}",
                i + 1
            ));
        }
    }
    // Every point is an iterate of a point of the first class, since μ_d maps
    // each class onto the next bijectively.
    let mut period = None;
    for x in &sorted[0] {
        match model.period(x) {
            Some(p) if period.is_none_or(|q| q == p) => period = Some(p),
            _ => return bad("classes break the common-period axiom".into()),
        }
    }
    if period.is_some_and(|p| p % r != 0) {
        return bad("common period is not a multiple of the number of classes".into());
    }
    let translates: Vec<Vec<M::Translate>> = sorted
        .iter()
        .flat_map(|c| {
            (0..d).map(move |i| {
                let mut t: Vec<M::Translate> = c.iter().map(|x| model.translate(x, i)).collect();
                t.sort();
                t
            })
        })
        .collect();
    if !pairwise_unlinked(&translates) {
        return bad("two translated classes are linked".into());
    }
    characteristic_pair(model, &sorted)
}

fn characteristic_pair<M: PointModel>(
    model: &M,
    classes: &[Vec<M::Point>],
) -> Result<(M::Point, M::Point)> {
    let mut best: Option<(&M::Point, &M::Point)> = None;
    let mut unique = false;
    for c in classes {
        for (i, a) in c.iter().enumerate() {
            for b in &c[i + 1..] {
                match best.map(|m| model.cmp_dist((a, b), m)) {
                    None | Some(Ordering::Less) => {
                        best = Some((a, b));
                        unique = true;
                    }
                    Some(Ordering::Equal) => unique = false,
                    Some(Ordering::Greater) => {}
                }
            }
        }
    }
    match best {
        Some((a, b)) if unique => Ok((a.min(b).clone(), a.max(b).clone())),
        Some(_) => Err(Error::InvalidPortrait("no uniquely closest pair".into())),
        None => Err(Error::InvalidPortrait(
            "portrait has no pair of angles".into(),
        )),
    }
}

/// Checks the five axioms of a formal degree-`d` orbit portrait for classes
/// listed in dynamical order, returning the characteristic pair.
pub fn validate_portrait(d: u32, classes: &[Vec<Angle>]) -> Result<(Angle, Angle)> {
    let den = classes
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, t| acc.lcm(t.denom()));
    let model = Scaled { d, den };
    let scaled_classes: Vec<Vec<BigInt>> = classes
        .iter()
        .map(|c| c.iter().map(|t| scaled(t, &model.den)).collect())
        .collect();
    let (a, b) = validate_in(&model, &scaled_classes)?;
    let unscale = |x: BigInt| Angle::from_ratio(BigRational::new(x, model.den.clone()));
    Ok((unscale(a), unscale(b)))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.0[x] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// A validated pair portrait on rotations of the blocks `[α, β]`.
struct PairPortrait {
    model: Periodic,
    classes: Vec<Vec<u32>>,
    pair: (u32, u32),
}

/// Portrait generated by two periodic angles given by their repeating blocks.
fn pair_portrait(d: u32, alpha: &[u32], beta: &[u32]) -> Result<PairPortrait> {
    if alpha.len() != beta.len() {
        return Err(Error::InvalidPortrait(
            "the angles have different exact periods".into(),
        ));
    }
    let model = Periodic::new(d, vec![alpha.to_vec(), beta.to_vec()]);
    let rot = &model.rot;
    if !rot.primitive() {
        return Err(Error::InvalidPortrait(
            "repeating blocks are not primitive".into(),
        ));
    }
    if rot.rank((0, 0)) == rot.rank((1, 0)) {
        return Err(Error::InvalidPortrait("the two angles coincide".into()));
    }
    let n = model.reps.len();
    let mut uf = UnionFind((0..n).collect());
    for i in 0..rot.k {
        uf.union(rot.rank((0, i)) as usize, rot.rank((1, i)) as usize);
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for x in 0..n {
        groups.entry(uf.find(x)).or_default().push(x as u32);
    }
    let mut classes = Vec::new();
    let mut current = groups[&uf.find(rot.rank((0, 0)) as usize)].clone();
    for _ in 0..groups.len() {
        let next_root = uf.find(model.image(&current[0]) as usize);
        classes.push(std::mem::replace(&mut current, groups[&next_root].clone()));
        if current == classes[0] {
            break;
        }
    }
    if classes.len() != groups.len() {
        return Err(Error::InvalidPortrait(
            "classes do not form a single cycle".into(),
        ));
    }
    let pair = validate_in(&model, &classes)?;
    Ok(PairPortrait {
        model,
        classes,
        pair,
    })
}

fn periodic_block(d: u32, t: &Angle) -> Result<Vec<u32>> {
    let e = to_digits(d, t);
    if !e.pre.is_empty() {
        return Err(Error::InvalidPortrait(format!(
            "{t} is not periodic under μ_{d}"
        )));
    }
    Ok(e.rep)
}

/// The portrait generated by identifying `α` with `β` and closing under `μ_d`.
pub fn orbit_portrait_from_pair(d: u32, alpha: &Angle, beta: &Angle) -> Result<OrbitPortrait> {
    let p = pair_portrait(d, &periodic_block(d, alpha)?, &periodic_block(d, beta)?)?;
    let rot = &p.model.rot;
    let angle = |r: u32| {
        let (w, i) = p.model.rep(r);
        let block: Vec<u32> = (0..rot.k).map(|n| rot.digit((w, i), n)).collect();
        angle_from_digits(d, &[], &block)
    };
    Ok(OrbitPortrait {
        d,
        classes: p
            .classes
            .iter()
            .map(|c| c.iter().map(|&r| angle(r)).collect())
            .collect(),
        characteristic_pair: (angle(p.pair.0), angle(p.pair.1)),
    })
}

/// Whether the periodic blocks `a` and `b` form the characteristic pair of
/// the portrait they generate.
fn is_companion_block(d: u32, a: &[u32], b: &[u32]) -> bool {
    pair_portrait(d, a, b).is_ok_and(|p| {
        let (x, y) = (p.model.rot.rank((0, 0)), p.model.rot.rank((1, 0)));
        p.pair == (x.min(y), x.max(y))
    })
}

fn is_companion(d: u32, theta: &Angle, other: &Angle) -> bool {
    match (periodic_block(d, theta), periodic_block(d, other)) {
        (Ok(a), Ok(b)) => is_companion_block(d, &a, &b),
        _ => false,
    }
}

/// Companion of a periodic angle by scanning every angle of the same period.
pub fn companion_pair_exhaustive(d: u32, theta: &Angle) -> Option<Angle> {
    let o = scaled_orbit(d, theta, theta.denom());
    if o.preperiod != 0 {
        return None;
    }
    let den: BigInt = num_traits::pow(BigInt::from(d), o.period) - 1;
    let count = den.to_u64()?;
    (0..count)
        .into_par_iter()
        .map(|a| Angle::from_ratio(BigRational::new(a.into(), den.clone())))
        .filter(|t| t != theta && orbit(d, t).period == o.period && is_companion(d, theta, t))
        .min()
}

/// Whether `prefix` followed by `block` repeated is below `.(theta)^∞`.
fn digits_below(prefix: &[u32], block: &[u32], theta: &[u32]) -> bool {
    let k = theta.len();
    let seq = prefix.iter().chain(block.iter().cycle());
    for (i, &a) in seq.take(prefix.len() + 2 * k).enumerate() {
        let b = theta[i % k];
        if a != b {
            return a < b;
        }
    }
    false
}

/// Companion of a periodic angle via its candidate partners: iterates of `θ`
/// whose kneading shift is compatible, and the two periodic points that
/// follow the inverse branches of `θ`'s orbit and close up on either side of
/// the cut `μ_d^{k-1}(θ)`.
pub fn companion_pair_by_branches(d: u32, theta: &Angle) -> Option<Angle> {
    let den = theta.denom().clone();
    let o = scaled_orbit(d, theta, &den);
    if o.preperiod != 0 {
        return None;
    }
    let k = o.period;
    let theta_digits = to_digits(d, theta).rep;
    let nu = kneading(d, theta).ok()?;
    let compatible_shift = |m: usize| {
        (1..=k).all(|n| match (nu.symbol(n), nu.symbol(n + m)) {
            (Symbol::Label(a), Symbol::Label(b)) => a == b,
            _ => true,
        })
    };
    let rotation = |m: usize| -> Vec<u32> {
        theta_digits[m..]
            .iter()
            .chain(&theta_digits[..m])
            .copied()
            .collect()
    };
    if let Some(m) =
        (1..k).find(|&m| compatible_shift(m) && is_companion_block(d, &theta_digits, &rotation(m)))
    {
        return Some(angle_from_digits(d, &[], &rotation(m)));
    }
    let theta_num = theta.numer().clone();
    let j = div_small(&(&o.nums[k - 1] * d - &theta_num), &den)
        .0
        .rem_euclid(d as i64) as u32;
    let sectors: Vec<u32> = o.nums[..k - 1]
        .iter()
        .map(|x| scaled_sector(d, &theta_num, &den, x).expect("only the last point is on the cut"))
        .collect();
    // Pull a periodic point back along the branches of μ_d into the given
    // sectors: the preimage of `t` in sector `s` has leading digit
    // `s + [t < θ] mod d`. `at_theta` decides that comparison when the start
    // is `θ` itself, giving access to both sides of `θ`.
    let pull_back = |branch: &[u32], start: &[u32], at_theta: Option<bool>| -> Vec<u32> {
        let mut digits = vec![0; k];
        for n in (0..k).rev() {
            let below = match at_theta {
                Some(flag) if n == k - 1 => flag,
                _ => digits_below(&digits[n + 1..], start, &theta_digits),
            };
            digits[n] = (branch[n] + u32::from(below)) % d;
        }
        digits
    };
    for sigma in [j, (j + d - 1) % d] {
        let branch: Vec<u32> = sectors
            .iter()
            .copied()
            .chain(std::iter::once(sigma))
            .collect();
        for side in [false, true] {
            // Iterate to a fixed block; a repeated block means the branches
            // have no fixed point on this side.
            let mut block = pull_back(&branch, &theta_digits, Some(side));
            let mut seen = HashSet::new();
            let fixed = loop {
                let next = pull_back(&branch, &block, None);
                if next == block {
                    break true;
                }
                if !seen.insert(std::mem::replace(&mut block, next)) {
                    break false;
                }
            };
            if fixed && block != theta_digits && is_companion_block(d, &theta_digits, &block) {
                return Some(angle_from_digits(d, &[], &block));
            }
        }
    }
    None
}

/// The companion `θ′` of a periodic angle `θ` landing at a root, or `None`
/// for co-root angles and non-periodic input.
pub fn companion_pair(d: u32, theta: &Angle) -> Option<Angle> {
    companion_pair_by_branches(d, theta)
}

/// Internal address `1 → s₂ → …`; `truncated` marks an address cut at the
/// length cap rather than ending naturally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InternalAddress {
    pub entries: Vec<u64>,
    pub truncated: bool,
}

/// Default cap on the number of entries computed for infinite addresses.
pub const INTERNAL_ADDRESS_CAP: usize = 64;

/// `ρ_ν(k) = inf{n > k : ν_{n−k} ≠ ν_n}`, or `None` for infinity.
pub fn rho(nu: &Itinerary, k: usize) -> Option<usize> {
    let horizon = k + nu.preperiod() + nu.eventual_period();
    (k + 1..=horizon).find(|&n| nu.symbol(n - k) != nu.symbol(n))
}

/// Orbit of 1 under `ρ_ν`, up to the entry before infinity.
pub fn internal_address(nu: &Itinerary) -> InternalAddress {
    internal_address_capped(nu, INTERNAL_ADDRESS_CAP)
}

pub fn internal_address_capped(nu: &Itinerary, cap: usize) -> InternalAddress {
    let mut entries = vec![1u64];
    let mut k = 1usize;
    while let Some(next) = rho(nu, k) {
        if entries.len() == cap {
            return InternalAddress {
                entries,
                truncated: true,
            };
        }
        entries.push(next as u64);
        k = next;
    }
    InternalAddress {
        entries,
        truncated: false,
    }
}

/// Satellite iff the penultimate entry divides the last one.
pub fn is_satellite(a: &InternalAddress) -> Result<bool> {
    match a.entries.as_slice() {
        [.., p, q] => Ok(q % p == 0),
        _ => Err(Error::TooShort(format!("{:?}", a.entries))),
    }
}

/// All angles with denominator dividing `d^ℓ(d^k − 1)` whose itinerary with
/// respect to `θ` is the kneading sequence of `θ`, in ascending order.
pub fn angular_class(d: u32, theta: &Angle) -> Result<Vec<Angle>> {
    let o = orbit(d, theta);
    if o.is_periodic() {
        return Err(Error::InvalidArgument(format!(
            "{theta} is periodic, not strictly preperiodic"
        )));
    }
    let nu = kneading(d, theta)?;
    let big_d = BigInt::from(d);
    let den: BigInt =
        num_traits::pow(big_d.clone(), o.preperiod) * (num_traits::pow(big_d, o.period) - 1);
    let count = den
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument("denominator too large to scan".into()))?;
    let mut class: Vec<Angle> = (0..count)
        .into_par_iter()
        .map(|a| Angle::from_ratio(BigRational::new(a.into(), den.clone())))
        .filter(|t| crate::angles::itinerary(d, theta, t).is_ok_and(|it| it == nu))
        .collect();
    class.sort();
    Ok(class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::mu;

    fn a(s: &str) -> Angle {
        s.parse().unwrap()
    }

    #[test]
    fn rabbit_portrait() {
        let p = orbit_portrait_from_pair(2, &a("1/7"), &a("2/7")).unwrap();
        assert_eq!(p.classes, vec![vec![a("1/7"), a("2/7"), a("4/7")]]);
        assert_eq!(p.characteristic_pair, (a("1/7"), a("2/7")));
        assert!(orbit_portrait_from_pair(2, &a("1/7"), &a("1/3")).is_err());
        assert!(orbit_portrait_from_pair(2, &a("1/7"), &a("3/7")).is_err());
    }

    #[test]
    fn cubic_rabbit_portrait() {
        let p = orbit_portrait_from_pair(3, &a("14/26"), &a("16/26")).unwrap();
        assert_eq!(p.characteristic_pair, (a("7/13"), a("8/13")));
    }

    #[test]
    fn companions() {
        assert_eq!(companion_pair(2, &a("1/7")), Some(a("2/7")));
        assert_eq!(companion_pair(2, &a("2/7")), Some(a("1/7")));
        assert_eq!(companion_pair(3, &a("14/26")), Some(a("8/13")));
        assert_eq!(companion_pair(2, &a("1/3")), Some(a("2/3")));
        assert_eq!(companion_pair(2, &Angle::zero()), None);
        assert_eq!(companion_pair(2, &a("17/240")), None);
    }

    #[test]
    fn branch_construction_agrees_with_scan() {
        for d in 2..=4u32 {
            for k in 1..=(if d == 2 {
                6
            } else if d == 3 {
                4
            } else {
                3
            }) {
                let den = d.pow(k) - 1;
                for num in 0..den {
                    let t = Angle::from_ratio(BigRational::new(num.into(), den.into()));
                    if orbit(d, &t).period != k as usize {
                        continue;
                    }
                    assert_eq!(
                        companion_pair_by_branches(d, &t),
                        companion_pair_exhaustive(d, &t),
                        "d = {d}, θ = {t}"
                    );
                }
            }
        }
    }

    /// Pair portrait built with rational arithmetic only.
    fn pair_classes_by_rationals(d: u32, alpha: &Angle, beta: &Angle) -> Option<Vec<Vec<Angle>>> {
        let (oa, ob) = (orbit(d, alpha), orbit(d, beta));
        if !oa.is_periodic() || !ob.is_periodic() || oa.period != ob.period {
            return None;
        }
        let mut pts: Vec<Angle> = oa.points.iter().chain(&ob.points).cloned().collect();
        pts.sort();
        pts.dedup();
        let idx = |t: &Angle| pts.binary_search(t).unwrap();
        let mut uf = UnionFind((0..pts.len()).collect());
        for (x, y) in oa.points.iter().zip(&ob.points) {
            uf.union(idx(x), idx(y));
        }
        let class_of = |uf: &mut UnionFind, t: &Angle| -> Vec<Angle> {
            let root = uf.find(idx(t));
            pts.iter()
                .filter(|p| uf.find(idx(p)) == root)
                .cloned()
                .collect()
        };
        let mut classes = vec![class_of(&mut uf, alpha)];
        loop {
            let next = class_of(&mut uf, &mu(d, &classes.last().unwrap()[0]));
            if next == classes[0] {
                return Some(classes);
            }
            classes.push(next);
        }
    }

    #[test]
    fn digit_and_rational_portraits_agree() {
        for (d, k) in [(2u32, 4u32), (3, 3), (4, 2)] {
            let den = d.pow(k) - 1;
            let angles: Vec<Angle> = (0..den)
                .map(|n| Angle::from_ratio(BigRational::new(n.into(), den.into())))
                .filter(|t| orbit(d, t).period == k as usize)
                .collect();
            for alpha in &angles {
                for beta in angles.iter().filter(|b| *b != alpha) {
                    let by_digits = orbit_portrait_from_pair(d, alpha, beta).ok();
                    let by_rationals = pair_classes_by_rationals(d, alpha, beta)
                        .and_then(|c| validate_portrait(d, &c).ok().map(|pair| (c, pair)));
                    match (by_digits, by_rationals) {
                        (None, None) => {}
                        (Some(p), Some((classes, pair))) => {
                            assert_eq!(p.classes, classes, "d = {d}, ({alpha}, {beta})");
                            assert_eq!(p.characteristic_pair, pair, "d = {d}, ({alpha}, {beta})");
                        }
                        (x, y) => {
                            panic!("d = {d}, ({alpha}, {beta}): {x:?} vs {:?}", y.map(|v| v.1))
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn internal_addresses() {
        let nu = kneading(2, &a("1/7")).unwrap();
        assert_eq!(internal_address(&nu).entries, vec![1, 3]);
        assert!(is_satellite(&internal_address(&nu)).unwrap());
        let constant = Itinerary::parse("|0").unwrap();
        assert_eq!(internal_address(&constant).entries, vec![1]);
        assert!(is_satellite(&internal_address(&constant)).is_err());
        let four = InternalAddress {
            entries: vec![1, 2, 4],
            truncated: false,
        };
        assert!(is_satellite(&four).unwrap());
        let three = InternalAddress {
            entries: vec![1, 2, 3],
            truncated: false,
        };
        assert!(!is_satellite(&three).unwrap());
    }

    #[test]
    fn angular_class_of_worked_example() {
        let got = angular_class(2, &a("17/240")).unwrap();
        let want: Vec<Angle> = [17, 19, 23, 31]
            .iter()
            .map(|n| a(&format!("{n}/240")))
            .collect();
        assert_eq!(got, want);
        assert!(angular_class(2, &a("1/7")).is_err());
    }

    #[test]
    fn spiders() {
        let s = build_spider(2, &a("1/7"));
        assert_eq!(s.legs.len(), 3);
        assert!(s.has_internal_segment());
        assert_eq!(s.cyclic_order, vec![1, 2, 3]);
        let s = build_spider(2, &a("17/240"));
        assert_eq!(s.legs.len(), 8);
        assert!(spiders_isomorphic(&s, &s));
        let e = build_exp_spider(&"0 0 0 1|0 0 1 0".parse().unwrap());
        assert_eq!(e.legs.len(), 8);
    }
}
