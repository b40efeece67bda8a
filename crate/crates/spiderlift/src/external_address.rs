//! Preperiodic external addresses and the polynomial angles `θ_d` they induce.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::angles::{angle_from_digits, Angle, Itinerary, Symbol};
use crate::error::{Error, Result};
use crate::seq;

/// An eventually periodic integer sequence `s₁ s₂ …` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExternalAddress {
    pub pre: Vec<i64>,
    pub rep: Vec<i64>,
}

impl ExternalAddress {
    pub fn new(pre: Vec<i64>, rep: Vec<i64>) -> Result<ExternalAddress> {
        if rep.is_empty() {
            return Err(Error::InvalidAddress(
                "repeating block must be nonempty".into(),
            ));
        }
        let (pre, rep) = seq::canonicalize(pre, rep);
        Ok(ExternalAddress { pre, rep })
    }

    /// The constant address `\overline{0}`.
    pub fn zero() -> ExternalAddress {
        ExternalAddress {
            pre: vec![],
            rep: vec![0],
        }
    }

    /// Entry `s_n`, 1-based.
    pub fn entry(&self, n: usize) -> i64 {
        assert!(n >= 1, "address indices start at 1");
        *seq::at(&self.pre, &self.rep, n - 1)
    }

    pub fn preperiod(&self) -> usize {
        self.pre.len()
    }

    pub fn period(&self) -> usize {
        self.rep.len()
    }

    /// Number of distinct shifts, `ℓ + k`.
    pub fn orbit_len(&self) -> usize {
        self.pre.len() + self.rep.len()
    }

    pub fn max_abs(&self) -> i64 {
        self.pre
            .iter()
            .chain(&self.rep)
            .map(|x| x.abs())
            .max()
            .unwrap_or(0)
    }

    /// The left shift `σ`.
    pub fn shift(&self) -> ExternalAddress {
        if self.pre.is_empty() {
            let mut rep = self.rep.clone();
            rep.rotate_left(1);
            ExternalAddress { pre: vec![], rep }
        } else {
            ExternalAddress {
                pre: self.pre[1..].to_vec(),
                rep: self.rep.clone(),
            }
        }
    }

    pub fn shift_n(&self, n: usize) -> ExternalAddress {
        (0..n).fold(self.clone(), |s, _| s.shift())
    }

    /// `r·s`: the address with `r` prepended.
    pub fn prepend(&self, r: i64) -> ExternalAddress {
        let mut pre = vec![r];
        pre.extend_from_slice(&self.pre);
        ExternalAddress::new(pre, self.rep.clone()).expect("nonempty block")
    }
}

fn join(xs: &[i64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for ExternalAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", join(&self.pre), join(&self.rep))
    }
}

impl FromStr for ExternalAddress {
    type Err = Error;

    /// Parses `"0 0 0 -1|0 0 1 0"` (spaces around `|` optional).
    fn from_str(s: &str) -> Result<ExternalAddress> {
        let (pre, rep) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("expected pre|rep, got {s:?}")))?;
        let ints = |part: &str| -> Result<Vec<i64>> {
            part.split_whitespace()
                .map(|x| {
                    x.parse::<i64>()
                        .map_err(|_| Error::Parse(format!("bad entry {x:?}")))
                })
                .collect()
        };
        ExternalAddress::new(ints(pre)?, ints(rep)?)
    }
}

/// Lexicographic order.
pub fn cmp_lex(a: &ExternalAddress, b: &ExternalAddress) -> Ordering {
    let n = seq::comparison_horizon(a.preperiod(), a.period(), b.preperiod(), b.period());
    (1..=n)
        .map(|i| a.entry(i).cmp(&b.entry(i)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

impl Ord for ExternalAddress {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_lex(self, other)
    }
}

impl PartialOrd for ExternalAddress {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cylindrical order `<<`: the lexicographic order cut open at `\overline{0}`,
/// so addresses `≥ \overline{0}` come before those `< \overline{0}`.
pub fn cmp_cyl(a: &ExternalAddress, b: &ExternalAddress) -> Ordering {
    let zero = ExternalAddress::zero();
    let below = |x: &ExternalAddress| cmp_lex(x, &zero) == Ordering::Less;
    below(a).cmp(&below(b)).then_with(|| cmp_lex(a, b))
}

/// Itinerary of `t` with respect to `s`: symbol `r` when the shift lies
/// strictly between `r·s` and `(r+1)·s`, and `*` when it equals `r·s`.
pub fn exp_itinerary(s: &ExternalAddress, t: &ExternalAddress) -> Itinerary {
    let mut cur = t.clone();
    let mut syms = Vec::with_capacity(t.orbit_len());
    for _ in 0..t.orbit_len() {
        let r = cur.entry(1);
        syms.push(match cmp_lex(&cur, &s.prepend(r)) {
            Ordering::Greater => Symbol::Label(r),
            Ordering::Less => Symbol::Label(r - 1),
            Ordering::Equal => Symbol::Star,
        });
        cur = cur.shift();
    }
    let rep = syms.split_off(t.preperiod());
    Itinerary::new(syms, rep)
}

/// Integer polynomial with ascending coefficients, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    pub coefficients: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coefficients: Vec<BigInt>) -> IntPolynomial {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        IntPolynomial { coefficients }
    }

    pub fn constant(c: impl Into<BigInt>) -> IntPolynomial {
        IntPolynomial::new(vec![c.into()])
    }

    /// `c·x^n`.
    pub fn monomial(c: impl Into<BigInt>, n: usize) -> IntPolynomial {
        let mut coefficients = vec![BigInt::zero(); n];
        coefficients.push(c.into());
        IntPolynomial::new(coefficients)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coefficients.last().cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coefficients
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn add(&self, other: &IntPolynomial) -> IntPolynomial {
        let n = self.coefficients.len().max(other.coefficients.len());
        let get = |p: &IntPolynomial, i: usize| p.coefficients.get(i).cloned().unwrap_or_default();
        IntPolynomial::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn neg(&self) -> IntPolynomial {
        IntPolynomial::new(self.coefficients.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &IntPolynomial) -> IntPolynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        if self.coefficients.is_empty() || other.coefficients.is_empty() {
            return IntPolynomial::new(vec![]);
        }
        let mut out = vec![BigInt::zero(); self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coefficients.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let body = match (i, mag.is_one()) {
                (0, _) => mag.to_string(),
                (1, true) => "x".to_string(),
                (1, false) => format!("{mag}x"),
                (_, true) => format!("x^{i}"),
                (_, false) => format!("{mag}x^{i}"),
            };
            let sign = if c.is_negative() { "-" } else { "+" };
            terms.push((sign, body));
        }
        match terms.split_first() {
            None => f.write_str("0"),
            Some(((sign, body), rest)) => {
                if *sign == "-" {
                    f.write_str("-")?;
                }
                f.write_str(body)?;
                for (sign, body) in rest {
                    write!(f, " {sign} {body}")?;
                }
                Ok(())
            }
        }
    }
}

/// The data `(D, j, q)` attached to a parameter address.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AddressAnglePlan {
    pub address: ExternalAddress,
    /// Minimal degree `D = 1 + 2(max|sₙ| + 1)`.
    pub min_degree: u32,
    /// Primary lift branch `(D − 1)/2`.
    pub j: u32,
    /// Other admissible branch `(D + 1)/2`.
    pub j_alternate: u32,
    /// Reduced polynomial with `deg q ≤ ℓ + k − 2`.
    pub q: IntPolynomial,
    /// Unreduced `q̃`, whose value at `d` is the numerator of `θ_d`.
    pub q_tilde: IntPolynomial,
    pub ell: usize,
    pub k: usize,
}

impl AddressAnglePlan {
    /// Base-`d` digit `x_n(d)`: `sₙ` if nonnegative, else `d − |sₙ|`.
    pub fn digit(&self, n: usize, d: u32) -> u32 {
        digit_rule(self.address.entry(n), d)
    }
}

fn digit_rule(s: i64, d: u32) -> u32 {
    let x = if s >= 0 { s } else { d as i64 + s };
    u32::try_from(x).expect("digit rule yields a valid digit for d ≥ D")
}

/// `x_n(x)` as a polynomial: the constant `sₙ` or `x − |sₙ|`.
fn digit_polynomial(s: i64) -> IntPolynomial {
    if s >= 0 {
        IntPolynomial::constant(s)
    } else {
        IntPolynomial::new(vec![BigInt::from(s), BigInt::one()])
    }
}

pub fn address_plan(s: &ExternalAddress) -> Result<AddressAnglePlan> {
    if s.entry(1) != 0 {
        return Err(Error::InvalidAddress(format!(
            "first entry of {s} must be 0"
        )));
    }
    let (ell, k) = (s.preperiod(), s.period());
    let m = u32::try_from(s.max_abs())
        .map_err(|_| Error::InvalidAddress("entries too large".into()))?;
    let min_degree = 2 * m + 3;
    let xk_minus_1 = IntPolynomial::monomial(1, k).sub(&IntPolynomial::constant(1));
    let mut q_tilde = IntPolynomial::new(vec![]);
    for n in 1..=ell {
        let term = digit_polynomial(s.entry(n))
            .mul(&IntPolynomial::monomial(1, ell - n))
            .mul(&xk_minus_1);
        q_tilde = q_tilde.add(&term);
    }
    for n in 1..=k {
        let term = digit_polynomial(s.entry(ell + n)).mul(&IntPolynomial::monomial(1, k - n));
        q_tilde = q_tilde.add(&term);
    }
    // x^ℓ(x^{k−1} + … + 1), monic of degree ℓ + k − 1.
    let modulus = IntPolynomial::new(
        std::iter::repeat_n(BigInt::zero(), ell)
            .chain(std::iter::repeat_n(BigInt::one(), k))
            .collect(),
    );
    let top = ell + k - 1;
    let mut q = q_tilde.clone();
    while let Some(deg) = q.degree().filter(|&deg| deg >= top) {
        q = q.sub(&IntPolynomial::monomial(q.leading(), deg - top).mul(&modulus));
    }
    Ok(AddressAnglePlan {
        address: s.clone(),
        min_degree,
        j: m + 1,
        j_alternate: m + 2,
        q,
        q_tilde,
        ell,
        k,
    })
}

/// `τ_q(d) = (d − 1) q(d) / (d^ℓ (d^k − 1)) mod 1`.
pub fn tau(q: &IntPolynomial, ell: usize, k: usize, d: u32) -> Angle {
    let x = BigInt::from(d);
    let den = num_traits::pow(x.clone(), ell) * (num_traits::pow(x.clone(), k) - 1);
    Angle::from_ratio(BigRational::new((&x - 1) * q.eval(&x), den))
}

/// `θ_d`, the angle whose base-`d` digits follow the digit rule.
pub fn theta_at(plan: &AddressAnglePlan, d: u32) -> Result<Angle> {
    if d < plan.min_degree {
        return Err(Error::DegreeTooSmall {
            d,
            min: plan.min_degree,
        });
    }
    let s = &plan.address;
    let pre: Vec<u32> = s.pre.iter().map(|&x| digit_rule(x, d)).collect();
    let rep: Vec<u32> = s.rep.iter().map(|&x| digit_rule(x, d)).collect();
    Ok(angle_from_digits(d, &pre, &rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> ExternalAddress {
        x.parse().unwrap()
    }

    #[test]
    fn parse_display_and_canonical_form() {
        let a = s("0 0 0 -1|0 0 1 0");
        assert_eq!(a.to_string(), "0 0 0 -1 | 0 0 1 0");
        assert_eq!(s("0 1|1 1"), s("0|1"));
        assert!("0 1".parse::<ExternalAddress>().is_err());
        assert!("0|".parse::<ExternalAddress>().is_err());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(s("0|3").shift(), s("|3"));
        assert_eq!(s("0 0 0 -1|0 0 1 0").shift(), s("0 0 -1|0 0 1 0"));
        let a = s("0 0 0 -1|0 0 1 0");
        assert_eq!(a.shift_n(8), a.shift_n(4));
    }

    #[test]
    fn orders() {
        assert_eq!(cmp_lex(&s("0|0"), &s("1|0")), Ordering::Less);
        let (neg, pos) = (s("-1|0"), s("1|0"));
        assert_eq!(cmp_lex(&neg, &pos), Ordering::Less);
        assert_eq!(cmp_cyl(&pos, &neg), Ordering::Less);
        assert_eq!(cmp_cyl(&neg, &pos), Ordering::Greater);
        assert_eq!(cmp_cyl(&s("|0"), &pos), Ordering::Less);
    }

    #[test]
    fn plan_for_constant_tails() {
        let p = address_plan(&s("0|2")).unwrap();
        assert_eq!((p.min_degree, p.j, p.j_alternate), (7, 3, 4));
        assert_eq!(p.q, IntPolynomial::constant(2));
        assert_eq!(theta_at(&p, 7).unwrap(), "1/21".parse().unwrap());
        let p = address_plan(&s("0|-2")).unwrap();
        assert_eq!(p.q, IntPolynomial::constant(-2));
        assert_eq!(theta_at(&p, 9).unwrap(), "7/72".parse().unwrap());
        assert!(matches!(
            theta_at(&p, 6),
            Err(Error::DegreeTooSmall { d: 6, min: 7 })
        ));
        assert!(address_plan(&s("1|0")).is_err());
    }

    #[test]
    fn plan_for_worked_example() {
        let p = address_plan(&s("0 0 0 -1|0 0 1 0")).unwrap();
        assert_eq!(p.min_degree, 5);
        assert_eq!(p.q.to_string(), "x^5 - x^4 + 1");
        assert_eq!(p.q_tilde, p.q);
        let sibling = address_plan(&s("0 0 0 1|0 0 1 0")).unwrap();
        assert_eq!(sibling.q.to_string(), "x^4 + x - 1");
    }

    #[test]
    fn polynomial_display() {
        let p = IntPolynomial::new(vec![(-1).into(), 2.into(), 0.into(), (-3).into()]);
        assert_eq!(p.to_string(), "-3x^3 + 2x - 1");
        assert_eq!(IntPolynomial::new(vec![0.into()]).to_string(), "0");
    }
}
