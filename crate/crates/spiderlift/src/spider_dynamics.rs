//! Numeric spider algorithm: pullback iterations on marked-point
//! configurations for `λ(1 + z/d)^d` and for `λ e^z`.
//!
//! Coordinates are normalized so that point 1 (the critical value of the
//! polynomial, the asymptotic value of the exponential) sits at 0 and
//! point 2 is the multiplier `λ`. The polynomial map `λ(1 + z/d)^d` is
//! affinely conjugate to `u^d + c` through `u = c(1 + z/d)`, `λ = d c^{d−1}`.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::angles::{orbit, static_sector, Angle};
use crate::error::{Error, Result};
use crate::external_address::{address_plan, theta_at, AddressAnglePlan, ExternalAddress};
use crate::seq;
use crate::spider_combinatorics::{build_exp_spider, build_spider};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Marked points `points[n-1] = φ(x_n)` with the branch label used when
/// pulling back onto each index.
#[derive(Clone, Debug, PartialEq)]
pub struct SpiderConfiguration {
    pub points: Vec<Complex64>,
    pub digits: Vec<i64>,
    /// 1-based index the last point maps to, `ℓ + 1`.
    pub wrap: usize,
}

impl SpiderConfiguration {
    pub fn lambda(&self) -> Complex64 {
        self.points[1]
    }

    /// 0-based index of the image of 0-based index `i`.
    fn image(&self, i: usize) -> usize {
        if i + 1 < self.points.len() {
            i + 1
        } else {
            self.wrap - 1
        }
    }

    fn checked_lambda(&self) -> Result<Complex64> {
        let lambda = self.lambda();
        if lambda.norm() < 1e-300 || !lambda.is_finite() {
            return Err(Error::DegenerateLambda);
        }
        Ok(lambda)
    }
}

/// `e^z − 1` without cancellation for small `z`.
fn expm1c(z: Complex64) -> Complex64 {
    let half = (z.im / 2.0).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half * half,
        z.re.exp() * z.im.sin(),
    )
}

fn max_displacement(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// State of the degree-`d` iteration: the configuration plus the argument of
/// the monic parameter `c`, which fixes where the branch cut sits.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySpider {
    pub d: u32,
    /// `2πθ`, the direction of the image leg at the critical value.
    pub cut: f64,
    pub arg_c: f64,
    pub cfg: SpiderConfiguration,
}

/// Unit-circle start `u_n = e^{2πiθ_n}` written in normalized coordinates.
pub fn poly_initial(d: u32, theta: &Angle) -> Result<PolySpider> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "degree {d} must be at least 2"
        )));
    }
    let o = orbit(d, theta);
    if o.is_periodic() && o.period == 1 {
        return Err(Error::InvalidArgument(format!(
            "{theta} is fixed by μ_{d}; no marked orbit to iterate"
        )));
    }
    let digits = o
        .points
        .iter()
        .map(|p| match static_sector(d, theta, p) {
            Some(s) => s as i64,
            None => (p.ratio() * BigInt::from(d) - theta.ratio())
                .to_integer()
                .to_i64()
                .unwrap_or(0),
        })
        .collect();
    let points = o
        .points
        .iter()
        .map(|p| {
            let delta = (p.ratio() - theta.ratio()).to_f64().unwrap_or(0.0);
            d as f64 * expm1c(Complex64::new(0.0, TAU * delta))
        })
        .collect();
    Ok(PolySpider {
        d,
        cut: TAU * theta.to_f64(),
        arg_c: TAU * theta.to_f64(),
        cfg: SpiderConfiguration {
            points,
            digits,
            wrap: o.preperiod + 1,
        },
    })
}

/// One pullback step. Each point is pulled back along the branch of
/// `(·)^{1/d}` selected by its static sector, with the cut of the root taken
/// along the image leg direction `2πθ` from the critical value.
pub fn poly_pullback_step(state: &PolySpider) -> Result<PolySpider> {
    let cfg = &state.cfg;
    let lambda = cfg.checked_lambda()?;
    let d = state.d as f64;
    let angle = |z: Complex64, m: i64| {
        let a = state.arg_c + z.arg();
        (a - state.cut).rem_euclid(TAU) + state.cut + TAU * m as f64
    };
    let anchor = angle(lambda, cfg.digits[0]);
    let ln_lambda = lambda.norm().ln();
    let points = (0..cfg.points.len())
        .map(|i| {
            let z = cfg.points[cfg.image(i)];
            if z == Complex64::new(0.0, 0.0) {
                return Complex64::new(-d, 0.0);
            }
            let w = Complex64::new(z.norm().ln() - ln_lambda, angle(z, cfg.digits[i]) - anchor) / d;
            d * expm1c(w)
        })
        .collect();
    Ok(PolySpider {
        arg_c: anchor / d,
        cfg: SpiderConfiguration {
            points,
            digits: cfg.digits.clone(),
            wrap: cfg.wrap,
        },
        ..*state
    })
}

/// `max_n |λ(1 + w_n/d)^d − w_{n+1}|`.
pub fn poly_chain_residual(d: u32, cfg: &SpiderConfiguration) -> f64 {
    let lambda = cfg.lambda();
    let df = d as f64;
    (0..cfg.points.len())
        .map(|i| {
            let w = cfg.points[i];
            let image = lambda * ((Complex64::new(1.0, 0.0) + w / df).ln() * df).exp();
            let image = if w == Complex64::new(-df, 0.0) {
                Complex64::new(0.0, 0.0)
            } else {
                image
            };
            (image - cfg.points[cfg.image(i)]).norm()
        })
        .fold(0.0, f64::max)
}

/// Outcome of a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    /// `None` for the exponential family.
    pub degree: Option<u32>,
    pub lambda: Complex64,
    /// All `c` with `d·c^{d−1} = λ`; empty for the exponential family.
    pub c_candidates: Vec<Complex64>,
    pub c_selected: Option<Complex64>,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    /// Groups of 1-based indices whose points coincide at the limit.
    pub collisions: Vec<Vec<usize>>,
    /// Identifications predicted by the spider's quotient classes.
    pub predicted_collisions: Vec<Vec<usize>>,
    pub config: SpiderConfiguration,
    /// Degree of the polynomial solve used as a starting point, if any.
    pub warm_start_degree: Option<u32>,
}

impl SolveReport {
    pub fn collisions_match_prediction(&self) -> bool {
        self.collisions == self.predicted_collisions
    }
}

fn collision_classes(points: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        match classes
            .iter_mut()
            .find(|c| (points[c[0] - 1] - p).norm() < radius)
        {
            Some(c) => c.push(i + 1),
            None => classes.push(vec![i + 1]),
        }
    }
    classes
}

fn sorted_classes(mut classes: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for c in &mut classes {
        c.sort();
    }
    classes.sort();
    classes
}

/// Radius below which two marked points count as collided. Identified points
/// approach each other only linearly, so this is looser than the step size.
fn collision_radius(tol: f64) -> f64 {
    (tol.sqrt() * 1e-2).max(10.0 * tol)
}

fn iterate<S>(
    mut state: S,
    tol: f64,
    max_iter: usize,
    step: impl Fn(&S) -> Result<S>,
    points: impl Fn(&S) -> &[Complex64],
) -> Result<(S, usize, f64, Vec<f64>)> {
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let next = step(&state)?;
        residual = max_displacement(points(&state), points(&next));
        state = next;
        history.push(residual);
        if !residual.is_finite() {
            break;
        }
        if residual < tol {
            return Ok((state, it, residual, history));
        }
    }
    Err(Error::NoConvergence {
        iterations: history.len(),
        residual,
    })
}

fn c_candidates(d: u32, lambda: Complex64) -> Vec<Complex64> {
    let m = (d - 1) as f64;
    let r = (lambda.norm() / d as f64).powf(1.0 / m);
    (0..d - 1)
        .map(|k| Complex64::from_polar(r, (lambda.arg() + TAU * k as f64) / m))
        .collect()
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let x = (a - b).rem_euclid(TAU);
    x.min(TAU - x)
}

/// Runs the degree-`d` spider iteration for `θ` to a fixed point.
pub fn poly_spider_solve(d: u32, theta: &Angle, tol: f64, max_iter: usize) -> Result<SolveReport> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let start = poly_initial(d, theta)?;
    let (state, iterations, residual, residual_history) = iterate(
        start,
        tol,
        max_iter,
        poly_pullback_step,
        |s: &PolySpider| &s.cfg.points,
    )?;
    let lambda = state.cfg.lambda();
    let candidates = c_candidates(d, lambda);
    let selected = candidates.iter().copied().min_by(|a, b| {
        circular_gap(a.arg(), state.arg_c)
            .partial_cmp(&circular_gap(b.arg(), state.arg_c))
            .unwrap_or(Ordering::Equal)
    });
    let spider = build_spider(d, theta);
    Ok(SolveReport {
        degree: Some(d),
        lambda,
        c_candidates: candidates,
        c_selected: selected,
        iterations,
        residual,
        residual_history,
        collisions: sorted_classes(collision_classes(&state.cfg.points, collision_radius(tol))),
        predicted_collisions: sorted_classes(spider.endpoint_classes),
        config: state.cfg,
        warm_start_degree: None,
    })
}

/// Order on address entries matching the order of the digits `x_n(d)` for
/// large `d`: nonnegative entries ascending, then negative entries ascending.
fn digit_key(x: i64) -> (bool, i64) {
    (x < 0, x)
}

fn cmp_digitwise(a: &ExternalAddress, b: &ExternalAddress) -> Ordering {
    let n = seq::comparison_horizon(a.preperiod(), a.period(), b.preperiod(), b.period());
    (1..=n)
        .map(|i| digit_key(a.entry(i)).cmp(&digit_key(b.entry(i))))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Branch label of each index for the exponential pullback: `s_n` when
/// `σ^n(s)` lies above `s` in the digitwise order, else `s_n − 1`. These are
/// the static sector indices of `θ_d` for every `d ≥ D`, read as integers
/// near 0.
pub fn exp_branch_labels(s: &ExternalAddress) -> Vec<i64> {
    (1..=s.orbit_len())
        .map(|n| {
            let above = cmp_digitwise(&s.shift_n(n), s) == Ordering::Greater;
            s.entry(n) - i64::from(!above)
        })
        .collect()
}

/// Initial configuration shaped like `Γ_s`: point `n` at height
/// `2π s_n + π ρ_n`, where `ρ_n` ranks `σ^{n−1}(s)` among shifts with the
/// same first entry.
pub fn exp_initial(s: &ExternalAddress) -> SpiderConfiguration {
    let n = s.orbit_len();
    let shifts: Vec<ExternalAddress> = (0..n).map(|i| s.shift_n(i)).collect();
    let mut points = vec![Complex64::new(0.0, 0.0)];
    for i in 1..n {
        let mut peers: Vec<&ExternalAddress> = shifts
            .iter()
            .filter(|t| t.entry(1) == shifts[i].entry(1))
            .collect();
        peers.sort();
        peers.dedup();
        let rank = peers.iter().position(|t| **t == shifts[i]).unwrap_or(0);
        let rho = (rank + 1) as f64 / (peers.len() + 1) as f64 - 0.5;
        points.push(Complex64::new(
            1.0,
            TAU * s.entry(i + 1) as f64 + std::f64::consts::PI * rho,
        ));
    }
    SpiderConfiguration {
        points,
        digits: exp_branch_labels(s),
        wrap: s.preperiod() + 1,
    }
}

fn arg0(z: Complex64) -> f64 {
    z.arg().rem_euclid(TAU)
}

/// One exponential pullback step: `ψ(e_n) = ln r + i t + 2πi m_n` with
/// `φ(e_{n+1})/λ = r e^{it}`, the arguments of both `φ(e_{n+1})` and `λ`
/// taken in `[0, 2π)`, and `m_n` the branch label.
pub fn exp_pullback_step(cfg: &SpiderConfiguration) -> Result<SpiderConfiguration> {
    let lambda = cfg.checked_lambda()?;
    let (ln_lambda, arg_lambda) = (lambda.norm().ln(), arg0(lambda));
    let points = (0..cfg.points.len())
        .map(|i| {
            let z = cfg.points[cfg.image(i)];
            Complex64::new(
                z.norm().ln() - ln_lambda,
                arg0(z) - arg_lambda + TAU * cfg.digits[i] as f64,
            )
        })
        .collect();
    Ok(SpiderConfiguration {
        points,
        digits: cfg.digits.clone(),
        wrap: cfg.wrap,
    })
}

/// `max_n |λ e^{w_n} − w_{n+1}|`.
pub fn exp_chain_residual(cfg: &SpiderConfiguration) -> f64 {
    let lambda = cfg.lambda();
    (0..cfg.points.len())
        .map(|i| (lambda * cfg.points[i].exp() - cfg.points[cfg.image(i)]).norm())
        .fold(0.0, f64::max)
}

/// Tolerance used for the polynomial solve that seeds the exponential one.
const WARM_START_TOL: f64 = 1e-8;

/// Runs the exponential spider iteration for a parameter address.
///
/// The iteration starts from the fixed point of the degree-`D` polynomial
/// spider for `θ_D`, rescaled to the exponential normalization, and falls back
/// to the `Γ_s`-shaped start if that solve fails.
pub fn exp_spider_solve(s: &ExternalAddress, tol: f64, max_iter: usize) -> Result<SolveReport> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let plan = address_plan(s)?;
    if s.orbit_len() < 2 {
        return Err(Error::InvalidAddress(format!(
            "{s} has no marked orbit to iterate"
        )));
    }
    let labels = exp_branch_labels(s);
    let mut starts: Vec<(SpiderConfiguration, Option<u32>)> = Vec::new();
    if let Ok(warm) = warm_start(&plan, max_iter) {
        starts.push((
            SpiderConfiguration {
                points: warm.config.points,
                digits: labels.clone(),
                wrap: s.preperiod() + 1,
            },
            Some(plan.min_degree),
        ));
    }
    starts.push((exp_initial(s), None));
    let mut last_err = Error::NoConvergence {
        iterations: 0,
        residual: f64::INFINITY,
    };
    for (start, degree) in starts {
        match iterate(
            start,
            tol,
            max_iter,
            exp_pullback_step,
            |c: &SpiderConfiguration| &c.points,
        ) {
            Ok((cfg, iterations, residual, residual_history)) => {
                return Ok(SolveReport {
                    degree: None,
                    lambda: cfg.lambda(),
                    c_candidates: vec![],
                    c_selected: None,
                    iterations,
                    residual,
                    residual_history,
                    collisions: sorted_classes(collision_classes(
                        &cfg.points,
                        collision_radius(tol),
                    )),
                    predicted_collisions: sorted_classes(build_exp_spider(s).endpoint_classes),
                    config: cfg,
                    warm_start_degree: degree,
                })
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn warm_start(plan: &AddressAnglePlan, max_iter: usize) -> Result<SolveReport> {
    let theta = theta_at(plan, plan.min_degree)?;
    poly_spider_solve(plan.min_degree, &theta, WARM_START_TOL, max_iter)
}

/// One row of the degree ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxRow {
    pub d: u32,
    pub theta: Angle,
    pub report: SolveReport,
}

#[derive(Clone, Debug)]
pub struct Approximation {
    pub plan: AddressAnglePlan,
    pub rows: Vec<(u32, Result<ApproxRow>)>,
    pub exponential: Result<SolveReport>,
}

/// Solves the polynomial spiders for `θ_d` at each requested degree and the
/// exponential spider for `s`.
pub fn approximate(
    s: &ExternalAddress,
    degrees: &[u32],
    tol: f64,
    max_iter: usize,
) -> Result<Approximation> {
    let plan = address_plan(s)?;
    let rows = degrees
        .par_iter()
        .map(|&d| {
            let row = theta_at(&plan, d).and_then(|theta| {
                let report = poly_spider_solve(d, &theta, tol, max_iter)?;
                Ok(ApproxRow { d, theta, report })
            });
            (d, row)
        })
        .collect();
    let exponential = exp_spider_solve(s, tol, max_iter);
    Ok(Approximation {
        plan,
        rows,
        exponential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Angle {
        s.parse().unwrap()
    }

    #[test]
    fn expm1c_matches_naive_away_from_zero() {
        let z = Complex64::new(0.7, -2.1);
        assert!((expm1c(z) - (z.exp() - 1.0)).norm() < 1e-15);
        let tiny = Complex64::new(1e-12, 1e-12);
        assert!((expm1c(tiny) - tiny).norm() < 2e-24);
    }

    #[test]
    fn initial_configuration_is_normalized() {
        let s = poly_initial(2, &a("1/7")).unwrap();
        assert_eq!(s.cfg.points[0], Complex64::new(0.0, 0.0));
        let next = poly_pullback_step(&s).unwrap();
        assert_eq!(next.cfg.points[0], Complex64::new(0.0, 0.0));
        assert!(poly_initial(3, &a("1/2")).is_err());
    }

    #[test]
    fn rabbit_parameter() {
        let r = poly_spider_solve(2, &a("1/7"), 1e-12, DEFAULT_MAX_ITER).unwrap();
        let c = r.c_selected.unwrap();
        assert!((c - Complex64::new(-0.122561, 0.744862)).norm() < 1e-6);
        assert!(poly_chain_residual(2, &r.config) < 1e-11);
    }

    #[test]
    fn degenerate_lambda_is_rejected() {
        let cfg = SpiderConfiguration {
            points: vec![Complex64::new(0.0, 0.0); 3],
            digits: vec![0; 3],
            wrap: 1,
        };
        assert_eq!(exp_pullback_step(&cfg), Err(Error::DegenerateLambda));
    }

    #[test]
    fn exp_labels_of_worked_example() {
        let s: ExternalAddress = "0 0 0 -1|0 0 1 0".parse().unwrap();
        assert_eq!(exp_branch_labels(&s), vec![0, 0, 0, -1, 0, 0, 0, 0]);
        let s: ExternalAddress = "0|1".parse().unwrap();
        assert_eq!(exp_branch_labels(&s), vec![0, 1]);
    }

    #[test]
    fn exp_step_keeps_first_point_at_zero() {
        let s: ExternalAddress = "0 0 0 -1|0 0 1 0".parse().unwrap();
        let cfg = exp_pullback_step(&exp_initial(&s)).unwrap();
        assert_eq!(cfg.points[0], Complex64::new(0.0, 0.0));
    }
}
