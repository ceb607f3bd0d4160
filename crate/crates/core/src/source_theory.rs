//! Index functions, regularization-parameter schedules and theoretical rate
//! exponents.
//!
//! Schedules invert `theta(t) = phi(t) t` (labeled regression) or
//! `theta(t) = phi(t) t / xi(t)` (ratio estimation with kernel capacity
//! `xi`) at the statistical size functional `a^{-1/2} + b^{-1/2}`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const BISECTION_CAP: usize = 200;

/// Family of an index function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexKind {
    /// `t^exponent`.
    Power { exponent: f64 },
    /// `t^r log^{-nu}(1/t)` near zero.
    PowerLog { r: f64, nu: f64 },
}

/// Strictly increasing function on `[0, c]` with `f(0) = 0`.
///
/// The power-log family is defined by its formula on
/// `(0, min(c, 1/e)]` and continued as `f(t0) (t / t0)^r` above `t0`, which
/// keeps it continuous and strictly increasing. Both families are evaluated
/// beyond `c` by the same formulas when a schedule needs a larger bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexFunction {
    kind: IndexKind,
    domain_upper: f64,
}

impl IndexFunction {
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::Parameter(format!("power exponent must be positive, got {exponent}")));
        }
        Ok(IndexFunction { kind: IndexKind::Power { exponent }, domain_upper: 1.0 })
    }

    pub fn power_log(r: f64, nu: f64) -> Result<Self> {
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::Parameter(format!("power-log exponent r must exceed 1, got {r}")));
        }
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(Error::Parameter(format!("power-log exponent nu must lie in (0, 1], got {nu}")));
        }
        Ok(IndexFunction { kind: IndexKind::PowerLog { r, nu }, domain_upper: 1.0 })
    }

    /// Replaces the domain upper end `c` (default 1, the squared kernel bound
    /// of the Gaussian kernel).
    pub fn with_domain(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Parameter(format!("domain upper end must be positive, got {c}")));
        }
        self.domain_upper = c;
        Ok(self)
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn domain_upper(&self) -> f64 {
        self.domain_upper
    }

    /// Leading power exponent (`exponent` or `r`).
    pub fn leading_exponent(&self) -> f64 {
        match self.kind {
            IndexKind::Power { exponent } => exponent,
            IndexKind::PowerLog { r, .. } => r,
        }
    }

    /// Evaluation for any `t >= 0`, without domain checks.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.kind {
            IndexKind::Power { exponent } => t.powf(exponent),
            IndexKind::PowerLog { r, nu } => {
                let t0 = self.domain_upper.min((-1f64).exp());
                let core = |s: f64| s.powf(r) * (1.0 / s).ln().powf(-nu);
                if t <= t0 {
                    core(t)
                } else {
                    core(t0) * (t / t0).powf(r)
                }
            }
        }
    }
}

impl fmt::Display for IndexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            IndexKind::Power { exponent } => write!(f, "power:{exponent:?}"),
            IndexKind::PowerLog { r, nu } => write!(f, "powerlog:{r:?}:{nu:?}"),
        }
    }
}

impl FromStr for IndexFunction {
    type Err = Error;

    /// Accepts `power:<rho>` and `powerlog:<r>:<nu>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("bad index function '{s}' (power:<rho> or powerlog:<r>:<nu>)"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| p.parse::<f64>().map_err(|_| bad());
        let f = match parts.as_slice() {
            ["power", e] => IndexFunction::power(num(e)?),
            ["powerlog", r, nu] => IndexFunction::power_log(num(r)?, num(nu)?),
            _ => return Err(bad()),
        };
        f.map_err(|e| Error::Config(e.to_string()))
    }
}

/// `phi(t)` for `t` in `[0, c]`.
pub fn eval_index(f: &IndexFunction, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t <= f.domain_upper) {
        return Err(Error::Input(format!("argument {t} outside index-function domain [0, {}]", f.domain_upper)));
    }
    Ok(f.value(t))
}

/// Bisection inverse of a strictly increasing function on `[lo, hi]`.
///
/// Requires `f(lo) < y <= f(hi)`. The default tolerance is
/// `1e-12 * max(1, y)`; bisection continues until the bracket collapses or
/// 200 halvings, so the returned point usually beats the tolerance.
pub fn invert_monotone(f: impl Fn(f64) -> f64, y: f64, bracket: (f64, f64), tol: Option<f64>) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(y > f_lo && y <= f_hi) {
        return Err(Error::Range { value: y, low: f_lo, high: f_hi });
    }
    let tol = tol.unwrap_or(1e-12 * y.abs().max(1.0));
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..BISECTION_CAP {
        mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = (f(mid) - y).abs();
    if residual > tol && hi - lo > f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Range { value: y, low: f_lo, high: f_hi });
    }
    Ok(mid)
}

/// `a^{-1/2} + b^{-1/2}`.
pub fn size_functional(a: usize, b: usize) -> f64 {
    (a as f64).powf(-0.5) + (b as f64).powf(-0.5)
}

/// Inverse of an increasing `theta` with `theta(0) = 0`, starting from the
/// bracket `[0, c]` and doubling the upper end while `theta(hi) < y`.
fn invert_schedule(theta: impl Fn(f64) -> f64, y: f64, c: f64) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Parameter(format!("schedule target must be positive, got {y}")));
    }
    let mut hi = c;
    let mut doublings = 0;
    while theta(hi) < y {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Range { value: y, low: 0.0, high: theta(hi) });
        }
    }
    invert_monotone(theta, y, (0.0, hi), None)
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::Parameter("sample sizes must be at least 1".into()));
    }
    Ok(())
}

/// `theta^{-1}(m^{-1/2} + n^{-1/2})` with `theta(t) = phi(t) t`.
pub fn lambda_mn(phi: &IndexFunction, m: usize, n: usize) -> Result<f64> {
    check_sizes(&[m, n])?;
    invert_schedule(|t| phi.value(t) * t, size_functional(m, n), phi.domain_upper)
}

fn theta_phi_xi<'a>(phi: &'a IndexFunction, xi: &'a IndexFunction) -> impl Fn(f64) -> f64 + 'a {
    move |t: f64| if t <= 0.0 { 0.0 } else { phi.value(t) * t / xi.value(t) }
}

/// Fails with a configuration error unless `phi(t) t / xi(t)` is strictly
/// increasing on a geometric grid over `(0, c]`.
pub fn check_theta_monotone(phi: &IndexFunction, xi: &IndexFunction) -> Result<()> {
    let theta = theta_phi_xi(phi, xi);
    let c = phi.domain_upper;
    let k = 400;
    let mut prev = 0.0;
    for i in 0..k {
        let t = c * (1e-12f64).powf(1.0 - i as f64 / (k - 1) as f64);
        let v = theta(t);
        if !(v > prev) || !v.is_finite() {
            return Err(Error::Config(format!(
                "phi(t) t / xi(t) is not strictly increasing for phi = {phi}, xi = {xi}"
            )));
        }
        prev = v;
    }
    Ok(())
}

/// `theta_{phi,xi}^{-1}(M^{-1/2} + N^{-1/2})` with
/// `theta_{phi,xi}(t) = phi(t) t / xi(t)`.
pub fn lambda_big_mn(phi_beta: &IndexFunction, xi: &IndexFunction, big_m: usize, big_n: usize) -> Result<f64> {
    check_sizes(&[big_m, big_n])?;
    check_theta_monotone(phi_beta, xi)?;
    invert_schedule(theta_phi_xi(phi_beta, xi), size_functional(big_m, big_n), phi_beta.domain_upper)
}

/// Schedule for regression with estimated weights:
/// `theta^{-1}(m^{-1/2} + n^{-1/2} + xi(l) phi_beta(l))` where `l` is the
/// ratio-estimation schedule [`lambda_big_mn`].
#[allow(clippy::too_many_arguments)]
pub fn lambda_delta(
    phi: &IndexFunction,
    phi_beta: &IndexFunction,
    xi: &IndexFunction,
    m: usize,
    n: usize,
    big_m: usize,
    big_n: usize,
) -> Result<f64> {
    check_sizes(&[m, n, big_m, big_n])?;
    let inner = lambda_big_mn(phi_beta, xi, big_m, big_n)?;
    let y = size_functional(m, n) + xi.value(inner) * phi_beta.value(inner);
    invert_schedule(|t| phi.value(t) * t, y, phi.domain_upper)
}

/// Declared smoothness for rate experiments: `phi` for the regression
/// function, `phi_beta` for the density ratio, `xi` for the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSpec {
    pub phi: IndexFunction,
    pub phi_beta: IndexFunction,
    pub xi: IndexFunction,
}

impl ScheduleSpec {
    /// Validates that `xi` is a power with exponent in `(0, 1/2]`, so that
    /// `t / xi(t)^2` is nondecreasing.
    pub fn new(phi: IndexFunction, phi_beta: IndexFunction, xi: IndexFunction) -> Result<Self> {
        match xi.kind {
            IndexKind::Power { exponent } if exponent <= 0.5 => {}
            _ => return Err(Error::Config(format!("xi must be power:<s> with 0 < s <= 1/2, got {xi}"))),
        }
        check_theta_monotone(&phi_beta, &xi)?;
        Ok(ScheduleSpec { phi, phi_beta, xi })
    }

    pub fn varsigma(&self) -> f64 {
        self.xi.leading_exponent()
    }
}

/// Error setting whose rate exponent is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSetting {
    /// Regression error in `L2(rho_T)`, source condition `t^{r - 1/2}`.
    RegressionL2 { r: f64 },
    /// Regression error in the RKHS norm.
    RegressionH { r: f64 },
    /// Ratio error in the RKHS norm, `phi_beta = t^eta`, `xi = t^varsigma`.
    BetaRkhs { eta: f64, varsigma: f64 },
    /// Uniform pointwise ratio error.
    BetaPointwise { eta: f64, varsigma: f64 },
}

/// Exponent `e` in error bounds of order `(a^{-1/2} + b^{-1/2})^e`.
pub fn rate_exponent(setting: RateSetting) -> Result<f64> {
    let beta_check = |eta: f64, s: f64| {
        if !(eta > 0.0) {
            return Err(Error::Input(format!("eta must be positive, got {eta}")));
        }
        if !(0.0..=0.5).contains(&s) {
            return Err(Error::Input(format!("varsigma must lie in [0, 1/2], got {s}")));
        }
        Ok(())
    };
    match setting {
        RateSetting::RegressionL2 { r } | RateSetting::RegressionH { r } if !(r > 0.5) => {
            Err(Error::Input(format!("regression exponent r must exceed 1/2, got {r}")))
        }
        RateSetting::RegressionL2 { r } => Ok(2.0 * r / (2.0 * r + 1.0)),
        RateSetting::RegressionH { r } => Ok((2.0 * r - 1.0) / (2.0 * r + 1.0)),
        RateSetting::BetaRkhs { eta, varsigma } => {
            beta_check(eta, varsigma)?;
            Ok(eta / (eta + 1.0 - varsigma))
        }
        RateSetting::BetaPointwise { eta, varsigma } => {
            beta_check(eta, varsigma)?;
            Ok((eta + varsigma) / (eta + 1.0 - varsigma))
        }
    }
}

/// `k` geometrically spaced values from `a` to `b` inclusive.
pub fn geometric_grid(a: f64, b: f64, k: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > 0.0) || k == 0 {
        return Err(Error::Parameter(format!("geometric grid needs positive ends and k >= 1, got {a}:{b}:{k}")));
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    let ratio = (b / a).ln();
    Ok((0..k).map(|i| a * (ratio * i as f64 / (k - 1) as f64).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(e: f64) -> IndexFunction {
        IndexFunction::power(e).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!((eval_index(&p(0.5), 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(eval_index(&p(1.0), 0.3).unwrap(), 0.3);
        let pl = IndexFunction::power_log(2.0, 1.0).unwrap();
        let e1 = (-1f64).exp();
        assert!((eval_index(&pl, e1).unwrap() - (-2f64).exp()).abs() < 1e-15);
        assert_eq!(eval_index(&pl, 0.0).unwrap(), 0.0);
        assert!(eval_index(&p(1.0), 1.5).is_err());
        assert!(eval_index(&p(1.0), -0.1).is_err());
    }

    #[test]
    fn power_log_is_increasing_through_the_seam() {
        let pl = IndexFunction::power_log(1.5, 0.5).unwrap();
        let mut prev = 0.0;
        for i in 1..=1000 {
            let t = i as f64 / 1000.0;
            let v = pl.value(t);
            assert!(v > prev, "not increasing at {t}");
            prev = v;
        }
    }

    #[test]
    fn invert_examples() {
        let t = invert_monotone(|t| t.powf(1.5), 0.125, (0.0, 1.0), None).unwrap();
        assert!((t - 0.25).abs() < 1e-12);
        let t = invert_monotone(|t| t, 0.7, (0.0, 1.0), None).unwrap();
        assert!((t - 0.7).abs() < 1e-12);
        let t = invert_monotone(|t| t * t, 0.02, (0.0, 1.0), None).unwrap();
        assert!((t - 0.02f64.sqrt()).abs() < 1e-12);
        assert!((t - 0.141421).abs() < 1e-6);
        assert!(matches!(invert_monotone(|t| t, 2.0, (0.0, 1.0), None), Err(Error::Range { .. })));
        assert!(matches!(invert_monotone(|t| t, 0.0, (0.0, 1.0), None), Err(Error::Range { .. })));
    }

    #[test]
    fn lambda_mn_examples() {
        let l = lambda_mn(&p(1.0), 10_000, 10_000).unwrap();
        assert!((l - 0.02f64.sqrt()).abs() < 1e-12);
        let l = lambda_mn(&p(0.5), 4096, 4096).unwrap();
        assert!((l - (1.0f64 / 32.0).powf(2.0 / 3.0)).abs() < 1e-12);
        assert!((l - 0.099213).abs() < 1e-6);
        // the limit of infinite samples drives lambda to zero
        let l = lambda_mn(&p(0.5), usize::MAX, usize::MAX).unwrap();
        assert!(l < 1e-6);
        // a bracket beyond c is used when theta(c) is too small
        let l = lambda_mn(&p(1.0), 1, 1).unwrap();
        assert!((l - 2f64.sqrt()).abs() < 1e-12);
        assert!(lambda_mn(&p(1.0), 0, 5).is_err());
    }

    #[test]
    fn lambda_big_mn_examples() {
        let l = lambda_big_mn(&p(1.0), &p(0.5), 4096, 4096).unwrap();
        assert!((l - (1.0f64 / 32.0).powf(2.0 / 3.0)).abs() < 1e-12);
        let l = lambda_big_mn(&p(0.5), &p(0.5), 100, 100).unwrap();
        assert!((l - 0.2).abs() < 1e-12);
        // xi -> 0 exponent approaches the labeled schedule
        let a = lambda_big_mn(&p(1.0), &p(1e-9), 10_000, 10_000).unwrap();
        let b = lambda_mn(&p(1.0), 10_000, 10_000).unwrap();
        assert!((a - b).abs() < 1e-8);
        // non-monotone theta is a configuration error
        assert!(matches!(lambda_big_mn(&p(0.2), &p(1.5), 100, 100), Err(Error::Config(_))));
    }

    #[test]
    fn lambda_delta_examples() {
        let l = lambda_delta(&p(1.0), &p(1.0), &p(0.5), 10_000, 10_000, 10_000, 10_000).unwrap();
        assert!((l - 0.2).abs() < 1e-10, "{l}");
        let inner = lambda_big_mn(&p(1.0), &p(0.5), 10_000, 10_000).unwrap();
        assert!((inner - 0.02f64.powf(2.0 / 3.0)).abs() < 1e-12);

        let huge = usize::MAX;
        let a = lambda_delta(&p(1.0), &p(1.0), &p(0.5), 500, 300, huge, huge).unwrap();
        let b = lambda_mn(&p(1.0), 500, 300).unwrap();
        assert!((a - b).abs() < 1e-6);

        let a = lambda_delta(&p(1.0), &p(1.0), &p(0.5), 1, 1, 50, 50).unwrap();
        assert!(a >= lambda_mn(&p(1.0), 1, 1).unwrap());
    }

    #[test]
    fn rate_examples() {
        assert!((rate_exponent(RateSetting::RegressionL2 { r: 1.0 }).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((rate_exponent(RateSetting::RegressionH { r: 1.0 }).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(rate_exponent(RateSetting::BetaRkhs { eta: 1.0, varsigma: 0.0 }).unwrap(), 0.5);
        assert_eq!(rate_exponent(RateSetting::BetaPointwise { eta: 1.0, varsigma: 0.5 }).unwrap(), 1.0);
        assert!(rate_exponent(RateSetting::RegressionL2 { r: 0.5 }).is_err());
        assert!(rate_exponent(RateSetting::BetaRkhs { eta: 1.0, varsigma: 0.7 }).is_err());
        assert!(rate_exponent(RateSetting::BetaRkhs { eta: 0.0, varsigma: 0.2 }).is_err());
    }

    #[test]
    fn schedule_spec_validates_xi() {
        assert!(ScheduleSpec::new(p(1.0), p(1.0), p(0.5)).is_ok());
        assert!(ScheduleSpec::new(p(1.0), p(1.0), p(0.6)).is_err());
        let pl = IndexFunction::power_log(2.0, 1.0).unwrap();
        assert!(ScheduleSpec::new(p(1.0), p(1.0), pl).is_err());
    }

    #[test]
    fn parse_index_functions() {
        assert_eq!("power:1.0".parse::<IndexFunction>().unwrap(), p(1.0));
        assert_eq!("powerlog:2:1".parse::<IndexFunction>().unwrap(), IndexFunction::power_log(2.0, 1.0).unwrap());
        assert!("power:-1".parse::<IndexFunction>().is_err());
        assert!("powerlog:0.5:1".parse::<IndexFunction>().is_err());
        assert!("exp:1".parse::<IndexFunction>().is_err());
    }

    #[test]
    fn grid() {
        let g = geometric_grid(1e-3, 1.0, 4).unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[1] - 1e-2).abs() < 1e-15 && (g[3] - 1.0).abs() < 1e-15);
        assert!(geometric_grid(0.0, 1.0, 3).is_err());
    }
}
