use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::config::SizeTuple;
use super::sweep::ResultRow;
use crate::error::{Error, Result};
use crate::source_theory::{rate_exponent, size_functional, IndexFunction, RateSetting};

/// Which size pair enters the size functional `a^{-1/2} + b^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Independent {
    /// Regression sizes `(m, n)`.
    #[serde(rename = "mn")]
    Mn,
    /// Ratio-estimation sizes `(M, N)`.
    #[serde(rename = "MN")]
    BigMn,
}

impl Independent {
    pub fn functional(&self, s: SizeTuple) -> f64 {
        match self {
            Independent::Mn => size_functional(s.m, s.n),
            Independent::BigMn => size_functional(s.big_m, s.big_n),
        }
    }

    /// Natural axis for a measure: ratio errors against `(M, N)`, the rest
    /// against `(m, n)`.
    pub fn for_measure(measure: &str) -> Self {
        if measure.starts_with("beta_") {
            Independent::BigMn
        } else {
            Independent::Mn
        }
    }
}

impl fmt::Display for Independent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Independent::Mn => "mn",
            Independent::BigMn => "MN",
        })
    }
}

impl FromStr for Independent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mn" => Ok(Independent::Mn),
            "MN" => Ok(Independent::BigMn),
            _ => Err(Error::Config(format!("bad independent variable '{s}' (mn or MN)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    pub sizes: (usize, usize, usize, usize),
    pub functional: f64,
    pub median: f64,
    pub trials: usize,
}

/// Least-squares line through `(log s, log median)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub measure: String,
    pub independent: Independent,
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; `NaN` with fewer than three points.
    pub stderr: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Per-size medians of `measure`, smallest samples (largest functional)
/// first.
pub fn medians(rows: &[ResultRow], measure: &str, independent: Independent) -> Vec<RatePoint> {
    let mut groups: BTreeMap<SizeTuple, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.measure == measure) {
        groups.entry(r.sizes()).or_default().push(r.value);
    }
    let mut points: Vec<RatePoint> = groups
        .into_iter()
        .map(|(s, mut v)| RatePoint {
            sizes: (s.m, s.n, s.big_m, s.big_n),
            functional: independent.functional(s),
            trials: v.len(),
            median: median(&mut v),
        })
        .collect();
    points.sort_by(|a, b| b.functional.total_cmp(&a.functional));
    points
}

/// Fits `log median = intercept + slope * log s` over the size tuples
/// present for `measure`.
pub fn fit_rate(rows: &[ResultRow], measure: &str, independent: Independent) -> Result<RateFit> {
    let points = medians(rows, measure, independent);
    if points.len() < 3 {
        return Err(Error::Input(format!(
            "measure '{measure}' has {} size tuple(s); a slope needs at least three",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.median > 0.0)) {
        return Err(Error::Input(format!("measure '{measure}' has non-positive median {} at {:?}", p.median, p.sizes)));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.functional.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.median.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Input(format!("measure '{measure}': all size tuples share the same {independent} functional")));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if xs.len() > 2 {
        let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ssr / (k - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(RateFit { measure: measure.to_string(), independent, points, slope, intercept, stderr })
}

/// Exponent predicted for `measure` under `phi`, `phi_beta`, `xi`, or `None`
/// when the measure has no associated rate.
pub fn theoretical_exponent(
    measure: &str,
    phi: &IndexFunction,
    phi_beta: &IndexFunction,
    xi: &IndexFunction,
) -> Option<f64> {
    let r = phi.leading_exponent() + 0.5;
    let (eta, varsigma) = (phi_beta.leading_exponent(), xi.leading_exponent());
    let setting = match measure {
        "beta_rkhs" => RateSetting::BetaRkhs { eta, varsigma },
        "beta_pointwise" => RateSetting::BetaPointwise { eta, varsigma },
        "risk_L2_mc" => RateSetting::RegressionL2 { r },
        "f_rkhs" => RateSetting::RegressionH { r },
        _ => return None,
    };
    rate_exponent(setting).ok()
}
