use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::aggregation::GammaL;
use crate::error::{Error, Result};
use crate::filters::FilterSpec;
use crate::io::{parse_grid, parse_key_values};
use crate::source_theory::{geometric_grid, lambda_big_mn, lambda_delta, lambda_mn, IndexFunction, ScheduleSpec};

/// Sample sizes of one sweep point: unlabeled target `m`, labeled source
/// `n`, and the ratio-estimation samples `M` (target) and `N` (source).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SizeTuple {
    pub m: usize,
    pub n: usize,
    pub big_m: usize,
    pub big_n: usize,
}

impl fmt::Display for SizeTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.m, self.n, self.big_m, self.big_n)
    }
}

/// Parses `m,n,M,N; m,n,M,N; ...`.
pub fn parse_sizes(s: &str) -> Result<Vec<SizeTuple>> {
    let mut out = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let v: Vec<usize> = part
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad size tuple '{part}'"))))
            .collect::<Result<_>>()?;
        let [m, n, big_m, big_n] = v.as_slice() else {
            return Err(Error::Config(format!("size tuple '{part}' needs four entries m,n,M,N")));
        };
        if v.contains(&0) {
            return Err(Error::Config(format!("size tuple '{part}' has a zero entry")));
        }
        out.push(SizeTuple { m: *m, n: *n, big_m: *big_m, big_n: *big_n });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Fixed(f64),
    LambdaMn,
    LambdaBigMn,
    LambdaDelta,
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Fixed(l) => write!(f, "fixed:{l:?}"),
            Schedule::LambdaMn => f.write_str("lambda_mn"),
            Schedule::LambdaBigMn => f.write_str("lambda_MN"),
            Schedule::LambdaDelta => f.write_str("lambda_delta"),
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lambda_mn" => Ok(Schedule::LambdaMn),
            "lambda_MN" => Ok(Schedule::LambdaBigMn),
            "lambda_delta" => Ok(Schedule::LambdaDelta),
            other => match other.strip_prefix("fixed:").map(|v| v.trim().parse::<f64>()) {
                Some(Ok(l)) if l > 0.0 && l.is_finite() => Ok(Schedule::Fixed(l)),
                _ => Err(Error::Config(format!(
                    "bad schedule '{s}' (fixed:<lambda>, lambda_mn, lambda_MN or lambda_delta)"
                ))),
            },
        }
    }
}

/// Quantities a sweep can record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measurement {
    /// `||beta - beta_hat||_H`.
    BetaRkhs,
    /// Largest `|beta - beta_hat|` over the probe grid.
    BetaPointwise,
    /// Monte-Carlo `L2(rho_T)` error of the regression fit.
    RiskL2Mc,
    /// `||f_q - f_hat||_H`.
    FRkhs,
    /// Aggregated fit against the best single grid fit; rows
    /// `aggregate_L2`, `best_single_L2` and `aggregate_q_excess`.
    AggregateVsBest,
    /// Exact against unit weights, each at its best grid value; rows
    /// `exact_best_L2` and `unweighted_best_L2`.
    WeightingGain,
}

impl Measurement {
    pub const ALL: [Measurement; 6] = [
        Measurement::BetaRkhs,
        Measurement::BetaPointwise,
        Measurement::RiskL2Mc,
        Measurement::FRkhs,
        Measurement::AggregateVsBest,
        Measurement::WeightingGain,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Measurement::BetaRkhs => "beta_rkhs",
            Measurement::BetaPointwise => "beta_pointwise",
            Measurement::RiskL2Mc => "risk_L2_mc",
            Measurement::FRkhs => "f_rkhs",
            Measurement::AggregateVsBest => "aggregate_vs_best",
            Measurement::WeightingGain => "weighting_gain",
        }
    }

    /// Names of the CSV rows the measurement produces.
    pub fn row_names(&self) -> &'static [&'static str] {
        match self {
            Measurement::AggregateVsBest => &["aggregate_L2", "best_single_L2", "aggregate_q_excess"],
            Measurement::WeightingGain => &["exact_best_L2", "unweighted_best_L2"],
            Measurement::BetaRkhs => &["beta_rkhs"],
            Measurement::BetaPointwise => &["beta_pointwise"],
            Measurement::RiskL2Mc => &["risk_L2_mc"],
            Measurement::FRkhs => &["f_rkhs"],
        }
    }

    /// Whether the `lambda` column holds the ratio-estimation value.
    pub fn uses_rn_lambda(&self) -> bool {
        matches!(self, Measurement::BetaRkhs | Measurement::BetaPointwise | Measurement::AggregateVsBest)
    }
}

impl FromStr for Measurement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measurement::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| {
                let known: Vec<&str> = Measurement::ALL.iter().map(Measurement::name).collect();
                Error::Config(format!("unknown measurement '{s}' (known: {})", known.join(", ")))
            })
    }
}

/// Weights used by the regression measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Embedded,
    Exact,
    Uniform,
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "embedded" => Ok(WeightMode::Embedded),
            "exact" => Ok(WeightMode::Exact),
            "uniform" => Ok(WeightMode::Uniform),
            _ => Err(Error::Config(format!("bad weights '{s}' (embedded, exact or uniform)"))),
        }
    }
}

/// Declarative sweep description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Built-in problem name or path of a problem file.
    pub problem: String,
    pub noise: Option<f64>,
    pub sizes: Vec<SizeTuple>,
    pub trials: usize,
    pub base_seed: u64,
    pub filter_reg: FilterSpec,
    pub filter_rn: FilterSpec,
    pub schedule: Schedule,
    pub phi: IndexFunction,
    pub phi_beta: IndexFunction,
    pub xi: IndexFunction,
    pub measurements: Vec<Measurement>,
    pub n_mc: usize,
    /// Equispaced probe grid `(a, b, k)` for pointwise errors.
    pub probe_grid: (f64, f64, usize),
    /// Geometric grid `(a, b, k)` for aggregation and best-grid comparisons.
    pub lambda_grid: (f64, f64, usize),
    pub gamma_l: GammaL,
    pub weights: WeightMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let power = |e| IndexFunction::power(e).expect("positive exponent");
        ExperimentConfig {
            problem: "shift1d-mild".into(),
            noise: None,
            sizes: Vec::new(),
            trials: 1,
            base_seed: 0,
            filter_reg: FilterSpec::Tikhonov,
            filter_rn: FilterSpec::IteratedTikhonov { order: 3 },
            schedule: Schedule::LambdaMn,
            phi: power(1.0),
            phi_beta: power(1.0),
            xi: power(0.5),
            measurements: Vec::new(),
            n_mc: 10_000,
            probe_grid: (-1.0, 1.0, 11),
            lambda_grid: (1e-8, 1.0, 12),
            gamma_l: GammaL::Auto,
            weights: WeightMode::Embedded,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let cfg_num = |k: &str, v: &str| -> Result<u64> {
            v.parse::<u64>().map_err(|_| Error::Config(format!("bad integer for {k}: '{v}'")))
        };
        for (k, v) in parse_key_values(text)? {
            match k.as_str() {
                "problem" => cfg.problem = v,
                "noise" => {
                    cfg.noise = Some(v.parse::<f64>().map_err(|_| Error::Config(format!("bad noise '{v}'")))?)
                }
                "sizes" => cfg.sizes = parse_sizes(&v)?,
                "trials" => cfg.trials = cfg_num(&k, &v)? as usize,
                "base_seed" => cfg.base_seed = cfg_num(&k, &v)?,
                "filter_reg" => cfg.filter_reg = v.parse()?,
                "filter_rn" => cfg.filter_rn = v.parse()?,
                "schedule" => cfg.schedule = v.parse()?,
                "phi" => cfg.phi = v.parse()?,
                "phi_beta" => cfg.phi_beta = v.parse()?,
                "xi" => cfg.xi = v.parse()?,
                "measurements" => {
                    cfg.measurements = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::parse)
                        .collect::<Result<_>>()?
                }
                "n_mc" => cfg.n_mc = cfg_num(&k, &v)? as usize,
                "probe_grid" => cfg.probe_grid = parse_grid(&v)?,
                "lambda_grid" => cfg.lambda_grid = parse_grid(&v)?,
                "gamma_l" => cfg.gamma_l = v.parse()?,
                "weights" => cfg.weights = v.parse()?,
                other => return Err(Error::Config(format!("unknown config key '{other}'"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("sizes must list at least one m,n,M,N tuple".into()));
        }
        if self.measurements.iter().any(|m| {
            matches!(m, Measurement::RiskL2Mc | Measurement::AggregateVsBest | Measurement::WeightingGain)
        }) && self.n_mc < 1000
        {
            return Err(Error::Config(format!("n_mc must be at least 1000 for risk measurements, got {}", self.n_mc)));
        }
        let (a, b, _) = self.lambda_grid;
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Config("lambda_grid ends must be positive".into()));
        }
        ScheduleSpec::new(self.phi, self.phi_beta, self.xi)?;
        Ok(())
    }

    pub fn lambda_grid_values(&self) -> Result<Vec<f64>> {
        let (a, b, k) = self.lambda_grid;
        geometric_grid(a, b, k)
    }

    /// Index functions with their domain set to `c = kappa0^2`.
    pub fn index_functions(&self, kappa0: f64) -> Result<(IndexFunction, IndexFunction, IndexFunction)> {
        let c = kappa0 * kappa0;
        Ok((self.phi.with_domain(c)?, self.phi_beta.with_domain(c)?, self.xi.with_domain(c)?))
    }

    /// `(lambda_reg, lambda_rn)` for one size tuple.
    ///
    /// The ratio estimate always follows `lambda_MN` unless the schedule is
    /// fixed; the regression follows `lambda_delta` under that schedule and
    /// `lambda_mn` otherwise.
    pub fn lambdas(&self, s: SizeTuple, kappa0: f64) -> Result<(f64, f64)> {
        if let Schedule::Fixed(l) = self.schedule {
            return Ok((l, l));
        }
        let (phi, phi_beta, xi) = self.index_functions(kappa0)?;
        let rn = lambda_big_mn(&phi_beta, &xi, s.big_m, s.big_n)?;
        let reg = match self.schedule {
            Schedule::LambdaDelta => lambda_delta(&phi, &phi_beta, &xi, s.m, s.n, s.big_m, s.big_n)?,
            _ => lambda_mn(&phi, s.m, s.n)?,
        };
        Ok((reg, rn))
    }
}
