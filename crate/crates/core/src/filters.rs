//! Spectral regularization filters `g_lambda` and their application to
//! symmetric positive semidefinite matrices.
//!
//! Every filter is described by three scalar functions of the spectrum:
//!
//! * the filter itself, `g(t)`, approximating `1/t`;
//! * the residual `r(t) = 1 - t g(t)`;
//! * the shifted quotient `psi(t) = (g(t) - g(0)) / t`, which lets a filter be
//!   applied to vectors outside the range of a sampling operator
//!   (`g(T) h = g(0) h + T psi(T) h`).
//!
//! Matrices can be filtered through an eigendecomposition (any filter) or,
//! for the Tikhonov family, through a single Cholesky factorization of
//! `lambda I + A` and `order` triangular solves. Both routes compute the same
//! matrix function.

use std::fmt;
use std::str::FromStr;

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg;

/// Positive constants bounding a filter family uniformly in `lambda`:
/// `|1 - t g(t)| <= gamma0`, `sqrt(t) |g(t)| <= gamma_half_neg / sqrt(lambda)`,
/// `|g(t)| <= gamma_neg1 / lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConstants {
    pub gamma0: f64,
    pub gamma_half_neg: f64,
    pub gamma_neg1: f64,
}

/// Regularization family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterSpec {
    /// `g(t) = 1 / (lambda + t)`.
    Tikhonov,
    /// `order` steps of Tikhonov refitting:
    /// `g(t) = (1 - (lambda / (lambda + t))^order) / t`.
    IteratedTikhonov { order: u32 },
    /// `g(t) = 1/t` for `t >= lambda`, zero below.
    SpectralCutoff,
}

/// Which scalar function of the spectrum to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralMode {
    Filter,
    Residual,
    ShiftedQuotient,
}

/// How a matrix function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveRoute {
    /// Dense symmetric eigendecomposition.
    Spectral,
    /// Cholesky factorization of `lambda I + A`; Tikhonov family only.
    Factored,
    /// `Factored` for the Tikhonov family, `Spectral` otherwise.
    #[default]
    Auto,
}

impl FilterSpec {
    pub fn iterated(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::Parameter("iterated Tikhonov order must be at least 1".into()));
        }
        Ok(FilterSpec::IteratedTikhonov { order })
    }

    pub fn constants(&self) -> FilterConstants {
        match *self {
            FilterSpec::Tikhonov => FilterConstants { gamma0: 1.0, gamma_half_neg: 0.5, gamma_neg1: 1.0 },
            FilterSpec::IteratedTikhonov { order } => {
                let nu = order as f64;
                FilterConstants { gamma0: 1.0, gamma_half_neg: nu.sqrt(), gamma_neg1: nu }
            }
            FilterSpec::SpectralCutoff => FilterConstants { gamma0: 1.0, gamma_half_neg: 1.0, gamma_neg1: 1.0 },
        }
    }

    /// Maximal qualification; infinite for spectral cut-off.
    pub fn qualification(&self) -> f64 {
        match *self {
            FilterSpec::Tikhonov => 1.0,
            FilterSpec::IteratedTikhonov { order } => order as f64,
            FilterSpec::SpectralCutoff => f64::INFINITY,
        }
    }

    /// Declared constant `gamma_nu` in `sup t^nu |r(t)| <= gamma_nu lambda^nu`.
    ///
    /// All three families satisfy the bound with constant 1 for every `nu` up
    /// to their qualification; beyond it no constant works, which
    /// [`verify_qualification`] detects on a grid.
    pub fn gamma_nu(&self, _nu: f64) -> f64 {
        1.0
    }

    /// Member of the Tikhonov family (Tikhonov or iterated Tikhonov).
    pub fn is_tikhonov_family(&self) -> bool {
        !matches!(self, FilterSpec::SpectralCutoff)
    }

    fn steps(&self) -> u32 {
        match *self {
            FilterSpec::Tikhonov => 1,
            FilterSpec::IteratedTikhonov { order } => order,
            FilterSpec::SpectralCutoff => 0,
        }
    }

    pub(crate) fn filter_unchecked(&self, lambda: f64, t: f64) -> f64 {
        match *self {
            FilterSpec::SpectralCutoff => {
                if t >= lambda {
                    1.0 / t
                } else {
                    0.0
                }
            }
            _ => {
                // g(t) = (1/lambda) sum_{k=1}^{nu} r^k with r = lambda / (lambda + t);
                // avoids the cancellation in 1 - r^nu for small t.
                let r = lambda / (lambda + t);
                let mut term = 1.0;
                let mut sum = 0.0;
                for _ in 0..self.steps() {
                    term *= r;
                    sum += term;
                }
                sum / lambda
            }
        }
    }

    pub(crate) fn residual_unchecked(&self, lambda: f64, t: f64) -> f64 {
        match *self {
            FilterSpec::SpectralCutoff => {
                if t < lambda {
                    1.0
                } else {
                    0.0
                }
            }
            _ => (lambda / (lambda + t)).powi(self.steps() as i32),
        }
    }

    pub(crate) fn shifted_quotient_unchecked(&self, lambda: f64, t: f64) -> f64 {
        match *self {
            FilterSpec::SpectralCutoff => {
                if t >= lambda && t > 0.0 {
                    1.0 / (t * t)
                } else {
                    0.0
                }
            }
            _ => {
                // psi(t) = -(1 / (lambda (lambda + t))) sum_{k=1}^{nu} sum_{j<k} r^j,
                // which equals -nu(nu+1)/(2 lambda^2) at t = 0.
                let r = lambda / (lambda + t);
                let mut partial = 0.0;
                let mut power = 1.0;
                let mut total = 0.0;
                for _ in 0..self.steps() {
                    partial += power;
                    power *= r;
                    total += partial;
                }
                -total / (lambda * (lambda + t))
            }
        }
    }

    pub(crate) fn scalar(&self, mode: SpectralMode, lambda: f64, t: f64) -> f64 {
        match mode {
            SpectralMode::Filter => self.filter_unchecked(lambda, t),
            SpectralMode::Residual => self.residual_unchecked(lambda, t),
            SpectralMode::ShiftedQuotient => self.shifted_quotient_unchecked(lambda, t),
        }
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterSpec::Tikhonov => write!(f, "tikhonov"),
            FilterSpec::IteratedTikhonov { order } => write!(f, "itik:{order}"),
            FilterSpec::SpectralCutoff => write!(f, "cutoff"),
        }
    }
}

impl FromStr for FilterSpec {
    type Err = Error;

    /// Accepts `tikhonov`, `itik:<nu>` and `cutoff`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "tikhonov" => Ok(FilterSpec::Tikhonov),
            "cutoff" => Ok(FilterSpec::SpectralCutoff),
            _ => {
                let order = s
                    .strip_prefix("itik:")
                    .and_then(|o| o.trim().parse::<u32>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown filter '{s}' (tikhonov, itik:<nu>, cutoff)")))?;
                FilterSpec::iterated(order).map_err(|e| Error::Config(e.to_string()))
            }
        }
    }
}

fn check_args(lambda: f64, t: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("spectral argument must be nonnegative, got {t}")));
    }
    Ok(())
}

/// `g_lambda(t)`; iterated Tikhonov returns its limit `nu / lambda` at `t = 0`.
pub fn filter_eval(f: FilterSpec, lambda: f64, t: f64) -> Result<f64> {
    check_args(lambda, t)?;
    Ok(f.filter_unchecked(lambda, t))
}

/// `r_lambda(t) = 1 - t g_lambda(t)`.
pub fn residual_eval(f: FilterSpec, lambda: f64, t: f64) -> Result<f64> {
    check_args(lambda, t)?;
    Ok(f.residual_unchecked(lambda, t))
}

/// `(g_lambda(t) - g_lambda(0)) / t`, with its limit `g_lambda'(0)` at zero.
pub fn shifted_quotient_eval(f: FilterSpec, lambda: f64, t: f64) -> Result<f64> {
    check_args(lambda, t)?;
    Ok(f.shifted_quotient_unchecked(lambda, t))
}

/// Grid check of the qualification inequality
/// `t^nu |r_lambda(t)| <= gamma_nu lambda^nu` over all grid pairs.
pub fn verify_qualification(f: FilterSpec, nu: f64, lambda_grid: &[f64], t_grid: &[f64]) -> bool {
    let gamma = f.gamma_nu(nu);
    lambda_grid.iter().all(|&lambda| {
        let bound = gamma * lambda.powf(nu);
        t_grid.iter().all(|&t| t.powf(nu) * f.residual_unchecked(lambda, t).abs() <= bound * (1.0 + 1e-12))
    })
}

/// Eigendecomposition `A = V diag(values) V^T` with nonincreasing values.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Mat<f64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn spectrum(&self, f: FilterSpec, lambda: f64, mode: SpectralMode) -> Vec<f64> {
        self.eigenvalues.iter().map(|&e| f.scalar(mode, lambda, e.max(0.0))).collect()
    }

    /// `V diag(h(values)) V^T`; negative eigenvalues are clipped to 0 first.
    pub fn apply(&self, f: FilterSpec, lambda: f64, mode: SpectralMode) -> Result<Mat<f64>> {
        check_args(lambda, 0.0)?;
        let h = self.spectrum(f, lambda, mode);
        let v = &self.eigenvectors;
        let n = self.dim();
        let scaled = Mat::from_fn(n, n, |i, k| v[(i, k)] * h[k]);
        Ok(&scaled * v.transpose())
    }

    /// `V diag(h(values)) V^T x` without forming the matrix.
    pub fn apply_to(&self, f: FilterSpec, lambda: f64, mode: SpectralMode, x: &[f64]) -> Result<Vec<f64>> {
        check_args(lambda, 0.0)?;
        if x.len() != self.dim() {
            return Err(Error::Input(format!("vector of length {} for a {}-dimensional operator", x.len(), self.dim())));
        }
        let h = self.spectrum(f, lambda, mode);
        let v = &self.eigenvectors;
        let mut coeffs = linalg::to_vec(&(v.transpose() * linalg::col(x)));
        for (c, hk) in coeffs.iter_mut().zip(&h) {
            *c *= hk;
        }
        Ok(linalg::matvec(v, &coeffs))
    }
}

fn check_symmetric(a: &Mat<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Input(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
    }
    let scale = linalg::frobenius(a);
    let n = a.nrows();
    for j in 0..n {
        for i in 0..j {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::Input(format!("matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Symmetric eigendecomposition with a symmetry check (relative `1e-10`).
pub fn sym_eig(a: &Mat<f64>) -> Result<SpectralDecomposition> {
    check_symmetric(a)?;
    let (eigenvalues, eigenvectors) = linalg::sym_eigen(a)?;
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// `V diag(h_lambda(values)) V^T` for the selected scalar function.
pub fn apply_spectral(f: FilterSpec, lambda: f64, a: &Mat<f64>, mode: SpectralMode) -> Result<Mat<f64>> {
    check_args(lambda, 0.0)?;
    sym_eig(a)?.apply(f, lambda, mode)
}

/// `h_lambda(A) x` through one Cholesky factorization of `lambda I + A`.
///
/// The filter is built by the Tikhonov refitting recursion
/// `x_{l+1} = (lambda + A)^{-1} (x + lambda x_l)`; the shifted quotient
/// follows `p_{l+1} = (lambda + A)^{-1} (lambda p_l - (l+1)/lambda x)`.
pub fn factored_apply(f: FilterSpec, lambda: f64, a: &Mat<f64>, mode: SpectralMode, x: &[f64]) -> Result<Vec<f64>> {
    check_args(lambda, 0.0)?;
    if !f.is_tikhonov_family() {
        return Err(Error::Parameter(format!("factored route not available for filter {f}")));
    }
    if a.nrows() != x.len() {
        return Err(Error::Input(format!("vector of length {} for a {}-dimensional operator", x.len(), a.nrows())));
    }
    let llt = linalg::shifted_cholesky(a, lambda)?;
    let steps = f.steps();
    let mut acc = vec![0.0; x.len()];
    match mode {
        SpectralMode::Filter | SpectralMode::Residual => {
            for _ in 0..steps {
                let rhs: Vec<f64> = x.iter().zip(&acc).map(|(xi, ai)| xi + lambda * ai).collect();
                acc = linalg::llt_solve(&llt, &rhs);
            }
            if mode == SpectralMode::Residual {
                let ag = linalg::matvec(a, &acc);
                acc = x.iter().zip(&ag).map(|(xi, gi)| xi - gi).collect();
            }
        }
        SpectralMode::ShiftedQuotient => {
            for l in 0..steps {
                let c = (l + 1) as f64 / lambda;
                let rhs: Vec<f64> = x.iter().zip(&acc).map(|(xi, pi)| lambda * pi - c * xi).collect();
                acc = linalg::llt_solve(&llt, &rhs);
            }
        }
    }
    Ok(acc)
}

/// `h_lambda(A) x` via the chosen route.
pub fn apply_to_vector(
    f: FilterSpec,
    lambda: f64,
    a: &Mat<f64>,
    mode: SpectralMode,
    x: &[f64],
    route: SolveRoute,
) -> Result<Vec<f64>> {
    let factored = match route {
        SolveRoute::Spectral => false,
        SolveRoute::Factored => true,
        SolveRoute::Auto => f.is_tikhonov_family(),
    };
    if factored {
        factored_apply(f, lambda, a, mode, x)
    } else {
        sym_eig(a)?.apply_to(f, lambda, mode, x)
    }
}
