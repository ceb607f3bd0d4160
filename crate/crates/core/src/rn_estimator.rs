//! Regularized estimation of the density ratio `beta = d rho_T / d rho_S`.
//!
//! With source sample `x_1..x_N` and target sample `x'_1..x'_M` the estimate
//! is `g_lambda(T_N) h` where `T_N` is the empirical source covariance
//! operator and `h = (1/M) sum_j K(., x'_j)` the empirical target mean
//! embedding. Splitting `g(t) = g(0) + t psi(t)` gives the finite form
//!
//! ```text
//! beta_hat = g(0) h + (1/N) sum_i q_i K(., x_i),   q = psi(K/N) h_N,
//! ```
//!
//! with `h_N[i] = h(x_i)`.

use faer::Mat;

use crate::error::{Error, Result};
use crate::filters::{apply_to_vector, FilterSpec, SolveRoute, SpectralMode};
use crate::kernels::{gram_square, kernel_mean, KernelSpec, Point, SampleSet};
use crate::linalg;
use crate::representer::RepresenterFunction;

pub use crate::representer::{evaluate, rkhs_error};

/// An estimated ratio with the clipping applied before use as weights.
#[derive(Debug, Clone)]
pub struct RatioEstimate {
    pub function: RepresenterFunction,
    pub lambda: f64,
    pub filter: FilterSpec,
    pub clip_floor: f64,
    pub clip_cap: Option<f64>,
}

impl RatioEstimate {
    pub fn with_clip(mut self, floor: f64, cap: Option<f64>) -> Result<Self> {
        if !(floor >= 0.0) || cap.is_some_and(|c| !(c >= floor)) {
            return Err(Error::Parameter(format!("clip bounds must satisfy 0 <= floor <= cap, got {floor}, {cap:?}")));
        }
        self.clip_floor = floor;
        self.clip_cap = cap;
        Ok(self)
    }

    fn clip(&self, v: f64) -> f64 {
        let v = v.max(self.clip_floor);
        self.clip_cap.map_or(v, |c| v.min(c))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("regularization parameter must be positive, got {lambda}")));
    }
    Ok(())
}

fn check_samples(source: &SampleSet, target: &SampleSet) -> Result<()> {
    if source.is_empty() || target.is_empty() {
        return Err(Error::Input("ratio estimation needs non-empty source and target samples".into()));
    }
    if source.dim() != target.dim() {
        return Err(Error::Input(format!("dimension mismatch: {} vs {}", source.dim(), target.dim())));
    }
    Ok(())
}

fn scaled_gram(kernel: &KernelSpec, points: &SampleSet) -> Mat<f64> {
    let mut k = gram_square(kernel, points).into_entries();
    let n = points.len() as f64;
    for j in 0..k.ncols() {
        for i in 0..k.nrows() {
            k[(i, j)] /= n;
        }
    }
    k
}

/// `g_lambda(T_N) h` for a general filter, routed automatically (Cholesky for
/// the Tikhonov family, eigendecomposition otherwise).
pub fn estimate_beta(
    source: &SampleSet,
    target: &SampleSet,
    kernel: &KernelSpec,
    filter: FilterSpec,
    lambda: f64,
) -> Result<RatioEstimate> {
    estimate_beta_with(source, target, kernel, filter, lambda, SolveRoute::Auto)
}

pub fn estimate_beta_with(
    source: &SampleSet,
    target: &SampleSet,
    kernel: &KernelSpec,
    filter: FilterSpec,
    lambda: f64,
    route: SolveRoute,
) -> Result<RatioEstimate> {
    check_lambda(lambda)?;
    check_samples(source, target)?;
    let h = kernel_mean(kernel, source, target);
    let t = scaled_gram(kernel, source);
    let q = apply_to_vector(filter, lambda, &t, SpectralMode::ShiftedQuotient, &h, route)?;
    let g0 = filter.filter_unchecked(lambda, 0.0);
    let function = RepresenterFunction::new(kernel.clone(), source.clone(), q)?.with_target_block(target.clone(), g0)?;
    Ok(RatioEstimate { function, lambda, filter, clip_floor: 0.0, clip_cap: None })
}

/// Tikhonov estimate in the closed form
/// `beta_hat = (1/lambda) [h - (1/N) sum_i c_i K(., x_i)]`,
/// `c = (K/N + lambda I)^{-1} h_N`, solved by LU.
pub fn kulsif_closed_form(
    source: &SampleSet,
    target: &SampleSet,
    kernel: &KernelSpec,
    lambda: f64,
) -> Result<RatioEstimate> {
    check_lambda(lambda)?;
    check_samples(source, target)?;
    let h = kernel_mean(kernel, source, target);
    let mut a = scaled_gram(kernel, source);
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    let c = linalg::lu_solve(&a, &h);
    let coeffs = c.iter().map(|ci| -ci / lambda).collect();
    let function =
        RepresenterFunction::new(kernel.clone(), source.clone(), coeffs)?.with_target_block(target.clone(), 1.0 / lambda)?;
    Ok(RatioEstimate { function, lambda, filter: FilterSpec::Tikhonov, clip_floor: 0.0, clip_cap: None })
}

/// Estimated values at `points`, clamped to `[clip_floor, clip_cap]`.
pub fn clipped_values(est: &RatioEstimate, points: &SampleSet) -> Result<Vec<f64>> {
    Ok(est.function.values(points)?.into_iter().map(|v| est.clip(v)).collect())
}

/// Precomputed factorization for repeated Christoffel evaluations at one
/// `lambda`.
pub struct ChristoffelProfile<'a> {
    source: &'a SampleSet,
    kernel: &'a KernelSpec,
    lambda: f64,
    llt: faer::linalg::solvers::Llt<f64>,
}

impl<'a> ChristoffelProfile<'a> {
    pub fn new(source: &'a SampleSet, kernel: &'a KernelSpec, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if source.is_empty() {
            return Err(Error::Input("empty source sample".into()));
        }
        let llt = linalg::shifted_cholesky(&scaled_gram(kernel, source), lambda)?;
        Ok(ChristoffelProfile { source, kernel, lambda, llt })
    }

    /// `(1/lambda) [K(x,x) - k_x^T (lambda I + K/N)^{-1} k_x / N]`.
    pub fn at(&self, x: &[f64]) -> f64 {
        let kx: Vec<f64> = self.source.iter().map(|a| self.kernel.eval(a, x)).collect();
        let sol = linalg::llt_solve(&self.llt, &kx);
        let quad = linalg::dot(&kx, &sol) / self.source.len() as f64;
        (self.kernel.eval(x, x) - quad) / self.lambda
    }
}

/// Empirical regularized Christoffel function at `x`.
pub fn christoffel(source: &SampleSet, kernel: &KernelSpec, lambda: f64, x: &Point) -> Result<f64> {
    if !source.is_empty() && x.dim() != source.dim() {
        return Err(Error::Input(format!("dimension mismatch: {} vs {}", x.dim(), source.dim())));
    }
    Ok(ChristoffelProfile::new(source, kernel, lambda)?.at(x.coords()))
}

/// Largest empirical Christoffel value over a probe set, a lower bound for
/// `sup_x C_lambda(x)`.
pub fn n_infinity(source: &SampleSet, kernel: &KernelSpec, lambda: f64, probes: &SampleSet) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::Input("empty probe set".into()));
    }
    if probes.dim() != source.dim() {
        return Err(Error::Input(format!("dimension mismatch: {} vs {}", probes.dim(), source.dim())));
    }
    let profile = ChristoffelProfile::new(source, kernel, lambda)?;
    Ok(probes.iter().map(|x| profile.at(x)).fold(f64::NEG_INFINITY, f64::max))
}

/// Eigenvalues of `K/N`, clipped at 0, nonincreasing.
pub fn covariance_spectrum(source: &SampleSet, kernel: &KernelSpec) -> Result<Vec<f64>> {
    Ok(linalg::sym_eigenvalues(&scaled_gram(kernel, source))?.into_iter().map(|v| v.max(0.0)).collect())
}

fn effective_dimension_from(spectrum: &[f64], lambda: f64) -> f64 {
    spectrum.iter().map(|mu| mu / (lambda + mu)).sum()
}

/// Empirical effective dimension `trace[(lambda I + K/N)^{-1} K/N]`.
pub fn effective_dimension(source: &SampleSet, kernel: &KernelSpec, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(effective_dimension_from(&covariance_spectrum(source, kernel)?, lambda))
}

/// Solution of `N_hat(lambda) / lambda = N` by bisection in `log lambda`.
///
/// The left side decreases strictly from infinity to 0, so the root is
/// unique whenever the Gram matrix is nonzero.
pub fn lambda_star(source: &SampleSet, kernel: &KernelSpec) -> Result<f64> {
    let spectrum = covariance_spectrum(source, kernel)?;
    if spectrum.first().is_none_or(|&m| m <= 0.0) {
        return Err(Error::Degenerate("zero covariance spectrum".into()));
    }
    let n = source.len() as f64;
    let excess = |u: f64| {
        let l = u.exp();
        effective_dimension_from(&spectrum, l) / l - n
    };
    let (mut lo, mut hi) = (-60.0f64, 20.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
