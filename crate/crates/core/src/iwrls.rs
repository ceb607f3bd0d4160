//! Importance-weighted regularized least squares with spectral filters.
//!
//! For training inputs `x_1..x_n`, labels `y` and weights `B = diag(beta)`
//! the fit is `g_lambda(S^* B S) S^* B y`. It is computed through the
//! symmetric matrix `T = B^{1/2} K B^{1/2} / n`:
//!
//! ```text
//! f = (1/n) sum_i a_i K(., x_i),   a = B^{1/2} g_lambda(T) B^{1/2} y.
//! ```

use faer::Mat;

use crate::error::{Error, Result};
use crate::filters::{apply_to_vector, sym_eig, FilterSpec, SolveRoute, SpectralMode};
use crate::kernels::{gram_square, KernelSpec, SampleSet};
use crate::linalg;
use crate::representer::RepresenterFunction;
use crate::rn_estimator::{clipped_values, estimate_beta_with};

pub use crate::representer::rkhs_norm;

/// Where a weight vector came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSource {
    Exact,
    Uniform,
    Estimated { lambda_rn: f64, filter_rn: FilterSpec },
}

/// Nonnegative finite weights, one per training point.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
    source: WeightSource,
}

impl WeightVector {
    pub fn new(values: Vec<f64>, source: WeightSource) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Input(format!("weights must be finite and nonnegative, got {v}")));
        }
        Ok(WeightVector { values, source })
    }

    pub fn exact(values: Vec<f64>) -> Result<Self> {
        Self::new(values, WeightSource::Exact)
    }

    pub fn uniform(n: usize) -> Self {
        WeightVector { values: vec![1.0; n], source: WeightSource::Uniform }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> WeightSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub function: RepresenterFunction,
    pub lambda: f64,
    pub filter: FilterSpec,
    pub rkhs_norm: f64,
    pub weights: WeightVector,
}

/// Reusable pieces of a weighted problem: `K`, `B^{1/2}` and `T`.
struct WeightedSystem<'a> {
    train: &'a SampleSet,
    kernel: &'a KernelSpec,
    gram: Mat<f64>,
    root_w: Vec<f64>,
    t: Mat<f64>,
    rhs: Vec<f64>,
}

impl<'a> WeightedSystem<'a> {
    fn new(train: &'a SampleSet, weights: &WeightVector, kernel: &'a KernelSpec) -> Result<Self> {
        let y = train.require_labels()?;
        let n = train.len();
        if n == 0 {
            return Err(Error::Input("at least one labeled training point required".into()));
        }
        if weights.len() != n {
            return Err(Error::Input(format!("{} weights for {n} training points", weights.len())));
        }
        let gram = gram_square(kernel, train).into_entries();
        let root_w: Vec<f64> = weights.values.iter().map(|b| b.sqrt()).collect();
        let nf = n as f64;
        let t = Mat::from_fn(n, n, |i, j| root_w[i] * gram[(i, j)] * root_w[j] / nf);
        let rhs = root_w.iter().zip(y).map(|(b, yi)| b * yi).collect();
        Ok(WeightedSystem { train, kernel, gram, root_w, t, rhs })
    }

    fn finish(&self, v: Vec<f64>, weights: &WeightVector, filter: FilterSpec, lambda: f64) -> Result<FitResult> {
        let coeffs: Vec<f64> = v.iter().zip(&self.root_w).map(|(vi, b)| vi * b).collect();
        let n = coeffs.len() as f64;
        let quad = linalg::dot(&coeffs, &linalg::matvec(&self.gram, &coeffs));
        let rkhs_norm = quad.max(0.0).sqrt() / n;
        let function = RepresenterFunction::new(self.kernel.clone(), self.train.clone(), coeffs)?;
        Ok(FitResult { function, lambda, filter, rkhs_norm, weights: weights.clone() })
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("regularization parameter must be positive, got {lambda}")));
    }
    Ok(())
}

/// Weighted spectral-filter fit.
pub fn fit(
    train: &SampleSet,
    weights: &WeightVector,
    kernel: &KernelSpec,
    filter: FilterSpec,
    lambda: f64,
) -> Result<FitResult> {
    fit_with(train, weights, kernel, filter, lambda, SolveRoute::Auto)
}

pub fn fit_with(
    train: &SampleSet,
    weights: &WeightVector,
    kernel: &KernelSpec,
    filter: FilterSpec,
    lambda: f64,
    route: SolveRoute,
) -> Result<FitResult> {
    check_lambda(lambda)?;
    let sys = WeightedSystem::new(train, weights, kernel)?;
    let v = apply_to_vector(filter, lambda, &sys.t, SpectralMode::Filter, &sys.rhs, route)?;
    sys.finish(v, weights, filter, lambda)
}

/// Fits for every value of a `lambda` grid, sharing the Gram matrix and, on
/// the spectral route, a single eigendecomposition.
pub fn fit_path(
    train: &SampleSet,
    weights: &WeightVector,
    kernel: &KernelSpec,
    filter: FilterSpec,
    lambdas: &[f64],
    route: SolveRoute,
) -> Result<Vec<FitResult>> {
    for &l in lambdas {
        check_lambda(l)?;
    }
    let sys = WeightedSystem::new(train, weights, kernel)?;
    let spectral = match route {
        SolveRoute::Spectral => true,
        SolveRoute::Factored => false,
        SolveRoute::Auto => !filter.is_tikhonov_family(),
    };
    if spectral {
        let dec = sym_eig(&sys.t)?;
        lambdas
            .iter()
            .map(|&l| sys.finish(dec.apply_to(filter, l, SpectralMode::Filter, &sys.rhs)?, weights, filter, l))
            .collect()
    } else {
        lambdas
            .iter()
            .map(|&l| {
                let v = apply_to_vector(filter, l, &sys.t, SpectralMode::Filter, &sys.rhs, SolveRoute::Factored)?;
                sys.finish(v, weights, filter, l)
            })
            .collect()
    }
}

/// Two-step fit: estimate the ratio, clip it at 0 on the training inputs and
/// use the values as weights.
#[allow(clippy::too_many_arguments)]
pub fn fit_embedded(
    train: &SampleSet,
    rn_source: &SampleSet,
    rn_target: &SampleSet,
    kernel: &KernelSpec,
    filter_reg: FilterSpec,
    lambda_reg: f64,
    filter_rn: FilterSpec,
    lambda_rn: f64,
) -> Result<FitResult> {
    let weights = estimated_weights(train, rn_source, rn_target, kernel, filter_rn, lambda_rn)?;
    fit(train, &weights, kernel, filter_reg, lambda_reg)
}

/// Clipped ratio estimates at the training inputs.
pub fn estimated_weights(
    train: &SampleSet,
    rn_source: &SampleSet,
    rn_target: &SampleSet,
    kernel: &KernelSpec,
    filter_rn: FilterSpec,
    lambda_rn: f64,
) -> Result<WeightVector> {
    let est = estimate_beta_with(rn_source, rn_target, kernel, filter_rn, lambda_rn, SolveRoute::Auto)?;
    WeightVector::new(clipped_values(&est, train)?, WeightSource::Estimated { lambda_rn, filter_rn })
}
