//! Parameter choice by linear aggregation of fits over a `lambda` grid.
//!
//! The coefficients solve `G c = g` with the empirical moments
//!
//! ```text
//! G[k][u] = (1/m) sum_j f_k(x'_j) f_u(x'_j)          (unlabeled target sample)
//! g[k]    = (1/n) sum_i beta(x_i) y_i f_k(x_i)        (weighted labeled sample)
//! ```
//!
//! which stand in for the target inner products `<f_k, f_u>` and `<f_q, f_k>`.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::{FilterSpec, SolveRoute};
use crate::iwrls::{fit_path, FitResult, WeightVector};
use crate::kernels::{KernelSpec, SampleSet};
use crate::linalg;
use crate::representer::{linear_combination, RepresenterFunction};

const CONDITION_LIMIT: f64 = 1e12;

/// Norm threshold for candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaL {
    Value(f64),
    /// 10 times the largest norm among the three most regularized fits.
    Auto,
}

impl std::str::FromStr for GammaL {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(GammaL::Auto),
            v => v
                .parse::<f64>()
                .ok()
                .filter(|g| *g >= 0.0)
                .map(GammaL::Value)
                .ok_or_else(|| Error::Config(format!("bad gamma_l '{s}' (nonnegative number or auto)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CandidateSet {
    /// Retained fits in grid order.
    pub candidates: Vec<FitResult>,
    pub gamma_l: f64,
    /// Grid indices removed by the threshold.
    pub discarded: Vec<usize>,
    /// `(lambda, norm)` of every grid fit, retained or not.
    pub all: Vec<(f64, f64)>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Wraps already computed fits, applying the threshold.
    pub fn from_fits(fits: Vec<FitResult>, gamma_l: GammaL) -> Result<Self> {
        if fits.is_empty() {
            return Err(Error::Config("empty lambda grid".into()));
        }
        let gamma = match gamma_l {
            GammaL::Value(g) => g,
            GammaL::Auto => {
                let mut by_lambda: Vec<&FitResult> = fits.iter().collect();
                by_lambda.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
                10.0 * by_lambda.iter().take(3).map(|f| f.rkhs_norm).fold(0.0, f64::max)
            }
        };
        let all: Vec<(f64, f64)> = fits.iter().map(|f| (f.lambda, f.rkhs_norm)).collect();
        let mut candidates = Vec::new();
        let mut discarded = Vec::new();
        for (k, f) in fits.into_iter().enumerate() {
            if f.rkhs_norm <= gamma {
                candidates.push(f);
            } else {
                discarded.push(k);
            }
        }
        if candidates.is_empty() {
            let norms: Vec<String> = all.iter().map(|(l, n)| format!("{l:e}:{n:.4e}")).collect();
            return Err(Error::Config(format!(
                "all candidates exceed gamma_l = {gamma}; lambda:norm = [{}]",
                norms.join(", ")
            )));
        }
        Ok(CandidateSet { candidates, gamma_l: gamma, discarded, all })
    }
}

/// Fits every grid value and applies the norm threshold.
pub fn build_candidates(
    train: &SampleSet,
    weights: &WeightVector,
    kernel: &KernelSpec,
    filter: FilterSpec,
    lambda_grid: &[f64],
    gamma_l: GammaL,
) -> Result<CandidateSet> {
    if lambda_grid.is_empty() {
        return Err(Error::Config("empty lambda grid".into()));
    }
    let fits = fit_path(train, weights, kernel, filter, lambda_grid, SolveRoute::Auto)?;
    CandidateSet::from_fits(fits, gamma_l)
}

fn candidate_values(cands: &CandidateSet, points: &SampleSet) -> Result<Vec<Vec<f64>>> {
    cands.candidates.iter().map(|c| c.function.values(points)).collect()
}

/// Empirical target Gram matrix of the candidates.
pub fn gram_tilde(cands: &CandidateSet, target_unlabeled: &SampleSet) -> Result<Mat<f64>> {
    if target_unlabeled.is_empty() {
        return Err(Error::Input("unlabeled target sample is empty".into()));
    }
    let vals = candidate_values(cands, target_unlabeled)?;
    let m = target_unlabeled.len() as f64;
    let l = vals.len();
    let mut g = Mat::zeros(l, l);
    for k in 0..l {
        for u in k..l {
            let s = linalg::dot(&vals[k], &vals[u]) / m;
            g[(k, u)] = s;
            g[(u, k)] = s;
        }
    }
    Ok(g)
}

/// Weighted empirical cross moments with the labels.
pub fn g_tilde(cands: &CandidateSet, train_labeled: &SampleSet, beta_values: &[f64]) -> Result<Vec<f64>> {
    let y = train_labeled.require_labels()?;
    if beta_values.len() != y.len() {
        return Err(Error::Input(format!("{} weights for {} labeled points", beta_values.len(), y.len())));
    }
    if beta_values.iter().any(|b| !(*b >= 0.0)) {
        return Err(Error::Input("weights must be nonnegative".into()));
    }
    let by: Vec<f64> = beta_values.iter().zip(y).map(|(b, yi)| b * yi).collect();
    let n = y.len() as f64;
    Ok(candidate_values(cands, train_labeled)?.iter().map(|v| linalg::dot(&by, v) / n).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverNote {
    Direct,
    Jittered,
    PseudoInverse,
}

impl std::fmt::Display for SolverNote {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverNote::Direct => "direct",
            SolverNote::Jittered => "jittered",
            SolverNote::PseudoInverse => "pseudo_inverse",
        })
    }
}

#[derive(Debug, Clone)]
pub struct AggregateResult {
    pub coefficients: Vec<f64>,
    pub function: RepresenterFunction,
    pub gram_tilde: Mat<f64>,
    pub g_tilde: Vec<f64>,
    pub solver_note: SolverNote,
}

/// `Q(c) = c^T G c - 2 c^T g`, the surrogate minimized by the aggregate.
pub fn quadratic_objective(gram: &Mat<f64>, g: &[f64], c: &[f64]) -> f64 {
    linalg::dot(c, &linalg::matvec(gram, c)) - 2.0 * linalg::dot(c, g)
}

fn well_conditioned(a: &Mat<f64>) -> Result<bool> {
    let ev = linalg::sym_eigenvalues(a)?;
    let (max, min) = (ev[0], ev[ev.len() - 1]);
    Ok(min > 0.0 && max / min <= CONDITION_LIMIT)
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Solves `G c = g`: directly when the condition number is at most `1e12`,
/// otherwise once more with jitter `1e-10 trace(G)/l`, and finally by the
/// minimum-norm least-squares solution.
pub fn solve_system(gram: &Mat<f64>, g: &[f64]) -> Result<(Vec<f64>, SolverNote)> {
    let l = gram.nrows();
    if gram.ncols() != l || g.len() != l || l == 0 {
        return Err(Error::Input(format!("system of size {}x{} with right side {}", l, gram.ncols(), g.len())));
    }
    if well_conditioned(gram)? {
        let c = linalg::lu_solve(gram, g);
        if finite(&c) {
            return Ok((c, SolverNote::Direct));
        }
    }
    let trace: f64 = (0..l).map(|i| gram[(i, i)]).sum();
    let eps = 1e-10 * trace / l as f64;
    if eps > 0.0 {
        let jittered = Mat::from_fn(l, l, |i, j| gram[(i, j)] + if i == j { eps } else { 0.0 });
        if well_conditioned(&jittered)? {
            let c = linalg::lu_solve(&jittered, g);
            if finite(&c) {
                return Ok((c, SolverNote::Jittered));
            }
        }
    }
    let (values, vectors) = linalg::sym_eigen(gram)?;
    let cutoff = values[0].abs() * l as f64 * f64::EPSILON;
    let mut c = vec![0.0; l];
    for (k, &mu) in values.iter().enumerate() {
        if mu > cutoff {
            let proj: f64 = (0..l).map(|i| vectors[(i, k)] * g[i]).sum::<f64>() / mu;
            for (i, ci) in c.iter_mut().enumerate() {
                *ci += proj * vectors[(i, k)];
            }
        }
    }
    Ok((c, SolverNote::PseudoInverse))
}

/// Aggregated function `sum_k c_k f_k`.
pub fn aggregate(cands: &CandidateSet, gram: Mat<f64>, g: Vec<f64>) -> Result<AggregateResult> {
    if gram.nrows() != cands.len() {
        return Err(Error::Input(format!("{} candidates but a {}x{} Gram matrix", cands.len(), gram.nrows(), gram.ncols())));
    }
    let (coefficients, solver_note) = solve_system(&gram, &g)?;
    let terms: Vec<(f64, &RepresenterFunction)> =
        coefficients.iter().zip(&cands.candidates).map(|(c, f)| (*c, &f.function)).collect();
    let function = linear_combination(&terms)?;
    Ok(AggregateResult { coefficients, function, gram_tilde: gram, g_tilde: g, solver_note })
}
