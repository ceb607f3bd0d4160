use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Measurement, SizeTuple, WeightMode};
use crate::aggregation::{aggregate, build_candidates, g_tilde, gram_tilde, quadratic_objective};
use crate::error::{Error, Result};
use crate::io::linear_grid;
use crate::iwrls::{fit, fit_path, WeightSource, WeightVector};
use crate::kernels::SampleSet;
use crate::representer::{rkhs_error, RepresenterFunction};
use crate::rn_estimator::{clipped_values, estimate_beta, RatioEstimate};
use crate::synthetic::{derive_seed, labeled_source, load_problem, sample_source, sample_target, ProblemSpec};
use crate::SolveRoute;

const STREAM_RN_SOURCE: u64 = 11;
const STREAM_RN_TARGET: u64 = 12;
const STREAM_TRAIN: u64 = 13;
const STREAM_TARGET_UNLABELED: u64 = 14;
const STREAM_MC: u64 = 15;

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub problem: String,
    pub measure: String,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub lambda: f64,
    pub trial: usize,
    pub seed: u64,
    pub value: f64,
}

impl ResultRow {
    pub fn sizes(&self) -> SizeTuple {
        SizeTuple { m: self.m, n: self.n, big_m: self.big_m, big_n: self.big_n }
    }
}

pub fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(["problem", "measure", "m", "n", "M", "N", "lambda", "trial", "seed", "value"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}

/// Samples shared by the measurements of one `(size, trial)` job.
struct Job<'a> {
    cfg: &'a ExperimentConfig,
    spec: &'a ProblemSpec,
    sizes: SizeTuple,
    seed: u64,
    lambda_reg: f64,
    lambda_rn: f64,
    ratio: Option<RatioEstimate>,
    train: Option<SampleSet>,
    mc: Option<(SampleSet, Vec<f64>)>,
}

impl<'a> Job<'a> {
    fn stream(&self, s: u64) -> u64 {
        derive_seed(self.seed, s)
    }

    fn ratio(&mut self) -> Result<&RatioEstimate> {
        if self.ratio.is_none() {
            let src = sample_source(self.spec, self.sizes.big_n, self.stream(STREAM_RN_SOURCE));
            let tgt = sample_target(self.spec, self.sizes.big_m, self.stream(STREAM_RN_TARGET))?;
            self.ratio = Some(estimate_beta(&src, &tgt, &self.spec.kernel, self.cfg.filter_rn, self.lambda_rn)?);
        }
        Ok(self.ratio.as_ref().expect("just set"))
    }

    fn train(&mut self) -> SampleSet {
        let (spec, n, seed) = (self.spec, self.sizes.n, self.stream(STREAM_TRAIN));
        self.train.get_or_insert_with(|| labeled_source(spec, n, seed)).clone()
    }

    fn l2(&mut self, f: &RepresenterFunction) -> Result<f64> {
        if self.mc.is_none() {
            let xs = sample_target(self.spec, self.cfg.n_mc, self.stream(STREAM_MC))?;
            let q = self.spec.f_q.values(&xs)?;
            self.mc = Some((xs, q));
        }
        let (xs, q) = self.mc.as_ref().expect("just set");
        let v = f.values(xs)?;
        Ok((v.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / q.len() as f64).sqrt())
    }

    fn weights(&mut self, mode: WeightMode) -> Result<WeightVector> {
        let train = self.train();
        match mode {
            WeightMode::Uniform => Ok(WeightVector::uniform(train.len())),
            WeightMode::Exact => {
                WeightVector::exact(self.spec.beta.values(&train)?.into_iter().map(|v| v.max(0.0)).collect())
            }
            WeightMode::Embedded => {
                let (lambda_rn, filter_rn) = (self.lambda_rn, self.cfg.filter_rn);
                let values = clipped_values(self.ratio()?, &train)?;
                WeightVector::new(values, WeightSource::Estimated { lambda_rn, filter_rn })
            }
        }
    }

    fn regression(&mut self) -> Result<RepresenterFunction> {
        let w = self.weights(self.cfg.weights)?;
        Ok(fit(&self.train(), &w, &self.spec.kernel, self.cfg.filter_reg, self.lambda_reg)?.function)
    }

    fn best_on_grid(&mut self, mode: WeightMode) -> Result<f64> {
        let w = self.weights(mode)?;
        let grid = self.cfg.lambda_grid_values()?;
        let fits = fit_path(&self.train(), &w, &self.spec.kernel, self.cfg.filter_reg, &grid, SolveRoute::Auto)?;
        let mut best = f64::INFINITY;
        for f in &fits {
            best = best.min(self.l2(&f.function)?);
        }
        Ok(best)
    }

    /// `(row name, value)` pairs of one measurement.
    fn measure(&mut self, m: Measurement) -> Result<Vec<(&'static str, f64)>> {
        let names = m.row_names();
        Ok(match m {
            Measurement::BetaRkhs => {
                let beta = self.spec.beta.clone();
                vec![(names[0], rkhs_error(&beta, &self.ratio()?.function)?)]
            }
            Measurement::BetaPointwise => {
                let (a, b, k) = self.cfg.probe_grid;
                let probes = SampleSet::from_scalars(linear_grid(a, b, k), 0)?;
                let truth = self.spec.beta.values(&probes)?;
                let est = self.ratio()?.function.values(&probes)?;
                vec![(names[0], truth.iter().zip(&est).map(|(t, e)| (t - e).abs()).fold(0.0, f64::max))]
            }
            Measurement::RiskL2Mc => {
                let f = self.regression()?;
                vec![(names[0], self.l2(&f)?)]
            }
            Measurement::FRkhs => {
                let f = self.regression()?;
                vec![(names[0], rkhs_error(&self.spec.f_q, &f)?)]
            }
            Measurement::AggregateVsBest => {
                let w = self.weights(WeightMode::Embedded)?;
                let train = self.train();
                let grid = self.cfg.lambda_grid_values()?;
                let cands = build_candidates(&train, &w, &self.spec.kernel, self.cfg.filter_reg, &grid, self.cfg.gamma_l)?;
                let unlabeled =
                    sample_target(self.spec, self.sizes.m, self.stream(STREAM_TARGET_UNLABELED))?;
                let gram = gram_tilde(&cands, &unlabeled)?;
                let g = g_tilde(&cands, &train, w.values())?;
                let agg = aggregate(&cands, gram, g)?;
                let q_agg = quadratic_objective(&agg.gram_tilde, &agg.g_tilde, &agg.coefficients);
                let q_best_single = (0..cands.len())
                    .map(|k| agg.gram_tilde[(k, k)] - 2.0 * agg.g_tilde[k])
                    .fold(f64::INFINITY, f64::min);
                let agg_l2 = self.l2(&agg.function)?;
                let mut best = f64::INFINITY;
                for c in &cands.candidates {
                    best = best.min(self.l2(&c.function)?);
                }
                vec![(names[0], agg_l2), (names[1], best), (names[2], q_agg - q_best_single)]
            }
            Measurement::WeightingGain => vec![
                (names[0], self.best_on_grid(WeightMode::Exact)?),
                (names[1], self.best_on_grid(WeightMode::Uniform)?),
            ],
        })
    }
}

/// Runs every `(size, trial)` job and returns rows ordered by measurement
/// row name (in configuration order), size index and trial.
///
/// Trial `t` uses seed `base_seed + t`; samples are drawn from independent
/// streams derived from it, so the rows do not depend on the thread count.
/// A failing measurement is logged and its rows are left out.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut spec = load_problem(&cfg.problem)?;
    if let Some(sigma) = cfg.noise {
        spec = spec.with_noise(sigma)?;
    }
    run_sweep_on(cfg, &spec)
}

/// [`run_sweep`] on an already loaded problem.
pub fn run_sweep_on(cfg: &ExperimentConfig, spec: &ProblemSpec) -> Result<Vec<ResultRow>> {
    let kappa0 = spec.kernel.kappa0();
    let lambdas: Vec<(f64, f64)> = cfg.sizes.iter().map(|s| cfg.lambdas(*s, kappa0)).collect::<Result<_>>()?;
    let row_order: Vec<&str> = cfg.measurements.iter().flat_map(|m| m.row_names().iter().copied()).collect();
    let jobs: Vec<(usize, usize)> =
        (0..cfg.sizes.len()).flat_map(|s| (0..cfg.trials).map(move |t| (s, t))).collect();

    let mut rows: Vec<(usize, usize, usize, ResultRow)> = jobs
        .par_iter()
        .flat_map_iter(|&(si, trial)| {
            let sizes = cfg.sizes[si];
            let (lambda_reg, lambda_rn) = lambdas[si];
            let seed = cfg.base_seed.wrapping_add(trial as u64);
            let mut job = Job { cfg, spec, sizes, seed, lambda_reg, lambda_rn, ratio: None, train: None, mc: None };
            let mut out = Vec::new();
            for &m in &cfg.measurements {
                let lambda = if m.uses_rn_lambda() { lambda_rn } else { lambda_reg };
                match job.measure(m) {
                    Ok(values) => {
                        for (name, value) in values {
                            let order = row_order.iter().position(|r| *r == name).expect("listed row name");
                            out.push((
                                order,
                                si,
                                trial,
                                ResultRow {
                                    problem: spec.name.clone(),
                                    measure: name.to_string(),
                                    m: sizes.m,
                                    n: sizes.n,
                                    big_m: sizes.big_m,
                                    big_n: sizes.big_n,
                                    lambda,
                                    trial,
                                    seed,
                                    value,
                                },
                            ));
                        }
                    }
                    Err(e) => log::warn!("{} at sizes ({sizes}) trial {trial} skipped: {e}", m.name()),
                }
            }
            out
        })
        .collect();
    rows.sort_by_key(|(o, s, t, _)| (*o, *s, *t));
    Ok(rows.into_iter().map(|(_, _, _, r)| r).collect())
}

/// Runs the sweep and writes the CSV.
pub fn run_sweep_to(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<ResultRow>> {
    let rows = run_sweep(cfg)?;
    write_rows(out, &rows).map_err(|e| match e {
        Error::Io(_) | Error::Csv(_) => Error::Io(std::io::Error::other(format!("cannot write {}: {e}", out.display()))),
        other => other,
    })?;
    Ok(rows)
}
