//! Kernel expansions with explicit sample normalizations.
//!
//! A [`RepresenterFunction`] has the value
//!
//! ```text
//! f(x) = bias + s (1/M) sum_j K(x, x'_j) + (1/N) sum_i c_i K(x, x_i)
//! ```
//!
//! where `x_i` are the source anchors with coefficients `c_i`, `x'_j` the
//! optional target anchors with block scale `s`, and `bias` the coefficient of
//! the constant function (only allowed when the kernel contains constants).

use rayon::prelude::*;

use crate::error::{input, Error, Result};
use crate::kernels::{KernelSpec, Point, SampleSet};

#[derive(Debug, Clone, PartialEq)]
pub struct RepresenterFunction {
    kernel: KernelSpec,
    source_anchors: SampleSet,
    source_coeffs: Vec<f64>,
    target_anchors: Option<SampleSet>,
    target_block_scale: f64,
    bias: f64,
}

impl RepresenterFunction {
    /// Source-block expansion `(1/N) sum_i c_i K(., x_i)`.
    pub fn new(kernel: KernelSpec, source_anchors: SampleSet, source_coeffs: Vec<f64>) -> Result<Self> {
        if source_anchors.len() != source_coeffs.len() {
            return input(format!("{} coefficients for {} anchors", source_coeffs.len(), source_anchors.len()));
        }
        if source_coeffs.iter().any(|c| !c.is_finite()) {
            return input("expansion coefficients must be finite");
        }
        Ok(RepresenterFunction {
            kernel,
            source_anchors,
            source_coeffs,
            target_anchors: None,
            target_block_scale: 0.0,
            bias: 0.0,
        })
    }

    /// Expansion with plain weights: `sum_i w_i K(., a_i)`.
    pub fn from_weights(kernel: KernelSpec, anchors: SampleSet, weights: &[f64]) -> Result<Self> {
        let n = anchors.len() as f64;
        Self::new(kernel, anchors, weights.iter().map(|w| w * n).collect())
    }

    pub fn zero(kernel: KernelSpec, dim: usize) -> Self {
        RepresenterFunction {
            kernel,
            source_anchors: SampleSet::empty(dim),
            source_coeffs: Vec::new(),
            target_anchors: None,
            target_block_scale: 0.0,
            bias: 0.0,
        }
    }

    /// Adds the uniform target-mean block `scale (1/M) sum_j K(., x'_j)`.
    pub fn with_target_block(mut self, anchors: SampleSet, scale: f64) -> Result<Self> {
        if !scale.is_finite() {
            return input("target block scale must be finite");
        }
        if !anchors.is_empty() && !self.source_anchors.is_empty() && anchors.dim() != self.source_anchors.dim() {
            return input("target and source anchors differ in dimension");
        }
        self.target_anchors = Some(anchors);
        self.target_block_scale = scale;
        Ok(self)
    }

    /// Adds a constant component; the kernel must contain the constants.
    pub fn with_bias(mut self, bias: f64) -> Result<Self> {
        if bias != 0.0 && !self.kernel.contains_constants() {
            return Err(Error::Input(format!("kernel {} does not contain constant functions", self.kernel)));
        }
        if !bias.is_finite() {
            return input("bias must be finite");
        }
        self.bias = bias;
        Ok(self)
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn source_anchors(&self) -> &SampleSet {
        &self.source_anchors
    }

    pub fn source_coeffs(&self) -> &[f64] {
        &self.source_coeffs
    }

    pub fn target_anchors(&self) -> Option<&SampleSet> {
        self.target_anchors.as_ref()
    }

    pub fn target_block_scale(&self) -> f64 {
        self.target_block_scale
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn dim(&self) -> usize {
        self.source_anchors.dim()
    }

    /// `s f`, keeping the anchor structure.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.source_coeffs.iter_mut().for_each(|c| *c *= s);
        out.target_block_scale *= s;
        out.bias *= s;
        out
    }

    /// Value at `x`; the caller guarantees the dimension.
    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.bias;
        let n = self.source_anchors.len();
        if n > 0 {
            let s: f64 = self.source_anchors.iter().zip(&self.source_coeffs).map(|(a, c)| c * self.kernel.eval(x, a)).sum();
            v += s / n as f64;
        }
        if let Some(t) = &self.target_anchors {
            if !t.is_empty() && self.target_block_scale != 0.0 {
                let s: f64 = t.iter().map(|a| self.kernel.eval(x, a)).sum();
                v += self.target_block_scale * s / t.len() as f64;
            }
        }
        v
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        let anchored = !self.source_anchors.is_empty() || self.target_anchors.as_ref().is_some_and(|t| !t.is_empty());
        if anchored && d != self.dim() {
            return input(format!("point of dimension {d} for a function on R^{}", self.dim()));
        }
        Ok(())
    }

    /// Values at every point of a sample, evaluated in parallel.
    pub fn values(&self, points: &SampleSet) -> Result<Vec<f64>> {
        if points.is_empty() {
            return Ok(Vec::new());
        }
        self.check_dim(points.dim())?;
        Ok((0..points.len()).into_par_iter().map(|i| self.value(points.point(i))).collect())
    }

    /// All kernel sections as one weighted list `sum_a w_a K(., a)`, bias
    /// excluded.
    pub fn expansion(&self) -> (SampleSet, Vec<f64>) {
        let n = self.source_anchors.len();
        let mut weights: Vec<f64> = self.source_coeffs.iter().map(|c| c / n as f64).collect();
        let mut anchors = self.source_anchors.clone();
        if let Some(t) = &self.target_anchors {
            if !t.is_empty() && self.target_block_scale != 0.0 {
                let w = self.target_block_scale / t.len() as f64;
                anchors = if anchors.is_empty() { t.clone() } else { anchors.concat(t).expect("anchor dimensions checked") };
                weights.extend(std::iter::repeat(w).take(t.len()));
            }
        }
        (anchors, weights)
    }
}

/// `evaluate(f, x)` with a dimension check.
pub fn evaluate(f: &RepresenterFunction, x: &Point) -> Result<f64> {
    f.check_dim(x.dim())?;
    Ok(f.value(x.coords()))
}

fn same_kernel(fs: &[&RepresenterFunction]) -> Result<()> {
    if let Some(first) = fs.first() {
        if let Some(other) = fs.iter().find(|f| f.kernel != first.kernel) {
            return Err(Error::Input(format!("kernel mismatch: {} vs {}", first.kernel, other.kernel)));
        }
    }
    Ok(())
}

/// `sum_k w_k f_k` as a single source-block expansion.
///
/// When every term is a plain source block over the same anchors the
/// coefficients are summed; otherwise the anchor lists are concatenated.
pub fn linear_combination(terms: &[(f64, &RepresenterFunction)]) -> Result<RepresenterFunction> {
    let fs: Vec<&RepresenterFunction> = terms.iter().map(|(_, f)| *f).collect();
    same_kernel(&fs)?;
    let Some(first) = fs.first() else {
        return input("empty linear combination");
    };
    let kernel = first.kernel.clone();
    let bias: f64 = terms.iter().map(|(w, f)| w * f.bias).sum();
    let shared = fs.iter().all(|f| {
        f.target_anchors.as_ref().is_none_or(|t| t.is_empty() || f.target_block_scale == 0.0)
            && f.source_anchors == first.source_anchors
    });
    let combined = if shared {
        let mut coeffs = vec![0.0; first.source_coeffs.len()];
        for (w, f) in terms {
            for (c, fc) in coeffs.iter_mut().zip(&f.source_coeffs) {
                *c += w * fc;
            }
        }
        RepresenterFunction::new(kernel.clone(), first.source_anchors.clone(), coeffs)?
    } else {
        let mut anchors: Option<SampleSet> = None;
        let mut weights = Vec::new();
        for (w, f) in terms {
            let (a, fw) = f.expansion();
            if a.is_empty() {
                continue;
            }
            weights.extend(fw.iter().map(|x| w * x));
            anchors = Some(match anchors {
                None => a,
                Some(prev) => prev.concat(&a)?,
            });
        }
        match anchors {
            Some(a) => RepresenterFunction::from_weights(kernel.clone(), a, &weights)?,
            None => RepresenterFunction::zero(kernel.clone(), first.dim()),
        }
    };
    combined.with_bias(bias)
}

/// `sum_{a,b} w_a w_b K(a, b)` over one weighted anchor list.
fn quadratic_form(kernel: &KernelSpec, anchors: &SampleSet, w: &[f64]) -> f64 {
    let n = anchors.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = anchors.point(i);
            let off: f64 = (i + 1..n).map(|j| w[j] * kernel.eval(xi, anchors.point(j))).sum();
            w[i] * (w[i] * kernel.eval(xi, xi) + 2.0 * off)
        })
        .sum()
}

fn cross_form(kernel: &KernelSpec, a: &SampleSet, wa: &[f64], b: &SampleSet, wb: &[f64]) -> f64 {
    (0..a.len())
        .into_par_iter()
        .map(|i| {
            let xi = a.point(i);
            wa[i] * b.iter().zip(wb).map(|(y, w)| w * kernel.eval(xi, y)).sum::<f64>()
        })
        .sum()
}

/// `<f, g>` in the RKHS of their common kernel.
///
/// For constant-augmented kernels `K_1 = 1 + K` the constant function
/// satisfies `<1, 1> = 1` and `<1, K_1(., z)> = 1`.
pub fn inner_product(f: &RepresenterFunction, g: &RepresenterFunction) -> Result<f64> {
    same_kernel(&[f, g])?;
    let (af, wf) = f.expansion();
    let (ag, wg) = g.expansion();
    let mut s = if af.is_empty() || ag.is_empty() { 0.0 } else { cross_form(&f.kernel, &af, &wf, &ag, &wg) };
    s += f.bias * g.bias + f.bias * wg.iter().sum::<f64>() + g.bias * wf.iter().sum::<f64>();
    Ok(s)
}

/// `||f||_{H_K}`.
pub fn rkhs_norm(f: &RepresenterFunction) -> f64 {
    let (a, w) = f.expansion();
    let q = quadratic_form(&f.kernel, &a, &w) + f.bias * f.bias + 2.0 * f.bias * w.iter().sum::<f64>();
    q.max(0.0).sqrt()
}

/// `||f - g||_{H_K}`.
pub fn rkhs_error(f: &RepresenterFunction, g: &RepresenterFunction) -> Result<f64> {
    let d = linear_combination(&[(1.0, f), (-1.0, g)])?;
    Ok(rkhs_norm(&d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gk() -> KernelSpec {
        KernelSpec::gaussian(1.0).unwrap()
    }

    fn set(xs: &[f64]) -> SampleSet {
        SampleSet::from_scalars(xs.to_vec(), 0).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let z = RepresenterFunction::new(gk(), set(&[0.3, -0.2]), vec![0.0, 0.0]).unwrap();
        assert_eq!(z.value(&[0.1]), 0.0);
        let f = RepresenterFunction::new(gk(), set(&[0.0]), vec![2.5]).unwrap();
        for x in [-1.0, 0.0, 0.7] {
            assert!((f.value(&[x]) - 2.5 * (-x * x / 2.0f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn target_block_and_normalizations() {
        let f = RepresenterFunction::new(gk(), set(&[0.0, 1.0]), vec![2.0, 4.0])
            .unwrap()
            .with_target_block(set(&[0.5, -0.5, 0.2]), 3.0)
            .unwrap();
        let x = 0.4;
        let k = |a: f64| (-(x - a) * (x - a) / 2.0f64).exp();
        let expect = (2.0 * k(0.0) + 4.0 * k(1.0)) / 2.0 + 3.0 * (k(0.5) + k(-0.5) + k(0.2)) / 3.0;
        assert!((f.value(&[x]) - expect).abs() < 1e-14);
    }

    #[test]
    fn norms_and_errors() {
        let f = RepresenterFunction::from_weights(gk(), set(&[0.0]), &[2.0]).unwrap();
        assert!((rkhs_norm(&f) - 2.0).abs() < 1e-15);
        let g = RepresenterFunction::from_weights(gk(), set(&[0.0]), &[0.5]).unwrap();
        assert!((rkhs_error(&f, &g).unwrap() - 1.5).abs() < 1e-14);
        assert_eq!(rkhs_error(&f, &f).unwrap(), 0.0);
        let other = RepresenterFunction::zero(KernelSpec::gaussian(2.0).unwrap(), 1);
        assert!(rkhs_error(&f, &other).is_err());
    }

    #[test]
    fn bias_requires_constants() {
        let f = RepresenterFunction::zero(gk(), 1);
        assert!(f.clone().with_bias(1.0).is_err());
        let aug = KernelSpec::constant_augmented(gk());
        let c = RepresenterFunction::zero(aug.clone(), 1).with_bias(2.0).unwrap();
        assert_eq!(c.value(&[0.3]), 2.0);
        assert!((rkhs_norm(&c) - 2.0).abs() < 1e-15);
        // K_1(., 0) - 1 = K(., 0) has squared norm K(0, 0) = 1
        let k1 = RepresenterFunction::from_weights(aug, set(&[0.0]), &[1.0]).unwrap();
        let d = linear_combination(&[(1.0, &k1), (-1.0, &c.with_bias(1.0).unwrap())]).unwrap();
        assert!((rkhs_norm(&d) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn combination_merges_shared_anchors() {
        let a = RepresenterFunction::new(gk(), set(&[0.0, 1.0]), vec![1.0, 2.0]).unwrap();
        let b = RepresenterFunction::new(gk(), set(&[0.0, 1.0]), vec![-1.0, 3.0]).unwrap();
        let c = linear_combination(&[(2.0, &a), (0.5, &b)]).unwrap();
        assert_eq!(c.source_coeffs(), &[1.5, 5.5]);
        let d = RepresenterFunction::new(gk(), set(&[0.3]), vec![1.0]).unwrap();
        let e = linear_combination(&[(2.0, &a), (-1.0, &d)]).unwrap();
        assert_eq!(e.source_anchors().len(), 3);
        for x in [-0.4, 0.2, 1.3] {
            assert!((e.value(&[x]) - (2.0 * a.value(&[x]) - d.value(&[x]))).abs() < 1e-14);
        }
    }

    #[test]
    fn dimension_checks() {
        let f = RepresenterFunction::new(gk(), set(&[0.0]), vec![1.0]).unwrap();
        assert!(evaluate(&f, &Point::new(vec![0.0, 1.0]).unwrap()).is_err());
        assert!(RepresenterFunction::new(gk(), set(&[0.0]), vec![1.0, 2.0]).is_err());
    }
}
