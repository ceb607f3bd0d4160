//! Kernels, sample sets and Gram matrices.
//!
//! Two kernel families are provided: the Gaussian kernel
//! `K(x, y) = exp(-|x - y|^2 / (2 sigma^2))` and the constant-augmented kernel
//! `K1(x, y) = 1 + K(x, y)`, whose RKHS contains the constant functions.

use std::fmt;
use std::str::FromStr;

use faer::Mat;

use crate::error::{input, Error, Result};

/// A point of `R^d` with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return input("point must have at least one coordinate");
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return input("point coordinates must be finite");
        }
        Ok(Point(coords))
    }

    /// One-dimensional point.
    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// A finite list of points in `R^d`, optionally labeled, tagged with the
/// seed that produced it (0 for data read from files).
///
/// Coordinates are stored row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    coords: Vec<f64>,
    labels: Option<Vec<f64>>,
    seed: u64,
}

impl SampleSet {
    pub fn new(dim: usize, coords: Vec<f64>, labels: Option<Vec<f64>>, seed: u64) -> Result<Self> {
        if dim == 0 {
            return input("sample dimension must be at least 1");
        }
        if coords.len() % dim != 0 {
            return input(format!("{} coordinates do not split into points of dimension {dim}", coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return input("sample coordinates must be finite");
        }
        let len = coords.len() / dim;
        if let Some(l) = &labels {
            if l.len() != len {
                return input(format!("{} labels for {len} points", l.len()));
            }
            if l.iter().any(|v| !v.is_finite()) {
                return input("labels must be finite");
            }
        }
        Ok(SampleSet { dim, coords, labels, seed })
    }

    /// Unlabeled one-dimensional sample.
    pub fn from_scalars(xs: Vec<f64>, seed: u64) -> Result<Self> {
        Self::new(1, xs, None, seed)
    }

    pub fn from_points(points: &[Point], seed: u64) -> Result<Self> {
        let dim = points.first().map_or(1, Point::dim);
        if points.iter().any(|p| p.dim() != dim) {
            return input("points of mixed dimension");
        }
        let coords = points.iter().flat_map(|p| p.coords().iter().copied()).collect();
        Self::new(dim, coords, None, seed)
    }

    pub fn empty(dim: usize) -> Self {
        SampleSet { dim: dim.max(1), coords: Vec::new(), labels: None, seed: 0 }
    }

    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != self.len() {
            return input(format!("{} labels for {} points", labels.len(), self.len()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    /// Labels, or an input error when the sample is unlabeled.
    pub fn require_labels(&self) -> Result<&[f64]> {
        self.labels.as_deref().ok_or_else(|| Error::Input("labeled sample required".into()))
    }

    /// Concatenation of two samples of the same dimension (labels dropped).
    pub fn concat(&self, other: &SampleSet) -> Result<SampleSet> {
        if self.dim != other.dim {
            return input(format!("dimension mismatch: {} vs {}", self.dim, other.dim));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(SampleSet { dim: self.dim, coords, labels: None, seed: self.seed })
    }
}

/// Kernel choice.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    Gaussian { sigma: f64 },
    ConstantAugmented(Box<KernelSpec>),
}

/// A bounded positive-definite kernel together with its bound
/// `kappa0 >= sup_x sqrt(K(x, x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    kappa0: f64,
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Parameter(format!("gaussian bandwidth must be positive, got {sigma}")));
        }
        Ok(KernelSpec { kind: KernelKind::Gaussian { sigma }, kappa0: 1.0 })
    }

    /// `1 + inner(x, y)`.
    pub fn constant_augmented(inner: KernelSpec) -> Self {
        let kappa0 = (1.0 + inner.kappa0 * inner.kappa0).sqrt();
        KernelSpec { kind: KernelKind::ConstantAugmented(Box::new(inner)), kappa0 }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    /// Whether the constant function belongs to the kernel's RKHS as an
    /// orthogonal summand (true for constant-augmented kernels).
    pub fn contains_constants(&self) -> bool {
        matches!(self.kind, KernelKind::ConstantAugmented(_))
    }

    /// Kernel value on raw coordinates; callers guarantee equal lengths.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            KernelKind::Gaussian { sigma } => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq / (2.0 * sigma * sigma)).exp()
            }
            KernelKind::ConstantAugmented(inner) => 1.0 + inner.eval(x, y),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            KernelKind::Gaussian { sigma } => write!(f, "gaussian:{sigma:?}"),
            KernelKind::ConstantAugmented(inner) => write!(f, "augmented:{inner}"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Parses `gaussian:<sigma>` or `augmented:<inner>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("augmented:") {
            return Ok(KernelSpec::constant_augmented(inner.parse()?));
        }
        if let Some(sigma) = s.strip_prefix("gaussian:") {
            let sigma: f64 =
                sigma.trim().parse().map_err(|_| Error::Config(format!("bad gaussian bandwidth in '{s}'")))?;
            return KernelSpec::gaussian(sigma).map_err(|e| Error::Config(e.to_string()));
        }
        Err(Error::Config(format!("unknown kernel '{s}' (expected gaussian:<sigma> or augmented:<kernel>)")))
    }
}

/// `K(x, y)` with dimension checking.
pub fn eval_kernel(spec: &KernelSpec, x: &Point, y: &Point) -> Result<f64> {
    if x.dim() != y.dim() {
        return input(format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
    }
    Ok(spec.eval(x.coords(), y.coords()))
}

/// Dense kernel matrix between two sample sets.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: Mat<f64>,
    symmetric: bool,
}

impl GramMatrix {
    pub fn entries(&self) -> &Mat<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> Mat<f64> {
        self.entries
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// True when built from a single sample set (rows = cols).
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

/// `entries[i][j] = K(rows_i, cols_j)`.
pub fn gram(spec: &KernelSpec, rows: &SampleSet, cols: &SampleSet) -> Result<GramMatrix> {
    if !rows.is_empty() && !cols.is_empty() && rows.dim() != cols.dim() {
        return input(format!("dimension mismatch: {} vs {}", rows.dim(), cols.dim()));
    }
    let entries = Mat::from_fn(rows.len(), cols.len(), |i, j| spec.eval(rows.point(i), cols.point(j)));
    Ok(GramMatrix { entries, symmetric: false })
}

/// Square Gram matrix of one sample; only the upper triangle is evaluated and
/// mirrored, so the result is exactly symmetric.
pub fn gram_square(spec: &KernelSpec, points: &SampleSet) -> GramMatrix {
    let n = points.len();
    let mut entries = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        let pj = points.point(j);
        for i in 0..=j {
            let v = spec.eval(points.point(i), pj);
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    GramMatrix { entries, symmetric: true }
}

/// Row-wise kernel means: `out[i] = (1/|cols|) sum_j K(rows_i, cols_j)`.
pub fn kernel_mean(spec: &KernelSpec, rows: &SampleSet, cols: &SampleSet) -> Vec<f64> {
    let m = cols.len() as f64;
    rows.iter().map(|x| cols.iter().map(|y| spec.eval(x, y)).sum::<f64>() / m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64) -> Point {
        Point::scalar(x).unwrap()
    }

    #[test]
    fn gaussian_values() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        assert_eq!(eval_kernel(&k, &pt(0.0), &pt(0.0)).unwrap(), 1.0);
        let v = eval_kernel(&k, &pt(0.0), &pt(2f64.sqrt())).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-15);
        assert!((v - 0.3678794).abs() < 1e-7);
    }

    #[test]
    fn augmented_adds_one() {
        let k = KernelSpec::constant_augmented(KernelSpec::gaussian(1.0).unwrap());
        assert_eq!(eval_kernel(&k, &pt(0.0), &pt(0.0)).unwrap(), 2.0);
        assert!((k.kappa0() - 2f64.sqrt()).abs() < 1e-15);
        let g = KernelSpec::gaussian(1.0).unwrap();
        for (a, b) in [(0.0, 0.3), (-1.0, 2.0), (0.7, 0.7)] {
            let d = eval_kernel(&k, &pt(a), &pt(b)).unwrap() - eval_kernel(&g, &pt(a), &pt(b)).unwrap();
            assert!((d - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let y = Point::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(eval_kernel(&k, &pt(0.0), &y), Err(Error::Input(_))));
    }

    #[test]
    fn non_finite_and_bad_bandwidth_rejected() {
        assert!(Point::scalar(f64::NAN).is_err());
        assert!(SampleSet::from_scalars(vec![0.0, f64::INFINITY], 0).is_err());
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::gaussian(-1.0).is_err());
    }

    #[test]
    fn gram_single_point_and_empty() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let s = SampleSet::from_scalars(vec![0.0], 0).unwrap();
        let g = gram(&k, &s, &s).unwrap();
        assert_eq!(g.nrows(), 1);
        assert_eq!(g.get(0, 0), 1.0);

        let e = SampleSet::empty(1);
        let s3 = SampleSet::from_scalars(vec![0.0, 1.0, 2.0], 0).unwrap();
        let g = gram(&k, &e, &s3).unwrap();
        assert_eq!((g.nrows(), g.ncols()), (0, 3));
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["gaussian:0.5", "augmented:gaussian:1.0"] {
            let k: KernelSpec = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("laplace:1".parse::<KernelSpec>().is_err());
        assert!(matches!("gaussian:-1".parse::<KernelSpec>(), Err(Error::Config(_))));
    }
}
