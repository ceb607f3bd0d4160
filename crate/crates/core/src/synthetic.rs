//! Synthetic covariate-shift problems with known ratio and regression
//! function.
//!
//! Both `beta` and `f_q` are kernel expansions. Smoothness beyond plain
//! membership in the RKHS is obtained by pushing an element `v` through the
//! source covariance operator, `(T_S v)(x) = int K(x, z) v(z) d rho_S(z)`,
//! discretized by composite Simpson quadrature; the result is again a finite
//! expansion whose anchors are the quadrature nodes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::io::{parse_key_values, parse_list};
use crate::kernels::{KernelSpec, SampleSet};
use crate::representer::RepresenterFunction;

/// Points used to verify nonnegativity and the bound of `beta`.
pub const CHECK_GRID: usize = 2001;
const QUADRATURE_NODES: usize = 401;

/// Input marginal of the source domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceLaw {
    Uniform { a: f64, b: f64 },
    Gaussian { mu: f64, sigma: f64 },
}

impl SourceLaw {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(Error::Config(format!("uniform law needs a < b, got {a}, {b}")));
        }
        Ok(SourceLaw::Uniform { a, b })
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::Config(format!("gaussian law needs sigma > 0, got {sigma}")));
        }
        Ok(SourceLaw::Gaussian { mu, sigma })
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            SourceLaw::Uniform { a, b } => {
                if (a..=b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            SourceLaw::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }

    /// Interval used for quadrature and grid checks (`mu +- 12 sigma` for the
    /// Gaussian law).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            SourceLaw::Uniform { a, b } => (a, b),
            SourceLaw::Gaussian { mu, sigma } => (mu - 12.0 * sigma, mu + 12.0 * sigma),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            SourceLaw::Uniform { a, b } => Uniform::new_inclusive(a, b).sample(rng),
            SourceLaw::Gaussian { mu, sigma } => Normal::new(mu, sigma).expect("validated sigma").sample(rng),
        }
    }
}

impl fmt::Display for SourceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceLaw::Uniform { a, b } => write!(f, "uniform:{a:?}:{b:?}"),
            SourceLaw::Gaussian { mu, sigma } => write!(f, "gaussian:{mu:?}:{sigma:?}"),
        }
    }
}

impl FromStr for SourceLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let bad = || Error::Config(format!("bad source law '{s}' (uniform:a:b or gaussian:mu:sigma)"));
        let num = |p: &str| p.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            ["uniform", a, b] => SourceLaw::uniform(num(a)?, num(b)?),
            ["gaussian", m, sd] => SourceLaw::gaussian(num(m)?, num(sd)?),
            _ => Err(bad()),
        }
    }
}

/// Unnormalized problem description.
#[derive(Debug, Clone)]
pub struct ProblemDraft {
    pub name: String,
    pub source_law: SourceLaw,
    pub kernel: KernelSpec,
    pub beta_raw: RepresenterFunction,
    /// Bound on the normalized ratio; computed from a fine grid when absent
    /// and `auto_b0` is set.
    pub b0: Option<f64>,
    pub auto_b0: bool,
    pub f_q: RepresenterFunction,
    pub noise_sigma: f64,
}

/// A problem with `int beta d rho_S = 1`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub source_law: SourceLaw,
    pub kernel: KernelSpec,
    pub beta: RepresenterFunction,
    pub beta_norm_const: f64,
    pub b0: Option<f64>,
    pub f_q: RepresenterFunction,
    pub noise_sigma: f64,
}

impl ProblemSpec {
    pub fn with_noise(mut self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("noise level must be nonnegative, got {sigma}")));
        }
        self.noise_sigma = sigma;
        Ok(self)
    }

    /// `beta` at an equispaced grid of `k` points over the support.
    pub fn beta_on_grid(&self, k: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.source_law.support();
        crate::io::linear_grid(lo, hi, k).into_iter().map(|x| (x, self.beta.value(&[x]))).collect()
    }

    /// Reads a problem file.
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Parses `key = value` text with keys `name`, `source`, `kernel`,
    /// `beta.anchors`, `beta.coeffs`, `beta.bias`, `b0`, `fq.anchors`,
    /// `fq.coeffs`, `fq.bias` and `noise`; `b0 = auto` takes the bound from a
    /// fine grid. Coefficients are plain weights of
    /// `K(., anchor)`; `beta` is normalized after reading.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut name = "custom".to_string();
        let mut source = None;
        let mut kernel = None;
        let (mut ba, mut bc, mut bb) = (Vec::new(), Vec::new(), 0.0);
        let (mut fa, mut fc, mut fb) = (Vec::new(), Vec::new(), 0.0);
        let mut b0 = None;
        let mut auto_b0 = false;
        let mut noise = 0.1;
        let num = |k: &str, v: &str| v.parse::<f64>().map_err(|_| Error::Config(format!("bad number for {k}: '{v}'")));
        for (k, v) in parse_key_values(text)? {
            match k.as_str() {
                "name" => name = v,
                "source" => source = Some(v.parse::<SourceLaw>()?),
                "kernel" => kernel = Some(v.parse::<KernelSpec>()?),
                "beta.anchors" => ba = parse_list(&v)?,
                "beta.coeffs" => bc = parse_list(&v)?,
                "beta.bias" => bb = num(&k, &v)?,
                "fq.anchors" => fa = parse_list(&v)?,
                "fq.coeffs" => fc = parse_list(&v)?,
                "fq.bias" => fb = num(&k, &v)?,
                "b0" if v == "auto" => auto_b0 = true,
                "b0" => b0 = Some(num(&k, &v)?),
                "noise" => noise = num(&k, &v)?,
                other => return Err(Error::Config(format!("unknown problem key '{other}'"))),
            }
        }
        let source_law = source.ok_or_else(|| Error::Config("problem file lacks 'source'".into()))?;
        let kernel = kernel.ok_or_else(|| Error::Config("problem file lacks 'kernel'".into()))?;
        let expansion = |a: Vec<f64>, c: Vec<f64>, bias: f64, what: &str| -> Result<RepresenterFunction> {
            if a.len() != c.len() {
                return Err(Error::Config(format!("{what}: {} anchors but {} coefficients", a.len(), c.len())));
            }
            let anchors = SampleSet::from_scalars(a, 0)?;
            RepresenterFunction::from_weights(kernel.clone(), anchors, &c)?
                .with_bias(bias)
                .map_err(|e| Error::Config(format!("{what}: {e}")))
        };
        let draft = ProblemDraft {
            name,
            source_law,
            kernel: kernel.clone(),
            beta_raw: expansion(ba, bc, bb, "beta")?,
            b0,
            auto_b0,
            f_q: expansion(fa, fc, fb, "fq")?,
            noise_sigma: noise,
        };
        normalize_beta(draft)?.with_noise(noise)
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    // split first so that narrow features are not missed by the initial rule
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            rec(f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// `int g d rho_S`.
pub fn integrate_source(law: &SourceLaw, g: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = law.support();
    adaptive_simpson(&|x| g(x) * law.density(x), lo, hi, 1e-13)
}

/// Rescales `beta_raw` so that it integrates to one against the source law
/// and checks nonnegativity and the bound `b0` on a 2001-point grid.
pub fn normalize_beta(draft: ProblemDraft) -> Result<ProblemSpec> {
    let z = integrate_source(&draft.source_law, |x| draft.beta_raw.value(&[x]));
    if !(z.abs() > 1e-300) {
        return Err(Error::Degenerate("ratio integrates to zero".into()));
    }
    let beta = draft.beta_raw.scaled(1.0 / z);
    let (lo, hi) = draft.source_law.support();
    let grid = crate::io::linear_grid(lo, hi, CHECK_GRID);
    let values: Vec<f64> = grid.iter().map(|&x| beta.value(&[x])).collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some((x, v)) = grid.iter().zip(&values).find(|(_, v)| **v < -1e-12 * scale.max(1.0)) {
        return Err(Error::Degenerate(format!("ratio is negative ({v:.3e}) at x = {x}")));
    }
    let b0 = match (draft.b0, draft.auto_b0) {
        (Some(b), _) => Some(b),
        (None, true) => {
            let fine = crate::io::linear_grid(lo, hi, 20 * CHECK_GRID);
            Some(fine.iter().map(|&x| beta.value(&[x])).fold(0.0, f64::max) * 1.001)
        }
        (None, false) => None,
    };
    if let Some(b) = b0 {
        if let Some((x, v)) = grid.iter().zip(&values).find(|(_, v)| **v > b) {
            return Err(Error::Config(format!("ratio value {v} at x = {x} exceeds b0 = {b}")));
        }
    }
    Ok(ProblemSpec {
        name: draft.name,
        source_law: draft.source_law,
        kernel: draft.kernel,
        beta,
        beta_norm_const: 1.0 / z,
        b0,
        f_q: draft.f_q,
        noise_sigma: draft.noise_sigma,
    })
}

/// Discretized `T_S v` on `QUADRATURE_NODES` Simpson nodes over the support.
pub fn covariance_push(kernel: &KernelSpec, law: &SourceLaw, v: &RepresenterFunction) -> Result<RepresenterFunction> {
    let (lo, hi) = law.support();
    let k = QUADRATURE_NODES;
    let h = (hi - lo) / (k - 1) as f64;
    let nodes = crate::io::linear_grid(lo, hi, k);
    let weights: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let simpson = if i == 0 || i == k - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            simpson * h / 3.0 * law.density(z) * v.value(&[z])
        })
        .collect();
    RepresenterFunction::from_weights(kernel.clone(), SampleSet::from_scalars(nodes, 0)?, &weights)
}

fn sections(kernel: &KernelSpec, anchors: &[f64], weights: &[f64]) -> Result<RepresenterFunction> {
    RepresenterFunction::from_weights(kernel.clone(), SampleSet::from_scalars(anchors.to_vec(), 0)?, weights)
}

/// `f` rescaled to unit sup norm on the support grid.
fn unit_sup(f: RepresenterFunction, law: &SourceLaw) -> RepresenterFunction {
    let (lo, hi) = law.support();
    let m = crate::io::linear_grid(lo, hi, CHECK_GRID).iter().map(|&x| f.value(&[x]).abs()).fold(0.0, f64::max);
    f.scaled(1.0 / m)
}

/// Names accepted by [`named_problem`].
pub const PROBLEM_NAMES: [&str; 3] = ["shift1d-mild", "shift1d-strong", "noshift"];

/// Ridge-stabilized least-squares fit of `target` by sections at `anchors`,
/// sampled on the check grid of `law`.
fn fit_sections(kernel: &KernelSpec, law: &SourceLaw, anchors: &[f64], target: impl Fn(f64) -> f64) -> Result<RepresenterFunction> {
    let (lo, hi) = law.support();
    let xs = crate::io::linear_grid(lo, hi, CHECK_GRID);
    let k = anchors.len();
    let phi: Vec<Vec<f64>> = xs.iter().map(|&x| anchors.iter().map(|&a| kernel.eval(&[x], &[a])).collect()).collect();
    let mut normal = faer::Mat::<f64>::zeros(k, k);
    let mut rhs = vec![0.0; k];
    for (row, &x) in phi.iter().zip(&xs) {
        let y = target(x);
        for i in 0..k {
            rhs[i] += row[i] * y;
            for j in 0..k {
                normal[(i, j)] += row[i] * row[j];
            }
        }
    }
    for i in 0..k {
        normal[(i, i)] += 1e-10;
    }
    sections(kernel, anchors, &crate::linalg::lu_solve(&normal, &rhs))
}

/// Built-in problems with noise 0.1 on the source law uniform(-1, 1).
///
/// * `shift1d-mild`: Gaussian kernel of width 0.5, `beta = T_S K(., 0)`, a
///   bump at the center (`b0` about 1.4). The regression function is `T_S`
///   applied to a two-section element, scaled to unit sup norm.
/// * `shift1d-strong`: Gaussian kernel of width 1, `beta = K(., 2.5)`, mass
///   pushed to the right edge (`b0` about 3.9). The regression function is
///   the least-squares fit of `sin(4x)` by nine sections on `[-1.5, 1.5]`.
/// * `noshift`: the mild problem with the constant-augmented kernel and
///   `beta = 1`.
pub fn named_problem(name: &str) -> Result<ProblemSpec> {
    let law = SourceLaw::uniform(-1.0, 1.0)?;
    let narrow = KernelSpec::gaussian(0.5)?;
    let mild_fq = |k: &KernelSpec| -> Result<RepresenterFunction> {
        Ok(unit_sup(covariance_push(k, &law, &sections(k, &[-0.6, 0.6], &[1.0, -0.8])?)?, &law))
    };
    let (kernel, beta_raw, f_q) = match name {
        "shift1d-mild" => {
            let beta = covariance_push(&narrow, &law, &sections(&narrow, &[0.0], &[1.0])?)?;
            (narrow.clone(), beta, mild_fq(&narrow)?)
        }
        "shift1d-strong" => {
            let wide = KernelSpec::gaussian(1.0)?;
            let anchors: Vec<f64> = (0..9).map(|i| -1.5 + 0.375 * i as f64).collect();
            let f_q = fit_sections(&wide, &law, &anchors, |x| (4.0 * x).sin())?;
            (wide.clone(), sections(&wide, &[2.5], &[1.0])?, f_q)
        }
        "noshift" => {
            let aug = KernelSpec::constant_augmented(narrow.clone());
            let one = RepresenterFunction::zero(aug.clone(), 1).with_bias(1.0)?;
            let f_q = mild_fq(&aug)?;
            (aug, one, f_q)
        }
        other => {
            return Err(Error::Config(format!("unknown problem '{other}' (known: {})", PROBLEM_NAMES.join(", "))))
        }
    };
    normalize_beta(ProblemDraft {
        name: name.to_string(),
        source_law: law,
        kernel,
        beta_raw,
        b0: None,
        auto_b0: true,
        f_q,
        noise_sigma: 0.1,
    })
}

/// Built-in name or path of a problem file.
pub fn load_problem(name_or_path: &str) -> Result<ProblemSpec> {
    if PROBLEM_NAMES.contains(&name_or_path) {
        named_problem(name_or_path)
    } else if Path::new(name_or_path).is_file() {
        ProblemSpec::from_file(Path::new(name_or_path))
    } else {
        Err(Error::Config(format!("'{name_or_path}' is neither a known problem nor a readable problem file")))
    }
}

/// Independent stream seed for `(base, stream)` (splitmix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` i.i.d. source draws.
pub fn sample_source(spec: &ProblemSpec, n: usize, seed: u64) -> SampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = (0..n).map(|_| spec.source_law.draw(&mut rng)).collect();
    SampleSet::from_scalars(xs, seed).expect("finite draws")
}

/// `m` target draws by rejection from the source law, accepting `x` with
/// probability `beta(x) / b0`.
pub fn sample_target(spec: &ProblemSpec, m: usize, seed: u64) -> Result<SampleSet> {
    Ok(sample_target_with_stats(spec, m, seed)?.0)
}

/// Like [`sample_target`], also returning the number of source draws used.
pub fn sample_target_with_stats(spec: &ProblemSpec, m: usize, seed: u64) -> Result<(SampleSet, u64)> {
    let b0 = spec.b0.ok_or_else(|| Error::Config(format!("problem '{}' has no ratio bound b0", spec.name)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(m);
    let mut draws = 0u64;
    while xs.len() < m {
        let x = spec.source_law.draw(&mut rng);
        draws += 1;
        let u: f64 = rng.gen();
        if u * b0 < spec.beta.value(&[x]) {
            xs.push(x);
        }
    }
    Ok((SampleSet::from_scalars(xs, seed)?, draws))
}

/// `y_i = f_q(x_i) + eps_i` with centered Gaussian noise.
pub fn sample_labels(spec: &ProblemSpec, xs: &SampleSet, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clean: Vec<f64> = xs.iter().map(|x| spec.f_q.value(x)).collect();
    if spec.noise_sigma == 0.0 {
        return clean;
    }
    let noise = Normal::new(0.0, spec.noise_sigma).expect("validated noise");
    clean.into_iter().map(|v| v + noise.sample(&mut rng)).collect()
}

/// Labeled source sample of size `n`.
pub fn labeled_source(spec: &ProblemSpec, n: usize, seed: u64) -> SampleSet {
    let xs = sample_source(spec, n, seed);
    let ys = sample_labels(spec, &xs, derive_seed(seed, 1));
    xs.with_labels(ys).expect("one label per point")
}

/// Monte-Carlo excess risk `mean (f - f_q)^2` over fresh target draws.
pub fn mc_excess_risk(f: &RepresenterFunction, spec: &ProblemSpec, n_mc: usize, seed: u64) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::Parameter("n_mc must be at least 1".into()));
    }
    let xs = sample_target(spec, n_mc, seed)?;
    let fv = f.values(&xs)?;
    let qv = spec.f_q.values(&xs)?;
    Ok(fv.iter().zip(&qv).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n_mc as f64)
}

/// Square root of [`mc_excess_risk`].
pub fn mc_l2_error(f: &RepresenterFunction, spec: &ProblemSpec, n_mc: usize, seed: u64) -> Result<f64> {
    Ok(mc_excess_risk(f, spec, n_mc, seed)?.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_problems_are_normalized() {
        for name in PROBLEM_NAMES {
            let p = named_problem(name).unwrap();
            let z = integrate_source(&p.source_law, |x| p.beta.value(&[x]));
            assert!((z - 1.0).abs() < 1e-10, "{name}: {z}");
            let b0 = p.b0.unwrap();
            assert!(p.beta_on_grid(CHECK_GRID).iter().all(|(_, v)| *v >= 0.0 && *v <= b0));
        }
        assert!(named_problem("nope").is_err());
    }

    #[test]
    fn simpson_on_known_integrals() {
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-13);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-13);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = named_problem("shift1d-mild").unwrap();
        assert!(sample_source(&p, 0, 3).is_empty());
        assert_eq!(sample_source(&p, 50, 7), sample_source(&p, 50, 7));
        assert_eq!(sample_target(&p, 50, 7).unwrap(), sample_target(&p, 50, 7).unwrap());
        let xs = sample_source(&p, 20, 1);
        assert_eq!(sample_labels(&p, &xs, 4), sample_labels(&p, &xs, 4));
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }

    #[test]
    fn missing_b0_is_a_config_error() {
        let mut p = named_problem("shift1d-mild").unwrap();
        p.b0 = None;
        assert!(matches!(sample_target(&p, 3, 0), Err(Error::Config(_))));
    }

    #[test]
    fn law_parsing() {
        assert_eq!("uniform:-1:1".parse::<SourceLaw>().unwrap(), SourceLaw::Uniform { a: -1.0, b: 1.0 });
        assert!("uniform:1:-1".parse::<SourceLaw>().is_err());
        assert!("gaussian:0:0".parse::<SourceLaw>().is_err());
        assert!("beta:1:2".parse::<SourceLaw>().is_err());
    }

    #[test]
    fn problem_text() {
        let text = "name = t\nsource = uniform:-1:1\nkernel = gaussian:0.5\nbeta.anchors = 0.0\nbeta.coeffs = 2.0\nb0 = 3\nfq.anchors = 0.2, -0.2\nfq.coeffs = 1, 1\nnoise = 0.05\n";
        let p = ProblemSpec::from_text(text).unwrap();
        assert_eq!(p.noise_sigma, 0.05);
        assert_eq!(p.b0, Some(3.0));
        let z = integrate_source(&p.source_law, |x| p.beta.value(&[x]));
        assert!((z - 1.0).abs() < 1e-10);
        assert!(ProblemSpec::from_text("source = uniform:-1:1\n").is_err());
        let low_b0 = text.replace("b0 = 3", "b0 = 1.0");
        assert!(ProblemSpec::from_text(&low_b0).is_err());
    }
}
