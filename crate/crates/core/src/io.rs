//! Text formats: point CSVs, flat `key = value` files and model files.
//!
//! A model file stores an expansion `f = sum_a w_a K(., a)`:
//!
//! ```text
//! gaussian:0.5
//! 3
//! -0.25,1.5
//! 0.0,-0.75
//! 0.5,0.125
//! ```
//!
//! Line one is the kernel, line two the anchor count, then one row of
//! coordinates followed by the weight per anchor.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, SampleSet};
use crate::representer::RepresenterFunction;

/// Parses `key = value` lines; `#` starts a comment, values may be quoted.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1)))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        let mut value = v.trim();
        if value.len() >= 2 && (value.starts_with('"') && value.ends_with('"') || value.starts_with('\'') && value.ends_with('\'')) {
            value = &value[1..value.len() - 1];
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    let mut quote = None;
    for (i, ch) in line.char_indices() {
        match (ch, quote) {
            ('"' | '\'', None) => quote = Some(ch),
            (c, Some(q)) if c == q => quote = None,
            ('#', None) => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number '{}' in list '{s}'", p.trim()))))
        .collect()
}

fn data_err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("{}: {msg}", path.display()))
}

/// Reads a numeric CSV (optional header). With `labeled` the last column is
/// the label.
pub fn read_samples(path: &Path, labeled: bool) -> Result<SampleSet> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(r) => r,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(data_err(path, format!("non-numeric entry on row {}", i + 1))),
        };
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(data_err(path, format!("row {} has {} fields", i + 1, row.len())));
        }
        if labeled {
            let (x, y) = row.split_at(row.len() - 1);
            coords.extend_from_slice(x);
            labels.push(y[0]);
        } else {
            coords.extend(row);
        }
    }
    let w = width.unwrap_or(if labeled { 2 } else { 1 });
    let dim = if labeled { w - 1 } else { w };
    if dim == 0 {
        return Err(data_err(path, "labeled data needs at least one coordinate column"));
    }
    SampleSet::new(dim, coords, labeled.then_some(labels), 0).map_err(|e| data_err(path, e))
}

/// `header` and one row per point: coordinates then `values[i]`, in shortest
/// round-trip float formatting.
pub fn format_point_values(header: &str, points: &SampleSet, values: &[f64]) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for (x, v) in points.iter().zip(values) {
        for c in x {
            out.push_str(&format!("{c:?},"));
        }
        out.push_str(&format!("{v:?}\n"));
    }
    out
}

pub fn write_point_values(path: &Path, header: &str, points: &SampleSet, values: &[f64]) -> Result<()> {
    fs::write(path, format_point_values(header, points, values))?;
    Ok(())
}

/// `k` equispaced points from `a` to `b` given as `a:b:k`.
pub fn parse_grid(spec: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let bad = || Error::Config(format!("bad grid '{spec}' (expected a:b:k)"));
    let [a, b, k] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.parse().map_err(|_| bad())?;
    let b: f64 = b.parse().map_err(|_| bad())?;
    let k: usize = k.parse().map_err(|_| bad())?;
    if k == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((a, b, k))
}

pub fn linear_grid(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![a];
    }
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

pub fn write_model(path: &Path, f: &RepresenterFunction) -> Result<()> {
    if f.bias() != 0.0 {
        return Err(Error::Input("model files cannot store a constant component".into()));
    }
    let (anchors, weights) = f.expansion();
    let mut file = fs::File::create(path)?;
    writeln!(file, "{}", f.kernel())?;
    writeln!(file, "{}", anchors.len())?;
    for (a, w) in anchors.iter().zip(&weights) {
        let coords: Vec<String> = a.iter().map(|c| format!("{c:?}")).collect();
        writeln!(file, "{},{w:?}", coords.join(","))?;
    }
    Ok(())
}

pub fn read_model(path: &Path) -> Result<RepresenterFunction> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let kernel: KernelSpec = lines.next().ok_or_else(|| data_err(path, "missing kernel line"))?.parse()?;
    let count: usize = lines
        .next()
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| data_err(path, "missing anchor count"))?;
    let mut coords = Vec::new();
    let mut weights = Vec::with_capacity(count);
    let mut dim = None;
    for (i, line) in lines.enumerate() {
        let row = parse_list(line).map_err(|e| data_err(path, e))?;
        if row.len() < 2 || *dim.get_or_insert(row.len() - 1) != row.len() - 1 {
            return Err(data_err(path, format!("malformed anchor row {}", i + 1)));
        }
        weights.push(row[row.len() - 1]);
        coords.extend_from_slice(&row[..row.len() - 1]);
    }
    if weights.len() != count {
        return Err(data_err(path, format!("expected {count} anchors, found {}", weights.len())));
    }
    let anchors = SampleSet::new(dim.unwrap_or(1), coords, None, 0).map_err(|e| data_err(path, e))?;
    RepresenterFunction::from_weights(kernel, anchors, &weights)
}
