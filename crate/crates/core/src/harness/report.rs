use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::rates::{fit_rate, medians, theoretical_exponent, Independent};
use super::sweep::{read_rows, ResultRow};
use crate::error::Result;
use crate::source_theory::IndexFunction;

/// Files written by [`report`].
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub summary: PathBuf,
    /// Absent when the CSV has no rows.
    pub plot_script: Option<PathBuf>,
}

/// Index functions used for the predicted exponents of a report.
#[derive(Debug, Clone, Copy)]
pub struct TheoryParams {
    pub phi: IndexFunction,
    pub phi_beta: IndexFunction,
    pub xi: IndexFunction,
}

impl Default for TheoryParams {
    fn default() -> Self {
        let p = |e| IndexFunction::power(e).expect("positive exponent");
        TheoryParams { phi: p(1.0), phi_beta: p(1.0), xi: p(0.5) }
    }
}

fn measures_in_order(rows: &[ResultRow]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in rows {
        if !out.contains(&r.measure) {
            out.push(r.measure.clone());
        }
    }
    out
}

/// Plain-text summary: per measure, the median per size tuple, the fitted
/// log-log slope and the predicted exponent.
pub fn summary_text(rows: &[ResultRow], theory: &TheoryParams) -> String {
    let mut s = String::new();
    let measures = measures_in_order(rows);
    if measures.is_empty() {
        s.push_str("no rows\n");
        return s;
    }
    for m in measures {
        let ind = Independent::for_measure(&m);
        let _ = writeln!(s, "measure {m} (axis {ind})");
        let _ = writeln!(s, "  {:>8} {:>8} {:>8} {:>8} {:>12} {:>6} {:>14}", "m", "n", "M", "N", "functional", "trials", "median");
        for p in medians(rows, &m, ind) {
            let (a, b, c, d) = p.sizes;
            let _ = writeln!(
                s,
                "  {a:>8} {b:>8} {c:>8} {d:>8} {:>12.5e} {:>6} {:>14.6e}",
                p.functional, p.trials, p.median
            );
        }
        match fit_rate(rows, &m, ind) {
            Ok(fit) => {
                let _ = write!(s, "  slope {:.4} (stderr {:.4})", fit.slope, fit.stderr);
            }
            Err(e) => {
                let _ = write!(s, "  slope n/a ({e})");
            }
        }
        match theoretical_exponent(&m, &theory.phi, &theory.phi_beta, &theory.xi) {
            Some(e) => {
                let _ = writeln!(s, ", predicted {e:.4}");
            }
            None => s.push('\n'),
        }
        s.push('\n');
    }
    s
}

/// Gnuplot script drawing each measure against its size functional on
/// log-log axes, straight from the CSV.
pub fn plot_script(rows: &[ResultRow], csv_name: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset terminal pngcairo size 800,600\nset logscale xy\nset key top left\n");
    for m in measures_in_order(rows) {
        let x = match Independent::for_measure(&m) {
            Independent::Mn => "(column('m')**-0.5 + column('n')**-0.5)",
            Independent::BigMn => "(column('M')**-0.5 + column('N')**-0.5)",
        };
        let axis = Independent::for_measure(&m);
        let _ = writeln!(s, "\nset output '{m}.png'");
        let _ = writeln!(s, "set title '{m}'");
        let _ = writeln!(s, "set xlabel 'size functional ({axis})'");
        let _ = writeln!(s, "set ylabel 'value'");
        let _ = writeln!(
            s,
            "plot '{csv_name}' using (strcol('measure') eq '{m}' ? {x} : NaN):(column('value')) every ::1 with points title '{m}'"
        );
    }
    s
}

/// Reads a sweep CSV and writes `summary.txt` and, when there are rows,
/// `plots.gp` into `out_dir`.
pub fn report(csv: &Path, out_dir: &Path, theory: &TheoryParams) -> Result<ReportFiles> {
    let rows = read_rows(csv)?;
    fs::create_dir_all(out_dir)?;
    let summary = out_dir.join("summary.txt");
    fs::write(&summary, summary_text(&rows, theory))?;
    let plot_script_path = if rows.is_empty() {
        None
    } else {
        let p = out_dir.join("plots.gp");
        let abs = csv.canonicalize().unwrap_or_else(|_| csv.to_path_buf());
        fs::write(&p, plot_script(&rows, &abs.display().to_string()))?;
        Some(p)
    };
    Ok(ReportFiles { summary, plot_script: plot_script_path })
}
