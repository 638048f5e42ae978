//! CSV series and plot scripts.

use std::io::Write;
use std::path::{Path, PathBuf};

use bohr_chowla::averaging::fmt17;
use bohr_chowla::correlator::CorrelationReport;

pub const CSV_HEADER: &str = "X,log_avg_re,log_avg_im,natural_avg_re,natural_avg_im";

/// Checkpoint series of a report; the logarithmic columns are `H_X`-normalised.
pub fn write_csv<W: Write>(report: &CorrelationReport, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", CSV_HEADER)?;
    let s = &report.series;
    for i in 0..s.checkpoints.len() {
        let (l, n) = (report.normalized[i], s.natural_values[i]);
        writeln!(w, "{},{},{},{},{}", s.checkpoints[i], fmt17(l.re), fmt17(l.im), fmt17(n.re), fmt17(n.im))?;
    }
    Ok(())
}

pub fn emit_csv(report: &CorrelationReport, path: &Path) -> std::io::Result<()> {
    let mut buf = Vec::new();
    write_csv(report, &mut buf)?;
    std::fs::write(path, buf)
}

/// Path of `target` as seen from the directory holding `from`.
fn relative_to(target: &Path, from: &Path) -> PathBuf {
    let base = from.parent().unwrap_or(Path::new(""));
    match target.strip_prefix(base) {
        Ok(p) if !base.as_os_str().is_empty() => p.to_path_buf(),
        _ => target.to_path_buf(),
    }
}

/// gnuplot commands for the series in `csv`.
pub fn plot_script(report: &CorrelationReport, csv: &Path, title: &str) -> String {
    let cps = &report.series.checkpoints;
    let csv = csv.to_string_lossy().replace('"', "\\\"");
    let mut s = String::new();
    s.push_str(&format!("set title \"{}\"\n", title.replace('"', "'")));
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set logscale x 10\n");
    s.push_str("set xlabel \"X\"\n");
    if let (Some(lo), Some(hi)) = (cps.first(), cps.last()) {
        s.push_str(&format!("set xrange [{}:{}]\n", lo, hi));
    }
    let mut plots = vec![
        format!("\"{}\" using 1:2 with linespoints title \"log average (Re)\"", csv),
        format!("\"{}\" using 1:4 with linespoints title \"natural average (Re)\"", csv),
    ];
    if let Some(p) = report.predicted_value {
        plots.push(format!("{} with lines dashtype 2 title \"predicted\"", fmt_short(p.re)));
    }
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

fn fmt_short(x: f64) -> String {
    let t = format!("{}", x);
    if t.len() <= 20 {
        t
    } else {
        fmt17(x)
    }
}

/// Writes the script to `path`, referencing `csv` relative to it.
pub fn emit_plot_script(report: &CorrelationReport, csv: &Path, path: &Path, title: &str) -> std::io::Result<()> {
    std::fs::write(path, plot_script(report, &relative_to(csv, path), title))
}
