//! Atomic file output, plot-data CSV and minimal SVG line plots.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Columns of equal length; the first column is the abscissa of any plot.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }
}

/// Writes `series` as CSV to `path` and, with `svg`, a line plot of every
/// column against the first to `path` with extension `svg`. Returns the
/// file names written. Nothing is written for an empty or ragged series.
pub fn emit_plot_data(series: &Series, path: &Path, svg: bool) -> Result<Vec<PathBuf>, CliError> {
    if series.columns.is_empty() || series.rows.is_empty() {
        return Err(CliError::Input(format!("no data to write to {}", path.display())));
    }
    if let Some(bad) = series.rows.iter().find(|r| r.len() != series.columns.len()) {
        return Err(CliError::Input(format!(
            "row of {} values for {} columns in {}",
            bad.len(),
            series.columns.len(),
            path.display()
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&series.columns).map_err(|e| CliError::io(path, e))?;
    for row in &series.rows {
        w.write_record(row.iter().map(f64::to_string)).map_err(|e| CliError::io(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    write_atomic(path, &bytes)?;
    let mut written = vec![path.to_path_buf()];
    if svg && series.columns.len() > 1 {
        let svg_path = path.with_extension("svg");
        write_atomic(&svg_path, render_svg(series).as_bytes())?;
        written.push(svg_path);
    }
    Ok(written)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot of columns `1..` against column 0; non-finite points break
/// the line.
pub fn render_svg(series: &Series) -> String {
    let finite = |v: &f64| v.is_finite();
    let xs = series.rows.iter().map(|r| r[0]).filter(finite);
    let ys = series.rows.iter().flat_map(|r| r[1..].iter().copied()).filter(finite);
    let (x_lo, x_hi) = bounds(xs);
    let (y_lo, y_hi) = bounds(ys);
    let px = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ =
            writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" font-size="11" text-anchor="{anchor}">{}</text>"#, escape(text));
    };
    label(&mut s, MARGIN, HEIGHT - MARGIN + 15.0, "start", &format!("{x_lo:.4}"));
    label(&mut s, WIDTH - MARGIN, HEIGHT - MARGIN + 15.0, "end", &format!("{x_hi:.4}"));
    label(&mut s, WIDTH / 2.0, HEIGHT - 10.0, "middle", &series.columns[0]);
    label(&mut s, MARGIN - 5.0, HEIGHT - MARGIN, "end", &format!("{y_lo:.3e}"));
    label(&mut s, MARGIN - 5.0, MARGIN + 4.0, "end", &format!("{y_hi:.3e}"));
    for (j, name) in series.columns.iter().enumerate().skip(1) {
        let color = COLORS[(j - 1) % COLORS.len()];
        for run in series.rows.split(|r| !(r[0].is_finite() && r[j].is_finite())) {
            if run.len() < 2 {
                continue;
            }
            let points: Vec<String> = run.iter().map(|r| format!("{:.2},{:.2}", px(r[0]), py(r[j]))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                points.join(" ")
            );
        }
        if series.columns.len() <= 1 + COLORS.len() {
            label(&mut s, WIDTH - MARGIN - 5.0, MARGIN + 14.0 * j as f64, "end", name);
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Range of the values, widened when degenerate.
fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
