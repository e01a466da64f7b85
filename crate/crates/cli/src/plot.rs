use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    /// Sampled limit lines of an `SL(3)` limit report in an affine chart.
    LimitSetRp2,
    /// `log ε` against prefix length with the fitted lines of an Anosov report.
    ExpansionGrowth,
    /// Histogram of the margins recorded in a report.
    MarginHistogram,
    /// Normalized Cartan paths `δ(w_n)/n` of an `SL(3)` Anosov report in gap
    /// coordinates.
    DeltaProjection,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::LimitSetRp2 => "limit-set-rp2",
            PlotKind::ExpansionGrowth => "expansion-growth",
            PlotKind::MarginHistogram => "margin-histogram",
            PlotKind::DeltaProjection => "delta-projection",
        }
    }
}

#[derive(Debug)]
pub struct PlotError(pub String);

impl std::fmt::Display for PlotError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "plot error: {}", self.0)
    }
}

impl std::error::Error for PlotError {}

fn fail(msg: impl Into<String>) -> PlotError {
    PlotError(msg.into())
}

/// Reads a report file written by `run` and writes `<stem>-<kind>.csv` and
/// `<stem>-<kind>.svg` into `out_dir`. Reports without the relevant data
/// produce a CSV holding only the header and an empty chart.
pub fn emit_plot(
    report: &Path,
    kind: PlotKind,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf), PlotError> {
    let text =
        std::fs::read_to_string(report).map_err(|e| fail(format!("{}: {e}", report.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| fail(format!("{}: {e}", report.display())))?;
    let table = match kind {
        PlotKind::LimitSetRp2 => limit_set_rp2(&value)?,
        PlotKind::ExpansionGrowth => expansion_growth(&value),
        PlotKind::MarginHistogram => margin_histogram(&value),
        PlotKind::DeltaProjection => delta_projection(&value)?,
    };
    std::fs::create_dir_all(out_dir).map_err(|e| fail(format!("{}: {e}", out_dir.display())))?;
    let stem = report
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report");
    let csv_path = out_dir.join(format!("{stem}-{}.csv", kind.name()));
    let svg_path = out_dir.join(format!("{stem}-{}.svg", kind.name()));
    let mut writer = csv::Writer::from_path(&csv_path).map_err(|e| fail(e.to_string()))?;
    writer
        .write_record(&table.header)
        .map_err(|e| fail(e.to_string()))?;
    for row in &table.rows {
        writer
            .write_record(row.iter().map(|v| format_number(*v)))
            .map_err(|e| fail(e.to_string()))?;
    }
    writer.flush().map_err(|e| fail(e.to_string()))?;
    std::fs::write(&svg_path, table.chart.render()).map_err(|e| fail(e.to_string()))?;
    Ok((csv_path, svg_path))
}

fn format_number(v: f64) -> String {
    format!("{v}")
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    chart: Chart,
}

fn series<'a>(value: &'a Value, name: &str) -> Option<&'a Vec<Value>> {
    value.pointer("/report/series")?.get(name)?.as_array()
}

fn numbers(values: &[Value]) -> Vec<f64> {
    values
        .iter()
        .map(|v| v.as_f64().unwrap_or(f64::NAN))
        .collect()
}

/// Series whose names start with `prefix`, in name order.
fn prefixed_series(value: &Value, prefix: &str) -> Vec<Vec<f64>> {
    value
        .pointer("/report/series")
        .and_then(Value::as_object)
        .map(|m| {
            m.iter()
                .filter(|(k, _)| k.starts_with(prefix))
                .map(|(_, v)| numbers(v.as_array().map(Vec::as_slice).unwrap_or(&[])))
                .collect()
        })
        .unwrap_or_default()
}

fn limit_set_rp2(value: &Value) -> Result<Table, PlotError> {
    let samples = value
        .get("samples")
        .and_then(Value::as_array)
        .cloned()
        .unwrap_or_default();
    let lines: Vec<[f64; 3]> = samples
        .iter()
        .map(|s| {
            let frame = numbers(
                s.get("frame")
                    .and_then(Value::as_array)
                    .map(Vec::as_slice)
                    .unwrap_or(&[]),
            );
            if frame.len() != 9 {
                return Err(fail("limit-set-rp2 needs flags in dimension 3"));
            }
            // first column of the row-major frame
            Ok([frame[0], frame[3], frame[6]])
        })
        .collect::<Result<_, _>>()?;
    let (c, e1, e2) = affine_chart(&lines);
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let rows: Vec<Vec<f64>> = lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let h = dot(l, &c);
            vec![i as f64, dot(l, &e1) / h, dot(l, &e2) / h]
        })
        .collect();
    let mut chart = Chart::new("limit set in an affine chart of RP2", "x", "y");
    chart.points(rows.iter().map(|r| (r[1], r[2])).collect());
    Ok(Table {
        header: vec!["ray", "x", "y"],
        rows,
        chart,
    })
}

/// Affine chart `v ↦ (⟨v,e₁⟩, ⟨v,e₂⟩) / ⟨v,c⟩` whose line at infinity `c^⊥`
/// stays as far as possible from the given lines, chosen among a fixed
/// spiral of directions.
fn affine_chart(lines: &[[f64; 3]]) -> ([f64; 3], [f64; 3], [f64; 3]) {
    const CANDIDATES: usize = 2000;
    let mut best = ([0.0, 0.0, 1.0], f64::NEG_INFINITY);
    for k in 0..CANDIDATES {
        // upper half of a Fibonacci sphere
        let z = 1.0 - (k as f64 + 0.5) / CANDIDATES as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = k as f64 * std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let c = [r * phi.cos(), r * phi.sin(), z];
        let least = lines
            .iter()
            .map(|l| (l[0] * c[0] + l[1] * c[1] + l[2] * c[2]).abs())
            .fold(f64::INFINITY, f64::min);
        if least > best.1 {
            best = (c, least);
        }
    }
    let c = best.0;
    let pick = if c[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let d = pick[0] * c[0] + pick[1] * c[1] + pick[2] * c[2];
    let mut e1 = [pick[0] - d * c[0], pick[1] - d * c[1], pick[2] - d * c[2]];
    let norm = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|x| *x /= norm);
    let e2 = [
        c[1] * e1[2] - c[2] * e1[1],
        c[2] * e1[0] - c[0] * e1[2],
        c[0] * e1[1] - c[1] * e1[0],
    ];
    (c, e1, e2)
}

fn expansion_growth(value: &Value) -> Table {
    let paths = prefixed_series(value, "log_expansion/");
    let slopes = series(value, "slopes")
        .map(|v| numbers(v))
        .unwrap_or_default();
    let intercepts = series(value, "intercepts")
        .map(|v| numbers(v))
        .unwrap_or_default();
    let mut rows = Vec::new();
    let mut chart = Chart::new(
        "expansion along boundary rays",
        "prefix length",
        "log expansion",
    );
    for (r, path) in paths.iter().enumerate() {
        let (slope, intercept) = (
            slopes.get(r).copied().unwrap_or(f64::NAN),
            intercepts.get(r).copied().unwrap_or(f64::NAN),
        );
        let mut pts = Vec::new();
        for (i, e) in path.iter().enumerate() {
            let n = (i + 1) as f64;
            rows.push(vec![r as f64, n, *e, slope * n + intercept]);
            pts.push((n, *e));
        }
        if let (Some(first), Some(last)) = (pts.first(), pts.last()) {
            chart.line(vec![
                (first.0, slope * first.0 + intercept),
                (last.0, slope * last.0 + intercept),
            ]);
        }
        chart.points(pts);
    }
    Table {
        header: vec!["ray", "n", "log_expansion", "fit"],
        rows,
        chart,
    }
}

const HISTOGRAM_BINS: usize = 20;

/// Margins are taken from `pair_margins` (limit reports) or the per-length
/// margin ratios (URU reports).
fn margin_histogram(value: &Value) -> Table {
    let values: Vec<f64> = ["pair_margins", "min_ratio_by_length"]
        .iter()
        .find_map(|name| series(value, name))
        .map(|v| numbers(v).into_iter().filter(|x| x.is_finite()).collect())
        .unwrap_or_default();
    let mut rows = Vec::new();
    let mut chart = Chart::new("margin histogram", "margin", "count");
    if !values.is_empty() {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo {
            (hi - lo) / HISTOGRAM_BINS as f64
        } else {
            1.0
        };
        let mut counts = [0usize; HISTOGRAM_BINS];
        for v in &values {
            counts[(((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1)] += 1;
        }
        for (i, c) in counts.iter().enumerate() {
            let start = lo + i as f64 * width;
            rows.push(vec![start, start + width, *c as f64]);
        }
        chart.bars(rows.iter().map(|r| (r[0], r[1], r[2])).collect());
    }
    Table {
        header: vec!["bin_start", "bin_end", "count"],
        rows,
        chart,
    }
}

fn delta_projection(value: &Value) -> Result<Table, PlotError> {
    let paths = prefixed_series(value, "cartan/");
    let mut rows = Vec::new();
    let mut chart = Chart::new("normalized Cartan projections", "gap 1", "gap 2");
    for (r, path) in paths.iter().enumerate() {
        if path.len() % 3 != 0 {
            return Err(fail("delta-projection needs Cartan vectors in dimension 3"));
        }
        let mut pts = Vec::new();
        for (i, c) in path.chunks(3).enumerate() {
            let n = (i + 1) as f64;
            let (g1, g2) = ((c[0] - c[1]) / n, (c[1] - c[2]) / n);
            rows.push(vec![r as f64, n, g1, g2]);
            pts.push((g1, g2));
        }
        chart.line(pts);
    }
    Ok(Table {
        header: vec!["ray", "n", "gap1", "gap2"],
        rows,
        chart,
    })
}

enum Mark {
    Points(Vec<(f64, f64)>),
    Line(Vec<(f64, f64)>),
    Bars(Vec<(f64, f64, f64)>),
}

/// Minimal SVG chart with a bounding box fitted to the data.
struct Chart {
    title: String,
    xlabel: String,
    ylabel: String,
    marks: Vec<Mark>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const PAD: f64 = 50.0;

impl Chart {
    fn new(title: &str, xlabel: &str, ylabel: &str) -> Self {
        Self {
            title: title.into(),
            xlabel: xlabel.into(),
            ylabel: ylabel.into(),
            marks: Vec::new(),
        }
    }

    fn points(&mut self, p: Vec<(f64, f64)>) {
        self.marks.push(Mark::Points(p));
    }

    fn line(&mut self, p: Vec<(f64, f64)>) {
        self.marks.push(Mark::Line(p));
    }

    fn bars(&mut self, b: Vec<(f64, f64, f64)>) {
        self.marks.push(Mark::Bars(b));
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for m in &self.marks {
            match m {
                Mark::Points(p) | Mark::Line(p) => p.iter().for_each(|&(x, y)| {
                    xs.push(x);
                    ys.push(y);
                }),
                Mark::Bars(b) => b.iter().for_each(|&(a, c, h)| {
                    xs.extend([a, c]);
                    ys.extend([0.0, h]);
                }),
            }
        }
        let range = |v: &[f64]| {
            let v: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = range(&xs);
        let (y0, y1) = range(&ys);
        (x0, x1, y0, y1)
    }

    fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * PAD);
        let sy = |y: f64| HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * PAD);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            self.title
        );
        let _ = writeln!(
            s,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * PAD,
            HEIGHT - 2.0 * PAD
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            self.xlabel
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            self.ylabel
        );
        let _ = writeln!(
            s,
            r#"<text x="{PAD}" y="{}" font-size="10">{x0:.3}</text>"#,
            HEIGHT - PAD + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{x1:.3}</text>"#,
            WIDTH - PAD,
            HEIGHT - PAD + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{y0:.3}</text>"#,
            PAD - 4.0,
            HEIGHT - PAD
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{y1:.3}</text>"#,
            PAD - 4.0,
            PAD + 10.0
        );
        for m in &self.marks {
            match m {
                Mark::Points(p) => {
                    for &(x, y) in p.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue"/>"#,
                            sx(x),
                            sy(y)
                        );
                    }
                }
                Mark::Line(p) => {
                    let pts: Vec<String> = p
                        .iter()
                        .filter(|(x, y)| x.is_finite() && y.is_finite())
                        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="firebrick" stroke-width="1"/>"#,
                        pts.join(" ")
                    );
                }
                Mark::Bars(b) => {
                    for &(a, c, h) in b {
                        let _ = writeln!(
                            s,
                            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="steelblue" stroke="white"/>"#,
                            sx(a),
                            sy(h),
                            sx(c) - sx(a),
                            sy(0.0) - sy(h)
                        );
                    }
                }
            }
        }
        s.push_str("</svg>\n");
        s
    }
}
