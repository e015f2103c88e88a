//! CSV, SVG, and JSON artifact writers.
//!
//! The SVG renderer is deliberately minimal — axes, ticks, polylines, and
//! a legend — so reports have no plotting dependencies. Both axes support
//! log scaling; nonpositive points are dropped from log-scaled series.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::experiments::CheckResult;

/// Write a CSV file; the column order is whatever `header` says.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "row width mismatch");
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()
}

pub fn write_summary(path: &Path, value: &serde_json::Value) -> io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()
}

/// Collects an experiment's artifacts under one output directory and
/// finishes with a `summary.json` that embeds the resolved config, any
/// recorded constants/notes, the crate version, and machine-readable
/// pass/fail entries for every assertion the suite made.
pub struct Reporter {
    dir: PathBuf,
    notes: serde_json::Map<String, serde_json::Value>,
    checks: Vec<CheckResult>,
}

impl Reporter {
    pub fn new(dir: &Path, resolved_config: serde_json::Value) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        write_summary(&dir.join("resolved_config.json"), &resolved_config)?;
        let mut notes = serde_json::Map::new();
        notes.insert("config".into(), resolved_config);
        Ok(Reporter {
            dir: dir.to_path_buf(),
            notes,
            checks: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
        write_csv(&self.dir.join(name), header, rows)
    }

    pub fn svg(&self, name: &str, plot: &LinePlot) -> io::Result<()> {
        plot.save(&self.dir.join(name))
    }

    pub fn note(&mut self, key: &str, value: serde_json::Value) {
        self.notes.insert(key.into(), value);
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult::new(name, passed, detail));
    }

    /// Write `summary.json` and hand back the checks for printing.
    pub fn finish(mut self) -> io::Result<Vec<CheckResult>> {
        self.notes
            .insert("version".into(), env!("CARGO_PKG_VERSION").into());
        let checks: Vec<serde_json::Value> = self
            .checks
            .iter()
            .map(|c| {
                serde_json::json!({
                    "name": c.name,
                    "passed": c.passed,
                    "detail": c.detail,
                })
            })
            .collect();
        self.notes.insert("checks".into(), checks.into());
        write_summary(
            &self.dir.join("summary.json"),
            &serde_json::Value::Object(self.notes),
        )?;
        Ok(self.checks)
    }
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Clone, Debug)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Vertical marker lines (e.g. interval break points).
    pub vlines: Vec<f64>,
}

impl LinePlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        LinePlot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
            vlines: Vec::new(),
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn with_series(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            name: name.into(),
            points,
            dashed: false,
        });
        self
    }

    pub fn with_dashed_series(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            name: name.into(),
            points,
            dashed: true,
        });
        self
    }

    pub fn with_vlines(mut self, xs: Vec<f64>) -> Self {
        self.vlines = xs;
        self
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.render())
    }

    pub fn render(&self) -> String {
        const W: f64 = 860.0;
        const H: f64 = 540.0;
        const L: f64 = 78.0;
        const R: f64 = 190.0;
        const T: f64 = 46.0;
        const B: f64 = 58.0;
        const PALETTE: [&str; 6] = [
            "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
        ];

        let tx = |v: f64| if self.log_x { v.log10() } else { v };
        let ty = |v: f64| if self.log_y { v.log10() } else { v };
        let usable = |x: f64, y: f64| {
            x.is_finite() && y.is_finite() && (!self.log_x || x > 0.0) && (!self.log_y || y > 0.0)
        };

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if usable(x, y) {
                    xs.push(tx(x));
                    ys.push(ty(y));
                }
            }
        }
        let (x0, x1) = extent(&xs);
        let (y0, y1) = extent(&ys);
        let px = |v: f64| L + (v - x0) / (x1 - x0) * (W - L - R);
        let py = |v: f64| H - B - (v - y0) / (y1 - y0) * (H - T - B);

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
             viewBox=\"0 0 {W} {H}\" font-family=\"Helvetica, Arial, sans-serif\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">{}</text>\n",
            (L + W - R) / 2.0,
            escape(&self.title)
        ));

        // Axes and ticks.
        svg.push_str(&format!(
            "<line x1=\"{L}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
            H - B,
            W - R
        ));
        svg.push_str(&format!(
            "<line x1=\"{L}\" y1=\"{T}\" x2=\"{L}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - B
        ));
        for i in 0..=5 {
            let fx = x0 + (x1 - x0) * i as f64 / 5.0;
            let sx = px(fx);
            svg.push_str(&format!(
                "<line x1=\"{sx:.1}\" y1=\"{0}\" x2=\"{sx:.1}\" y2=\"{1}\" stroke=\"black\"/>\n",
                H - B,
                H - B + 5.0
            ));
            svg.push_str(&format!(
                "<text x=\"{sx:.1}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
                H - B + 19.0,
                tick_label(fx, self.log_x)
            ));
            let fy = y0 + (y1 - y0) * i as f64 / 5.0;
            let sy = py(fy);
            svg.push_str(&format!(
                "<line x1=\"{0}\" y1=\"{sy:.1}\" x2=\"{1}\" y2=\"{sy:.1}\" stroke=\"black\"/>\n",
                L - 5.0,
                L
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"12\">{}</text>\n",
                L - 9.0,
                sy + 4.0,
                tick_label(fy, self.log_y)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
            (L + W - R) / 2.0,
            H - 14.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" \
             transform=\"rotate(-90 20 {0})\">{1}</text>\n",
            (T + H - B) / 2.0,
            escape(&self.y_label)
        ));

        // Break markers behind the data.
        for &v in &self.vlines {
            if !self.log_x || v > 0.0 {
                let sx = px(tx(v));
                if (L..=W - R).contains(&sx) {
                    svg.push_str(&format!(
                        "<line x1=\"{sx:.1}\" y1=\"{T}\" x2=\"{sx:.1}\" y2=\"{}\" \
                         stroke=\"#bbbbbb\" stroke-dasharray=\"2 4\"/>\n",
                        H - B
                    ));
                }
            }
        }

        // Series polylines and legend. Unnamed series continue the color
        // of the last named one so segment families read as one curve.
        let mut legend_row = 0usize;
        let mut color_idx = 0usize;
        for s in &self.series {
            if !s.name.is_empty() || color_idx == 0 {
                color_idx += 1;
            }
            let color = PALETTE[(color_idx - 1) % PALETTE.len()];
            let dash = if s.dashed {
                " stroke-dasharray=\"7 4\""
            } else {
                ""
            };
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|&&(x, y)| usable(x, y))
                .map(|&(x, y)| format!("{:.2},{:.2}", px(tx(x)), py(ty(y))))
                .collect();
            if !pts.is_empty() {
                svg.push_str(&format!(
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"{dash} \
                     points=\"{}\"/>\n",
                    pts.join(" ")
                ));
            }
            // Unnamed series (e.g. repeated flow segments) share the
            // first segment's legend entry.
            if !s.name.is_empty() {
                let ly = T + 18.0 * legend_row as f64 + 10.0;
                legend_row += 1;
                svg.push_str(&format!(
                    "<line x1=\"{0}\" y1=\"{ly:.1}\" x2=\"{1}\" y2=\"{ly:.1}\" \
                     stroke=\"{color}\" stroke-width=\"2\"{dash}/>\n",
                    W - R + 12.0,
                    W - R + 36.0
                ));
                svg.push_str(&format!(
                    "<text x=\"{}\" y=\"{:.1}\" font-size=\"12\">{}</text>\n",
                    W - R + 42.0,
                    ly + 4.0,
                    escape(&s.name)
                ));
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn extent(vs: &[f64]) -> (f64, f64) {
    if vs.is_empty() {
        return (0.0, 1.0);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vs {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    (lo, hi)
}

fn tick_label(transformed: f64, log: bool) -> String {
    if log {
        format!("1e{transformed:.1}")
    } else if transformed == 0.0 || (1e-3..1e5).contains(&transformed.abs()) {
        format!("{transformed:.3}")
    } else {
        format!("{transformed:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, &["k", "value"], &[vec![0.0, 1.5], vec![1.0, -2.0]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "k,value");
        assert!(lines.next().unwrap().starts_with("0.0"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn svg_contains_series_and_labels() {
        let plot = LinePlot::new("Deviation & bound", "step", "value")
            .with_series("measured", vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)])
            .with_series("bound", vec![(0.0, 2.0), (2.0, 2.0)]);
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("measured"));
        assert!(svg.contains("Deviation &amp; bound"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn log_scale_drops_nonpositive_points() {
        let plot = LinePlot::new("rates", "n", "bound")
            .log_log()
            .with_series("rhs", vec![(10.0, 1.0), (100.0, 0.1), (0.0, -1.0)]);
        let svg = plot.render();
        // Two valid points survive; the polyline has exactly two pairs.
        let poly = svg.lines().find(|l| l.contains("polyline")).unwrap();
        let pairs = poly.split('"').nth(7).unwrap().split(' ').count();
        assert_eq!(pairs, 2);
    }
}
