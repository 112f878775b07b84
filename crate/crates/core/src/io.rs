//! CSV tables, ground-state persistence and minimal SVG line plots.
//!
//! Numbers are written with 17 significant digits, so every `f64` survives a
//! write/read cycle bit for bit.

use crate::error::{Error, Result};
use crate::gpsolve::{Geometry, GroundState};
use crate::numerics::linear_fit;
use crate::trap::Trap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Formats one value with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Numeric table with a mandatory header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width differs from header"
        );
        self.rows.push(row);
    }

    pub fn with_rows<R: AsRef<[f64]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Self {
        let mut t = Self::new(header);
        rows.into_iter().for_each(|r| t.push(r.as_ref().to_vec()));
        t
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Config("empty CSV: header row missing".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        if header.iter().any(|h| h.is_empty()) {
            return Err(Error::Config("CSV header has an empty column name".into()));
        }
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|_| {
                        Error::Config(format!("row {}: `{}` is not a number", k + 1, c.trim()))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != header.len() {
                return Err(Error::Config(format!(
                    "row {} has {} fields, header has {}",
                    k + 1,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Config("CSV has no data rows".into()));
        }
        Ok(Self { header, rows })
    }
}

/// Writes `text`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    write_text(path, &table.to_csv())
}

pub fn read_csv(path: &Path) -> Result<Table> {
    Table::parse(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum GeometryMeta {
    Radial,
    Grid2d { half: f64, n: usize, h: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StateMeta {
    epsilon: f64,
    lambda_eps: f64,
    mass: f64,
    iterations: usize,
    residual: f64,
    trap: Trap,
    geometry: GeometryMeta,
}

/// Nodal table of a state: `r,weight,eta,eta_r,w` (last row is `r_max`) or row-major `y1,y2,eta`.
pub fn state_table(state: &GroundState) -> Table {
    match &state.geometry {
        Geometry::Radial { r, weights } => {
            let n = state.eta.len();
            let d = state.eta_r().expect("radial state");
            let edge = -state.eta[n - 1] / (r[n] - r[n - 1]);
            Table::with_rows(
                &["r", "weight", "eta", "eta_r", "w"],
                (0..=n).map(|i| {
                    let w = state.trap.w_radial(r[i]);
                    if i < n {
                        [r[i], weights[i], state.eta[i], d[i], w]
                    } else {
                        [r[n], 0.0, 0.0, edge, w]
                    }
                }),
            )
        }
        Geometry::Grid2d { .. } => Table::with_rows(
            &["y1", "y2", "eta"],
            state
                .points()
                .iter()
                .zip(&state.eta)
                .map(|(p, &e)| [p[0], p[1], e]),
        ),
    }
}

/// Persists `state` as `<stem>.csv` plus `<stem>.json`.
pub fn write_state(dir: &Path, stem: &str, state: &GroundState) -> Result<()> {
    let geometry = match &state.geometry {
        Geometry::Radial { .. } => GeometryMeta::Radial,
        Geometry::Grid2d { half, n, h } => GeometryMeta::Grid2d {
            half: *half,
            n: *n,
            h: *h,
        },
    };
    let meta = StateMeta {
        epsilon: state.epsilon,
        lambda_eps: state.lambda_eps,
        mass: state.mass,
        iterations: state.iterations,
        residual: state.residual,
        trap: state.trap.clone(),
        geometry,
    };
    write_csv(&dir.join(format!("{stem}.csv")), &state_table(state))?;
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Config(e.to_string()))?;
    write_text(&dir.join(format!("{stem}.json")), &(json + "\n"))
}

/// Inverse of [`write_state`].
pub fn read_state(dir: &Path, stem: &str) -> Result<GroundState> {
    let text = fs::read_to_string(dir.join(format!("{stem}.json")))?;
    let meta: StateMeta =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{stem}.json: {e}")))?;
    let table = read_csv(&dir.join(format!("{stem}.csv")))?;
    let col = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| Error::Config(format!("{stem}.csv lacks column `{name}`")))
    };
    let (geometry, eta) = match meta.geometry {
        GeometryMeta::Radial => {
            let (r, mut w, mut eta) = (col("r")?, col("weight")?, col("eta")?);
            w.pop();
            eta.pop();
            (Geometry::Radial { r, weights: w }, eta)
        }
        GeometryMeta::Grid2d { half, n, h } => {
            let eta = col("eta")?;
            if eta.len() != n * n {
                return Err(Error::Config(format!(
                    "{stem}.csv has {} rows, expected {}",
                    eta.len(),
                    n * n
                )));
            }
            (Geometry::Grid2d { half, n, h }, eta)
        }
    };
    Ok(GroundState {
        epsilon: meta.epsilon,
        trap: meta.trap,
        geometry,
        eta,
        lambda_eps: meta.lambda_eps,
        mass: meta.mass,
        iterations: meta.iterations,
        residual: meta.residual,
    })
}

/// Axis scaling of a plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axes {
    Linear,
    /// Log–log axes with a least-squares line through the first series.
    LogLogFit,
}

const W: f64 = 720.0;
const H: f64 = 440.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0);
const COLOURS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace("--", "- -")
}

/// Line plot of every column against the first one.
pub fn svg_plot(table: &Table, title: &str, axes: Axes, source: &str) -> Result<String> {
    if table.header.len() < 2 {
        return Err(Error::Config(format!(
            "{source}: a plot needs at least two columns"
        )));
    }
    let log = axes == Axes::LogLogFit;
    let tx = |v: f64| if log { v.log10() } else { v };
    let series: Vec<Vec<(f64, f64)>> = (1..table.header.len())
        .map(|c| {
            table
                .rows
                .iter()
                .filter(|r| {
                    r[0].is_finite() && r[c].is_finite() && (!log || (r[0] > 0.0 && r[c] > 0.0))
                })
                .map(|r| (tx(r[0]), tx(r[c])))
                .collect()
        })
        .collect();
    let all = series.iter().flatten();
    let (x0, x1, y0, y1) = all.fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |b, &(x, y)| (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y)),
    );
    if !x0.is_finite() || !y0.is_finite() {
        return Err(Error::Config(format!("{source}: no plottable values")));
    }
    let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, b + 0.5) };
    let ((x0, x1), (y0, y1)) = (pad(x0, x1), pad(y0, y1));
    let (ml, mr, mt, mb) = MARGIN;
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (W - ml - mr);
    let py = |y: f64| H - mb - (y - y0) / (y1 - y0) * (H - mt - mb);
    let digest = Sha256::digest(table.to_csv().as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, "<!-- source: {} -->", escape(source));
    let _ = writeln!(s, "<!-- columns: {} -->", escape(&table.header.join(",")));
    let _ = writeln!(s, "<!-- rows: {} sha256: {hex} -->", table.rows.len());
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - ml - mr,
        H - mt - mb
    );
    let label = |v: f64| {
        if log {
            format!("1e{v:.2}")
        } else {
            format!("{v:.4}")
        }
    };
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            px(xv),
            H - mb + 16.0,
            label(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            ml - 4.0,
            py(yv) + 4.0,
            label(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        mt - 12.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 10.0,
        escape(&table.header[0])
    );
    for (k, pts) in series.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="{colour}">{}</text>"#,
            ml + 8.0,
            mt + 16.0 * (k + 1) as f64,
            escape(&table.header[k + 1])
        );
    }
    if log && series[0].len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = series[0].iter().copied().unzip();
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="5,4"/>"#,
            px(x0),
            py(intercept + slope * x0),
            px(x1),
            py(intercept + slope * x1)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">fit slope {slope:.4}, r² {r2:.5}</text>"#,
            W - mr - 8.0,
            H - mb - 10.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Renders one SVG per CSV into `out`; files named `rate*.csv` get log–log axes with a fit.
pub fn emit_plots(csvs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for csv in csvs {
        let stem = csv
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Config(format!("bad file name {}", csv.display())))?;
        let table = read_csv(csv)?;
        let axes = if stem.starts_with("rate") {
            Axes::LogLogFit
        } else {
            Axes::Linear
        };
        let name = csv.file_name().and_then(|s| s.to_str()).unwrap_or(stem);
        let svg = svg_plot(&table, stem, axes, name)?;
        let path = out.join(format!("{stem}.svg"));
        write_text(&path, &svg)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let vals = [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            std::f64::consts::PI,
        ];
        let t = Table::with_rows(&["a", "b"], vals.iter().map(|&v| [v, -v]));
        let back = Table::parse(&t.to_csv()).unwrap();
        assert_eq!(t, back);
        for (r, v) in back.rows.iter().zip(vals) {
            assert_eq!(r[0].to_bits(), v.to_bits());
        }
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(Table::parse("").is_err());
        assert!(Table::parse("x,v\n").is_err());
        assert!(Table::parse("x,v\n1,2,3\n").is_err());
        assert!(Table::parse("x,v\n1,abc\n").is_err());
    }

    #[test]
    fn plot_has_one_polyline_per_column() {
        let t = Table::with_rows(
            &["x", "v", "vx"],
            (0..10).map(|k| [k as f64, (k * k) as f64, 2.0 * k as f64]),
        );
        let svg = svg_plot(&t, "hm", Axes::Linear, "hm.csv").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("<!-- source: hm.csv -->"));
    }
}
