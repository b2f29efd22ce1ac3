//! Schema-versioned JSON reports and log-log SVG plots.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use rieszlab_core::fit::LineFit;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    /// 95% interval for the slope.
    pub slope_interval: [f64; 2],
    pub residual_std_error: f64,
    pub points: usize,
    pub target: Option<f64>,
}

impl FitRecord {
    pub fn new(name: &str, fit: &LineFit, target: Option<f64>) -> Self {
        let (lo, hi) = fit.slope_interval();
        Self {
            name: name.into(),
            slope: fit.slope,
            intercept: fit.intercept,
            slope_interval: [lo, hi],
            residual_std_error: fit.residual_std_error,
            points: fit.points,
            target,
        }
    }
}

/// Outcome of one check against a declared threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    /// The property being tested.
    pub invariant: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    /// `false` for negative controls, which are expected to fail.
    pub expect_pass: bool,
}

impl Verdict {
    /// Whether the verdict came out as expected.
    pub fn as_expected(&self) -> bool {
        self.passed == self.expect_pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    pub graph: Option<String>,
    pub seed: Option<u64>,
    pub parameters: serde_json::Value,
    pub tables: Vec<Table>,
    pub fits: Vec<FitRecord>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
    /// Excluded from [`Report::canonical`].
    pub wall_clock_seconds: Option<f64>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            graph: None,
            seed: None,
            parameters: serde_json::Value::Null,
            tables: Vec::new(),
            fits: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
            wall_clock_seconds: None,
        }
    }

    pub fn with_graph(mut self, graph: impl Into<String>) -> Self {
        self.graph = Some(graph.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_parameters<T: Serialize>(mut self, params: &T) -> Self {
        self.parameters = serde_json::to_value(params).unwrap_or(serde_json::Value::Null);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Records `value <= threshold`.
    pub fn check_at_most(&mut self, name: &str, invariant: &str, value: f64, threshold: f64) -> bool {
        self.push_verdict(name, invariant, value <= threshold, value, threshold, true)
    }

    /// Records a negative control that is expected to fail `value <= threshold`.
    pub fn control_at_most(&mut self, name: &str, invariant: &str, value: f64, threshold: f64) -> bool {
        self.push_verdict(name, invariant, value <= threshold, value, threshold, false)
    }

    fn push_verdict(
        &mut self,
        name: &str,
        invariant: &str,
        passed: bool,
        value: f64,
        threshold: f64,
        expect_pass: bool,
    ) -> bool {
        self.verdicts.push(Verdict {
            name: name.into(),
            invariant: invariant.into(),
            passed,
            value,
            threshold,
            expect_pass,
        });
        passed
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn fit(&self, name: &str) -> Option<&FitRecord> {
        self.fits.iter().find(|f| f.name == name)
    }

    /// All verdicts (negative controls included) came out as expected.
    pub fn all_as_expected(&self) -> bool {
        self.verdicts.iter().all(Verdict::as_expected)
    }

    /// Copy without wall-clock data; identical across reruns with the same inputs.
    pub fn canonical(&self) -> Self {
        Self {
            wall_clock_seconds: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Times `body` and stores the elapsed seconds.
    pub fn timed<T>(&mut self, body: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = body(self);
        self.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
        out
    }
}

/// One named series of a plot.
pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Log-log scatter/line plot of positive data. Nonpositive points are skipped.
pub fn loglog_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let logged: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
                .map(|(x, y)| (x.log10(), y.log10()))
                .collect()
        })
        .collect();
    let all = logged.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD} {PAD} V{} H{}" stroke="black" fill="none"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{} (log10 {:.3} .. {:.3})</text>"#,
        W / 2.0,
        H - 20.0,
        escape(x_label),
        x0,
        x1
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{} (log10 {:.3} .. {:.3})</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label),
        y0,
        y1
    );
    for (i, (s, pts)) in series.iter().zip(&logged).enumerate() {
        let color = COLORS[i % COLORS.len()];
        if pts.len() > 1 {
            let path: Vec<String> = pts
                .iter()
                .enumerate()
                .map(|(j, &(x, y))| format!("{}{:.2} {:.2}", if j == 0 { "M" } else { "L" }, sx(x), sy(y)))
                .collect();
            let _ = writeln!(svg, r#"<path d="{}" stroke="{color}" fill="none"/>"#, path.join(" "));
        }
        for &(x, y) in pts {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - PAD - 120.0,
            PAD + 16.0 * i as f64,
            escape(s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
