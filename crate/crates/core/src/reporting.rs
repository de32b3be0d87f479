//! Run logs (CSV), experiment reports (JSON), the comparison table and
//! convergence charts (SVG).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coverage::CoverageModelDesc;
use crate::dut::{DutKind, ResponseVector, StimulusVector, TestStatus};
use crate::engine::{ClosureResult, EngineConfig, Method, RunRecord};
use crate::error::{Error, Result};
use crate::stimulus::{Constraint, Phase, StimulusSource};

pub const REPORT_SCHEMA: u32 = 1;
pub const LOG_HEADER: [&str; 8] = [
    "iteration",
    "phase",
    "source",
    "stimulus_hex",
    "response_hex",
    "status",
    "newly_hit",
    "coverage",
];

fn hex_join(values: &[u64]) -> String {
    values.iter().map(|v| format!("{v:x}")).collect::<Vec<_>>().join("|")
}

fn hex_split(field: &str) -> Result<Vec<u64>> {
    field
        .split('|')
        .map(|h| u64::from_str_radix(h, 16).map_err(|_| Error::Parse(format!("bad hex value `{h}`"))))
        .collect()
}

/// Renders records in the run-log CSV schema.
pub fn format_run_log(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(LOG_HEADER)?;
    for r in records {
        let newly: Vec<String> = r.newly_hit.iter().map(|b| b.to_string()).collect();
        w.write_record([
            r.iteration.to_string(),
            r.phase.to_string(),
            r.source.to_string(),
            hex_join(&r.stimulus.0),
            hex_join(&r.response.0),
            r.status.to_string(),
            newly.join(";"),
            format!("{:.6}", r.coverage),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are ASCII"))
}

pub fn write_run_log(records: &[RunRecord], path: &Path) -> Result<()> {
    fs::write(path, format_run_log(records)?).map_err(|e| Error::io(path, e))
}

/// Parses a run log. Coverage comes back rounded to six decimals.
pub fn parse_run_log(text: &str) -> Result<Vec<RunRecord>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(LOG_HEADER) {
        return Err(Error::Parse("unexpected run-log header".into()));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let field = |i: usize| row.get(i).ok_or_else(|| Error::Parse("short row".into()));
        let phase = match field(1)? {
            "TRAIN" => Phase::Train,
            "TEST" => Phase::Test,
            other => return Err(Error::Parse(format!("bad phase `{other}`"))),
        };
        let source = match field(2)? {
            "RANDOM" => StimulusSource::Random,
            "MODEL" => StimulusSource::Model,
            other => return Err(Error::Parse(format!("bad source `{other}`"))),
        };
        let status = match field(5)? {
            "PASS" => TestStatus::Pass,
            "FAIL" => TestStatus::Fail,
            other => return Err(Error::Parse(format!("bad status `{other}`"))),
        };
        let newly = field(6)?;
        let newly_hit = if newly.is_empty() {
            Vec::new()
        } else {
            newly
                .split(';')
                .map(|b| b.parse().map_err(|_| Error::Parse(format!("bad bin id `{b}`"))))
                .collect::<Result<_>>()?
        };
        records.push(RunRecord {
            iteration: field(0)?.parse().map_err(|_| Error::Parse("bad iteration".into()))?,
            phase,
            source,
            stimulus: StimulusVector(hex_split(field(3)?)?),
            response: ResponseVector(hex_split(field(4)?)?),
            status,
            newly_hit,
            coverage: field(7)?.parse().map_err(|_| Error::Parse("bad coverage".into()))?,
        });
    }
    Ok(records)
}

/// (iteration, coverage) points of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    pub points: Vec<(u64, f64)>,
}

impl ConvergenceCurve {
    /// Starts at `(0, 0)` and adds a point after every transaction that
    /// raised coverage, plus the final transaction count.
    pub fn from_records(records: &[RunRecord]) -> Self {
        let mut points = vec![(0, 0.0)];
        for r in records {
            if !r.newly_hit.is_empty() {
                points.push((r.iteration + 1, r.coverage));
            }
        }
        let end = records.len() as u64;
        if points.last().is_some_and(|&(i, _)| i < end) {
            let c = records.last().map_or(0.0, |r| r.coverage);
            points.push((end, c));
        }
        ConvergenceCurve { points }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::Precondition("a curve needs at least two points".into()));
        }
        for w in self.points.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::Precondition(
                    "curve iterations must increase and coverage must not decrease".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed_index: usize,
    pub seed: u64,
    pub converged: bool,
    /// Test-phase transactions to closure; `None` when the cap was hit.
    pub iterations: Option<u64>,
    pub total_iterations: u64,
    pub final_coverage: f64,
    pub holes_at_test_start: usize,
    /// Final hit count per flattened bin id.
    pub bin_hits: Vec<u64>,
    pub curve: Vec<(u64, f64)>,
}

impl SeedOutcome {
    pub fn from_result(seed_index: usize, seed: u64, result: &ClosureResult) -> Self {
        SeedOutcome {
            seed_index,
            seed,
            converged: result.converged,
            iterations: result.converged.then_some(result.test_iterations),
            total_iterations: result.total_iterations,
            final_coverage: result.final_coverage,
            holes_at_test_start: result.holes_at_test_start,
            bin_hits: result.bin_hits.clone(),
            curve: result.curve().points,
        }
    }
}

/// Median with non-converged runs ranked above every converged one.
/// `None` when the median itself falls on a non-converged run.
pub fn median_iterations(values: &[Option<u64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<Option<u64>> = values.to_vec();
    sorted.sort_by_key(|v| v.map_or((1, 0), |x| (0, x)));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2].map(|x| x as f64)
    } else {
        Some((sorted[n / 2 - 1]? as f64 + sorted[n / 2]? as f64) / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub width: u32,
    pub method: Method,
    pub median_iterations: Option<f64>,
    pub min_iterations: Option<u64>,
    /// `None` if any seed failed to converge.
    pub max_iterations: Option<u64>,
    pub converged_seeds: usize,
    pub seeds: Vec<SeedOutcome>,
}

impl CellReport {
    pub fn new(width: u32, method: Method, seeds: Vec<SeedOutcome>) -> Self {
        let its: Vec<Option<u64>> = seeds.iter().map(|s| s.iterations).collect();
        let converged: Vec<u64> = its.iter().flatten().copied().collect();
        CellReport {
            width,
            method,
            median_iterations: median_iterations(&its),
            min_iterations: converged.iter().min().copied(),
            max_iterations: if converged.len() == its.len() {
                converged.iter().max().copied()
            } else {
                None
            },
            converged_seeds: converged.len(),
            seeds,
        }
    }

    pub fn converged(&self) -> bool {
        self.median_iterations.is_some()
    }
}

/// Echo of the experiment's inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSettings {
    pub dut: DutKind,
    pub widths: Vec<u32>,
    pub seeds_per_width: usize,
    pub coverage_model: Option<CoverageModelDesc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constraints: BTreeMap<String, Constraint>,
    pub engine: EngineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub tool_version: String,
    /// The only field that varies between identical reruns.
    pub timestamp: String,
    pub config: ExperimentSettings,
    pub cells: Vec<CellReport>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentSettings, cells: Vec<CellReport>) -> Self {
        ExperimentReport {
            schema: REPORT_SCHEMA,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            cells,
        }
    }

    pub fn cell(&self, width: u32, method: Method) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.width == width && c.method == method)
    }

    pub fn cap(&self) -> usize {
        self.config.engine.iteration_cap
    }
}

/// Rewrites integral floats as JSON integers.
fn integralize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            if x.fract() == 0.0 && x.abs() < 9.007_199_254_740_992e15 {
                *v = Value::from(x as i64);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(integralize),
        Value::Object(map) => map.values_mut().for_each(integralize),
        _ => {}
    }
}

pub fn format_report_json(report: &ExperimentReport) -> Result<String> {
    let mut value = serde_json::to_value(report)?;
    integralize(&mut value);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_report_json(report: &ExperimentReport, path: &Path) -> Result<()> {
    fs::write(path, format_report_json(report)?).map_err(|e| Error::io(path, e))
}

pub fn read_report_json(path: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: ExperimentReport = serde_json::from_str(&text)?;
    if report.schema != REPORT_SCHEMA {
        return Err(Error::Parse(format!("unsupported report schema {}", report.schema)));
    }
    Ok(report)
}

fn format_median(m: f64) -> String {
    if m.fract() == 0.0 {
        format!("{}", m as u64)
    } else {
        format!("{m:.1}")
    }
}

/// Table of median closure iterations, one row per width. Runs that did
/// not converge show as `>cap`.
pub fn format_table(report: &ExperimentReport) -> String {
    const HEADERS: [&str; 3] = ["Width", "Constrained Random Stimuli", "ANN Based Stimuli"];
    let widths = HEADERS.map(str::len);
    let row = |cols: [String; 3]| -> String {
        let mut line = String::new();
        for (i, c) in cols.iter().enumerate() {
            if i > 0 {
                line.push_str(" | ");
            }
            let _ = write!(line, "{c:<w$}", w = widths[i]);
        }
        line.trim_end().to_string()
    };
    let mut out = String::new();
    out.push_str(&row(HEADERS.map(String::from)));
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    let cell = |width: u32, method: Method| -> String {
        match report.cell(width, method) {
            None => "-".to_string(),
            Some(c) => match c.median_iterations {
                Some(m) => format_median(m),
                None => format!(">{}", report.cap()),
            },
        }
    };
    for &w in &report.config.widths {
        out.push_str(&row([w.to_string(), cell(w, Method::Random), cell(w, Method::Ann)]));
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Self-contained SVG line chart of coverage against iteration.
pub fn render_convergence_svg(curves: &[ConvergenceCurve], labels: &[String]) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::Precondition("nothing to plot".into()));
    }
    if labels.len() != curves.len() {
        return Err(Error::Precondition(format!(
            "{} labels for {} curves",
            labels.len(),
            curves.len()
        )));
    }
    for c in curves {
        c.validate()?;
    }
    const W: f64 = 720.0;
    const H: f64 = 440.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 180.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 50.0;
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let x_max = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let px = |i: f64| LEFT + plot_w * i / x_max;
    let py = |c: f64| TOP + plot_h * (1.0 - c);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let c = k as f64 / 4.0;
        let y = py(c);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let tick = if k % 2 == 0 {
            format!("{c:.1}")
        } else {
            format!("{c:.2}")
        };
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{tick}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for k in 0..=4 {
        let i = (x_max * k as f64 / 4.0).round();
        let x = px(i);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            i as u64
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">iteration</text>"#,
        LEFT + plot_w / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">coverage</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (k, (curve, label)) in curves.iter().zip(labels).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = curve
            .points
            .iter()
            .map(|&(i, c)| format!("{:.2},{:.2}", px(i as f64), py(c)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 16.0 + 18.0 * k as f64;
        let lx = W - RIGHT + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            xml_escape(label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_convergence_svg(curves: &[ConvergenceCurve], labels: &[String], path: &Path) -> Result<()> {
    fs::write(path, render_convergence_svg(curves, labels)?).map_err(|e| Error::io(path, e))
}

/// First seed's curve of every cell, labelled `W=<width> <method>`.
pub fn report_curves(report: &ExperimentReport) -> (Vec<ConvergenceCurve>, Vec<String>) {
    let mut curves = Vec::new();
    let mut labels = Vec::new();
    for cell in &report.cells {
        if let Some(seed) = cell.seeds.first() {
            let curve = ConvergenceCurve {
                points: seed.curve.clone(),
            };
            if curve.validate().is_ok() {
                curves.push(curve);
                labels.push(format!("W={} {}", cell.width, cell.method.as_str()));
            }
        }
    }
    (curves, labels)
}
