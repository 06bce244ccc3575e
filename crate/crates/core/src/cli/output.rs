//! Result artifacts: run manifest, TOML result files, region CSV and SVG plot.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design_io::DesignRecord;
use crate::error::Result;
use crate::optimizer::{IterationRecord, OptimizedDesign, SweepPoint};
use crate::oracle::OracleReport;

/// Provenance of one invocation, echoed into every artifact it writes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub verb: String,
    pub overrides: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    /// Timestamp from `SOURCE_DATE_EPOCH` when set, otherwise the clock.
    pub fn new(scenario: String, verb: &str, overrides: BTreeMap<String, String>, seed: u64) -> Self {
        let secs = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.trim().parse::<i64>().ok())
            .unwrap_or_else(|| time::OffsetDateTime::now_utc().unix_timestamp());
        let timestamp = time::OffsetDateTime::from_unix_timestamp(secs)
            .ok()
            .and_then(|t| t.format(&time::format_description::well_known::Rfc3339).ok())
            .unwrap_or_else(|| secs.to_string());
        Self {
            scenario,
            verb: verb.to_string(),
            overrides,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    fn comment_lines(&self) -> String {
        self.to_toml().lines().map(|l| format!("# {l}\n")).collect()
    }
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: T,
}

fn wrapped<T: Serialize>(manifest: &RunManifest, body: T) -> String {
    toml::to_string(&Wrapped { manifest, body }).expect("result serializes")
}

#[derive(Serialize)]
struct ResultSummary {
    zdc: f64,
    rate_bits: f64,
    rate_per_tone: f64,
    rho: f64,
    rho_bar: f64,
    iterations: usize,
    status: String,
    initial_zdc: f64,
    newton_steps: usize,
}

#[derive(Serialize)]
struct TrajectoryRow {
    iteration: usize,
    #[serde(flatten)]
    record: IterationRecord,
}

#[derive(Serialize)]
struct OptimizeBody {
    result: ResultSummary,
    design: DesignRecord,
    trajectory: Vec<TrajectoryRow>,
}

pub(crate) fn status_label<T: Serialize>(status: T) -> String {
    toml::Value::try_from(status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Design, summary and per-iteration trajectory of one optimization.
pub fn optimize_result_toml(manifest: &RunManifest, out: &OptimizedDesign) -> String {
    let n = out.design.shape().0 as f64;
    wrapped(
        manifest,
        OptimizeBody {
            result: ResultSummary {
                zdc: out.zdc,
                rate_bits: out.rate,
                rate_per_tone: out.rate / n,
                rho: out.design.rho,
                rho_bar: out.rho_bar,
                iterations: out.iterations,
                status: status_label(out.status),
                initial_zdc: out.initial_zdc,
                newton_steps: out.newton_steps,
            },
            design: DesignRecord::from(&out.design),
            trajectory: out
                .trajectory
                .iter()
                .enumerate()
                .map(|(i, r)| TrajectoryRow {
                    iteration: i + 1,
                    record: *r,
                })
                .collect(),
        },
    )
}

#[derive(Serialize)]
struct OracleBody<'a> {
    oracle: &'a OracleReport,
    verdict: Verdict,
}

#[derive(Serialize)]
struct Verdict {
    relative_error: f64,
    within_3_sigma: bool,
}

pub fn oracle_report_toml(manifest: &RunManifest, report: &OracleReport) -> String {
    wrapped(
        manifest,
        OracleBody {
            oracle: report,
            verdict: Verdict {
                relative_error: report.relative_error(),
                within_3_sigma: report.agrees(3.0),
            },
        },
    )
}

/// One CSV row; `None` values are left empty for failed points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub rate_bits: Option<f64>,
    pub rate_per_tone: Option<f64>,
    pub zdc: Option<f64>,
    pub rho: Option<f64>,
    pub iterations: Option<usize>,
    pub status: String,
}

impl CsvRow {
    pub fn from_point(p: &SweepPoint, normalize: bool) -> Self {
        let n = p.result.design.shape().0 as f64;
        let pt = p.point();
        Self {
            rate_bits: Some(if normalize { pt.rate / n } else { pt.rate }),
            rate_per_tone: Some(pt.rate_per_tone),
            zdc: Some(pt.zdc),
            rho: Some(pt.rho),
            iterations: Some(p.result.iterations),
            status: status_label(p.result.status),
        }
    }

    pub fn failed(rate_floor: f64, n: usize, normalize: bool, reason: &str) -> Self {
        Self {
            rate_bits: Some(if normalize { rate_floor / n as f64 } else { rate_floor }),
            rate_per_tone: Some(rate_floor / n as f64),
            zdc: None,
            rho: None,
            iterations: None,
            status: format!("failed: {reason}"),
        }
    }
}

/// Region CSV with the manifest as leading `#` comment lines.
pub fn write_region_csv(path: &Path, manifest: &RunManifest, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    let body = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    let mut bytes = manifest.comment_lines().into_bytes();
    bytes.extend_from_slice(&body);
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Reads a region CSV written by [`write_region_csv`].
pub fn read_region_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(std::io::Error::other)?;
    r.deserialize()
        .collect::<std::result::Result<Vec<CsvRow>, _>>()
        .map_err(|e| std::io::Error::other(e).into())
}

pub struct Curve<'a> {
    pub label: &'a str,
    pub color: &'a str,
    /// `(rate, zdc)` pairs sorted by rate.
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(max: f64) -> Vec<f64> {
    if !(max > 0.0) {
        return vec![0.0];
    }
    let raw = max / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    (0..)
        .map(|i| i as f64 * step)
        .take_while(|t| *t <= max * (1.0 + 1e-9))
        .collect()
}

/// Rate-energy boundary plot; the first curve's endpoints are labelled.
pub fn region_svg(manifest: &RunManifest, curves: &[Curve], rate_unit: &str) -> String {
    let (w, h) = (640.0, 440.0);
    let (left, right, top, bottom) = (80.0, 20.0, 30.0, 60.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let all = curves.iter().flat_map(|c| c.points.iter());
    let x_max = all.clone().map(|p| p.0).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let y_max_raw = all.map(|p| p.1).fold(0.0, f64::max);
    // z_DC axis in units of the largest power of ten below the peak
    let exp = if y_max_raw > 0.0 {
        y_max_raw.log10().floor() as i32
    } else {
        0
    };
    let y_scale = 10f64.powi(exp);
    let y_max = (y_max_raw / y_scale).max(f64::MIN_POSITIVE);
    let xt = nice_ticks(x_max);
    let yt = nice_ticks(y_max);
    let x_hi = xt.last().copied().unwrap_or(x_max).max(x_max);
    let y_hi = yt.last().copied().unwrap_or(y_max).max(y_max);
    let sx = |x: f64| left + pw * x / x_hi;
    let sy = |y: f64| top + ph * (1.0 - y / y_hi);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<metadata>\n{}</metadata>", escape(&manifest.to_toml()));
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for t in &xt {
        let x = sx(*t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ddd"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
            top,
            top + ph,
            top + ph + 16.0,
            t
        );
    }
    for t in &yt {
        let y = sy(*t);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            left,
            left + pw,
            left - 6.0,
            y + 4.0,
            t
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Rate [{}]</text>"#,
        left + pw / 2.0,
        h - 18.0,
        escape(rate_unit)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">z_DC [1e{exp}]</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (k, c) in curves.iter().enumerate() {
        let pts: Vec<String> = c
            .points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y / y_scale)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            c.color,
            pts.join(" ")
        );
        for (x, y) in &c.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                sx(*x),
                sy(*y / y_scale),
                c.color
            );
        }
        let ly = top + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            left + pw - 170.0,
            left + pw - 150.0,
            c.color,
            left + pw - 144.0,
            ly + 4.0,
            escape(c.label)
        );
    }
    if let Some(c) = curves.first() {
        if let (Some(a), Some(b)) = (c.points.first(), c.points.last()) {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}">WPT only</text>"#,
                sx(a.0) + 6.0,
                sy(a.1 / y_scale) - 6.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">water-filling</text>"#,
                sx(b.0) - 6.0,
                sy(b.1 / y_scale) - 6.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
