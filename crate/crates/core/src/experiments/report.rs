//! Structured experiment output: JSON reports, CSV tables and SVG line
//! charts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::norms::Exponent;

/// Column-labelled numeric table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Measured ratios and supporting tables for one estimate or experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub estimate_id: String,
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub d: usize,
    pub n: usize,
    pub seeds: Vec<u64>,
    pub ratios: Vec<f64>,
    pub max: f64,
    pub calibration_max: Option<f64>,
    #[serde(default)]
    pub table: Table,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl ExperimentReport {
    pub fn new(estimate_id: impl Into<String>, s: f64, p: f64, q: f64, d: usize, n: usize) -> Self {
        Self {
            estimate_id: estimate_id.into(),
            s,
            p: p.into(),
            q: q.into(),
            d,
            n,
            seeds: Vec::new(),
            ratios: Vec::new(),
            max: 0.0,
            calibration_max: None,
            table: Table::default(),
            notes: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    /// Append one measured ratio and refresh `max`.
    pub fn record(&mut self, seed: u64, ratio: f64) {
        self.seeds.push(seed);
        self.ratios.push(ratio);
        self.max = self.max.max(ratio);
    }

    pub fn min(&self) -> f64 {
        self.ratios.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn meta(&mut self, key: &str, value: impl Serialize) {
        self.metadata
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    pub fn with_calibration(mut self, max: f64) -> Self {
        self.calibration_max = Some(max);
        self
    }

    /// `max ≤ factor · calibration_max` (true when no calibration is stored).
    pub fn within_calibration(&self, factor: f64) -> bool {
        self.calibration_max.is_none_or(|c| self.max <= factor * c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Write `report.json`, `tables/<id>.csv` and, when the table has at
    /// least two columns, `plots/<id>.svg` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("tables"))?;
        fs::create_dir_all(dir.join("plots"))?;
        fs::write(dir.join("report.json"), self.to_json()?)?;
        let stem = self.estimate_id.replace(['/', ' '], "_");
        if !self.table.rows.is_empty() {
            fs::write(dir.join("tables").join(format!("{stem}.csv")), self.table.to_csv())?;
            if self.table.columns.len() >= 2 {
                fs::write(dir.join("plots").join(format!("{stem}.svg")), line_chart(&self.table, &self.estimate_id))?;
            }
        }
        Ok(())
    }
}

/// Minimal SVG line chart of every column against the first one.
pub fn line_chart(table: &Table, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let finite = |v: &f64| v.is_finite();
    let ys: Vec<f64> = table.rows.iter().flat_map(|r| r[1..].iter().cloned()).filter(finite).collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<path d="M{M} {} L{} {} M{M} {} L{M} {M}" stroke="black" fill="none"/>"#,
        H - M,
        W - M,
        H - M,
        H - M
    );
    let _ = writeln!(svg, r#"<text x="{M}" y="{}">{x0:.3e}</text>"#, H - M + 16.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{x1:.3e}</text>"#, W - M, H - M + 16.0);
    let _ = writeln!(svg, r#"<text x="4" y="{}">{y0:.3e}</text>"#, H - M);
    let _ = writeln!(svg, r#"<text x="4" y="{}">{y1:.3e}</text>"#, M);
    for c in 1..table.columns.len() {
        let pts: Vec<String> = table
            .rows
            .iter()
            .filter(|r| r[c].is_finite() && r[0].is_finite())
            .map(|r| format!("{:.2},{:.2}", sx(r[0]), sy(r[c])))
            .collect();
        let color = palette[(c - 1) % palette.len()];
        let _ = writeln!(svg, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#, pts.join(" "));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - M + 4.0,
            M + 14.0 * c as f64,
            escape(&table.columns[c])
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_schema_fields() {
        let mut r = ExperimentReport::new("moser", 3.0, 1.0, f64::INFINITY, 2, 64).with_calibration(1.5);
        r.record(1, 0.5);
        r.record(2, 0.9);
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["estimate_id", "s", "p", "q", "d", "n", "seeds", "ratios", "max", "calibration_max"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["q"], "inf");
        assert_eq!(v["max"], 0.9);
        assert!(r.within_calibration(2.0));
        let back: ExperimentReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_and_svg() {
        let mut t = Table::new(&["N", "rho"]);
        t.push(vec![3.0, 1.0]);
        t.push(vec![4.0, 1.5]);
        assert_eq!(t.to_csv().lines().next(), Some("N,rho"));
        assert_eq!(t.column("rho"), Some(vec![1.0, 1.5]));
        let svg = line_chart(&t, "a<b");
        assert!(svg.starts_with("<svg") && svg.contains("polyline") && svg.contains("a&lt;b"));
    }
}
