//! Reports and their table, CSV and JSON renderings.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::axioms::AxiomResult;
use crate::mapping::MappingClass;
use crate::maxmin::SweepRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub scenario: String,
    pub scenario_digest: String,
    pub result: Payload,
    pub diagnostics: Value,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Feasibility(FeasibilityResult),
    FixedPoint(FixedPointOut),
    SpectralRadius(RadiusOut),
    Maxmin(MaxminOut),
    Sweep(SweepOut),
    Axioms(AxiomsOut),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub rho: f64,
    /// `null` when the verdict is withheld near the boundary.
    pub feasible: Option<bool>,
    pub boundary_inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOut {
    pub exists: bool,
    pub point: Option<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusOut {
    pub rho: f64,
    pub lower: f64,
    pub upper: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxminOut {
    pub budget: f64,
    pub powers: Vec<f64>,
    pub utility: f64,
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOut {
    pub transition_point: Option<f64>,
    pub rho_inf: f64,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomsOut {
    pub mappings: Vec<MappingAxioms>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingAxioms {
    pub name: String,
    pub class: MappingClass,
    pub samples: usize,
    pub seed: u64,
    pub results: Vec<AxiomResult>,
}

pub const SWEEP_HEADER: &str = "budget,utility,efficiency,utility_bound,efficiency_bound,lambda";

/// Twelve significant digits in scientific notation.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn opt_bool(v: Option<bool>) -> String {
    v.map_or_else(|| "inconclusive".to_string(), |b| b.to_string())
}

fn vec_cell(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

impl Payload {
    /// Header and rows shared by the CSV and table renderings.
    fn grid(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let h = |cols: &[&str]| cols.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        match self {
            Payload::Feasibility(r) => (
                h(&["rho", "feasible", "boundary_inconclusive"]),
                vec![vec![num(r.rho), opt_bool(r.feasible), r.boundary_inconclusive.to_string()]],
            ),
            Payload::FixedPoint(r) => (
                h(&["exists", "point", "residual", "iterations"]),
                vec![vec![
                    r.exists.to_string(),
                    r.point.as_deref().map(vec_cell).unwrap_or_default(),
                    num(r.residual),
                    r.iterations.to_string(),
                ]],
            ),
            Payload::SpectralRadius(r) => (
                h(&["rho", "lower", "upper", "status"]),
                vec![vec![num(r.rho), num(r.lower), num(r.upper), r.status.clone()]],
            ),
            Payload::Maxmin(r) => (
                h(&["budget", "utility", "lambda", "residual", "powers"]),
                vec![vec![num(r.budget), num(r.utility), num(r.lambda), num(r.residual), vec_cell(&r.powers)]],
            ),
            Payload::Sweep(r) => (
                SWEEP_HEADER.split(',').map(String::from).collect(),
                r.rows
                    .iter()
                    .map(|row| {
                        [row.budget, row.utility, row.efficiency, row.utility_bound, row.efficiency_bound, row.lambda]
                            .iter()
                            .map(|v| num(*v))
                            .collect()
                    })
                    .collect(),
            ),
            Payload::Axioms(r) => (
                h(&["mapping", "class", "axiom", "passed", "checks", "witness"]),
                r.mappings
                    .iter()
                    .flat_map(|m| {
                        m.results.iter().map(move |res| {
                            vec![
                                m.name.clone(),
                                m.class.to_string(),
                                res.axiom.label().to_string(),
                                res.passed.to_string(),
                                res.checks.to_string(),
                                res.witness
                                    .as_ref()
                                    .map(|w| {
                                        format!(
                                            "x={} y={} alpha={} i={} lhs={} rhs={}",
                                            vec_cell(&w.x),
                                            w.y.as_deref().map(vec_cell).unwrap_or_default(),
                                            w.alpha.map(num).unwrap_or_default(),
                                            w.coordinate,
                                            num(w.lhs),
                                            num(w.rhs)
                                        )
                                    })
                                    .unwrap_or_default(),
                            ]
                        })
                    })
                    .collect(),
            ),
        }
    }

    fn preamble(&self) -> Option<String> {
        match self {
            Payload::Sweep(r) => {
                Some(format!("transition_point={}", r.transition_point.map_or_else(|| "undefined".to_string(), num)))
            }
            _ => None,
        }
    }
}

/// Serializes a report. Identical reports always give identical bytes.
pub fn emit_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("reports always serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = String::new();
            if let Some(p) = r.result.preamble() {
                let _ = writeln!(out, "# {p}");
            }
            let (header, rows) = r.result.grid();
            let _ = writeln!(out, "{}", header.join(","));
            for row in rows {
                let cells: Vec<String> = row.iter().map(|c| csv_escape(c)).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
            out
        }
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "command:  {}", r.command);
            let _ = writeln!(out, "scenario: {} (sha256 {})", r.scenario, r.scenario_digest);
            if let Some(p) = r.result.preamble() {
                let _ = writeln!(out, "{p}");
            }
            let (header, rows) = r.result.grid();
            let widths: Vec<usize> = (0..header.len())
                .map(|c| rows.iter().map(|row| row[c].len()).chain([header[c].len()]).max().unwrap_or(0))
                .collect();
            let line = |cells: &[String]| {
                cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
            };
            let _ = writeln!(out, "{}", line(&header));
            for row in &rows {
                let _ = writeln!(out, "{}", line(row));
            }
            if let Value::Object(map) = &r.diagnostics {
                for (k, v) in map {
                    let _ = writeln!(out, "{k}: {v}");
                }
            }
            out
        }
    }
}

fn csv_escape(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

/// Current time, or `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return t;
    }
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}
