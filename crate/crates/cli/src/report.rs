//! CSV and JSON result serialization.
//!
//! CSV floats are printed with 17 significant digits in scientific
//! notation and `\n` line endings, so identical configurations produce
//! byte-identical files regardless of thread count.

use anyhow::{bail, Context, Result};
use ionosc::scenario::{flavor_name, ComparisonMetrics, OscillationRecord, ResolvedDrives};
use serde::Serialize;

use crate::config::ConfigFile;

/// 17 significant digits, scientific, locale-independent.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(generations: usize, with_negative: bool) -> String {
    let mut cols = vec!["t_ms".to_string()];
    for beta in 0..generations {
        cols.push(format!("P_{}", flavor_name(generations, beta)));
    }
    cols.push("leakage".into());
    if with_negative {
        cols.push("negative".into());
    }
    cols.push("norm".into());
    cols.join(",")
}

/// Render a record as CSV text.
pub fn record_to_csv(record: &OscillationRecord) -> String {
    let generations = record.generations();
    let with_negative = record.negative.is_some();
    let mut out = String::new();
    out.push_str(&csv_header(generations, with_negative));
    out.push('\n');
    for j in 0..record.times.len() {
        let mut cols = vec![fmt_float(record.times[j])];
        for beta in 0..generations {
            cols.push(fmt_float(record.probabilities[j][beta]));
        }
        cols.push(fmt_float(record.leakage[j]));
        if let Some(negative) = &record.negative {
            cols.push(fmt_float(negative[j]));
        }
        cols.push(fmt_float(record.norm[j]));
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Time series parsed back from a results CSV.
pub struct ParsedRecord {
    pub times: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
    pub leakage: Vec<f64>,
    pub norm: Vec<f64>,
    pub generations: usize,
}

pub fn parse_csv(text: &str) -> Result<ParsedRecord> {
    let mut lines = text.lines();
    let header = lines.next().context("empty results file")?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"t_ms") {
        bail!("results file must start with a t_ms column");
    }
    let generations = cols.iter().filter(|c| c.starts_with("P_")).count();
    if generations == 0 {
        bail!("results file has no probability columns");
    }
    let has_negative = cols.contains(&"negative");
    let expected = 1 + generations + 1 + usize::from(has_negative) + 1;
    if cols.len() != expected {
        bail!("unexpected column layout: {header}");
    }
    let mut parsed = ParsedRecord {
        times: Vec::new(),
        probabilities: Vec::new(),
        leakage: Vec::new(),
        norm: Vec::new(),
        generations,
    };
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("bad number on data line {}", lineno + 1))?;
        if fields.len() != expected {
            bail!(
                "data line {} has {} fields, expected {expected}",
                lineno + 1,
                fields.len()
            );
        }
        parsed.times.push(fields[0]);
        parsed
            .probabilities
            .push(fields[1..1 + generations].to_vec());
        parsed.leakage.push(fields[1 + generations]);
        parsed.norm.push(*fields.last().unwrap());
    }
    if parsed.times.is_empty() {
        bail!("results file has no data rows");
    }
    Ok(parsed)
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DrivesOut {
    A {
        c: f64,
        omega: f64,
        omega1: f64,
        omega2: f64,
    },
    B {
        c: f64,
        j: f64,
        j1: f64,
        j2: f64,
    },
    TwoGen {
        c: f64,
        omega: f64,
        omega1: f64,
    },
}

impl From<ResolvedDrives> for DrivesOut {
    fn from(drives: ResolvedDrives) -> Self {
        match drives {
            ResolvedDrives::A(p) => DrivesOut::A {
                c: p.c,
                omega: p.omega,
                omega1: p.omega1,
                omega2: p.omega2,
            },
            ResolvedDrives::B(p) => DrivesOut::B {
                c: p.c,
                j: p.j,
                j1: p.j1,
                j2: p.j2,
            },
            ResolvedDrives::TwoGen(p) => DrivesOut::TwoGen {
                c: p.c,
                omega: p.omega,
                omega1: p.omega1,
            },
        }
    }
}

/// Sidecar document: the configuration as given plus everything that was
/// derived from it.
#[derive(Serialize)]
pub struct Sidecar<'a> {
    pub config: &'a ConfigFile,
    pub diagnostics: SidecarDiagnostics,
}

#[derive(Serialize)]
pub struct SidecarDiagnostics {
    pub generations: usize,
    pub masses: Vec<f64>,
    pub drives: DrivesOut,
    pub constant_shift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cut_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    pub rows: usize,
}

#[derive(Serialize)]
pub struct FlavorMetricsOut {
    pub flavor: String,
    pub max_abs_dev: f64,
    pub rms_dev: f64,
}

#[derive(Serialize)]
pub struct MetricsOut {
    pub tol: f64,
    pub max_abs_dev: f64,
    pub rms_dev: f64,
    pub per_flavor: Vec<FlavorMetricsOut>,
    pub pass: bool,
}

impl MetricsOut {
    pub fn new(metrics: &ComparisonMetrics, generations: usize, tol: f64) -> Self {
        let per_flavor = (0..generations)
            .map(|beta| FlavorMetricsOut {
                flavor: flavor_name(generations, beta).to_string(),
                max_abs_dev: metrics.per_flavor_max[beta],
                rms_dev: metrics.per_flavor_rms[beta],
            })
            .collect();
        MetricsOut {
            tol,
            max_abs_dev: metrics.max_abs_dev,
            rms_dev: metrics.rms_dev,
            per_flavor,
            pass: metrics.max_abs_dev <= tol,
        }
    }
}
