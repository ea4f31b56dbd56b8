//! Machine-readable comparison reports (CSV and JSON).
//!
//! Floats are printed with 12 significant digits in both formats, and the
//! emitters are deterministic: identical reports serialize to identical
//! bytes, so reruns with a pinned timestamp diff clean.

use crate::bounds::KarpComparison;
use crate::mcsim::Metric;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

pub const CSV_HEADER: &str = "w,threshold,analytic_bound,empirical_tail,ci_upper,dominance_ok";

/// One `w` row of a bound-vs-simulation comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub w: u32,
    pub threshold: f64,
    pub analytic_bound: f64,
    pub empirical_tail: f64,
    pub ci_upper: f64,
    pub dominance_ok: bool,
}

/// A full comparison run: metadata plus rows sorted by `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub spec_name: String,
    pub model_name: String,
    pub metric: Metric,
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    pub timestamp: String,
    pub rows: Vec<CompareRow>,
    /// Expectation-bound comparison, present for work specs on quicksort.
    pub karp: Option<KarpComparison>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report JSON: {0}")]
    Json(String),
    #[error("report CSV line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(ReportFormat::Csv),
            "json" => Some(ReportFormat::Json),
            _ => None,
        }
    }

    /// Infer from a path extension, defaulting to CSV.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

/// 12 significant digits, locale-free, round-trippable through `parse`.
pub fn fmt_g12(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.11e}")
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl ComparisonReport {
    pub fn dominance_ok(&self) -> bool {
        self.rows.iter().all(|r| r.dominance_ok)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.w,
                fmt_g12(r.threshold),
                fmt_g12(r.analytic_bound),
                fmt_g12(r.empirical_tail),
                fmt_g12(r.ci_upper),
                r.dominance_ok
            );
        }
        out
    }

    /// Parse the row section of a CSV report (metadata lives in JSON only).
    pub fn rows_from_csv(text: &str) -> Result<Vec<CompareRow>, ReportError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == CSV_HEADER => {}
            _ => {
                return Err(ReportError::Csv {
                    line: 1,
                    message: format!("expected header `{CSV_HEADER}`"),
                })
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ReportError::Csv {
                line: i + 1,
                message,
            };
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 6 {
                return Err(err(format!("expected 6 fields, got {}", parts.len())));
            }
            let f = |s: &str| s.parse::<f64>().map_err(|e| err(format!("`{s}`: {e}")));
            rows.push(CompareRow {
                w: parts[0].parse().map_err(|e| err(format!("w: {e}")))?,
                threshold: f(parts[1])?,
                analytic_bound: f(parts[2])?,
                empirical_tail: f(parts[3])?,
                ci_upper: f(parts[4])?,
                dominance_ok: parts[5] == "true",
            });
        }
        Ok(rows)
    }

    /// Hand-rolled emitter so float formatting and key order are pinned.
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(256 + 160 * self.rows.len());
        out.push_str("{\n");
        let _ = writeln!(out, "  \"spec\": {},", json_str(&self.spec_name));
        let _ = writeln!(out, "  \"model\": {},", json_str(&self.model_name));
        let _ = writeln!(out, "  \"metric\": \"{}\",", self.metric);
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let _ = writeln!(out, "  \"trials\": {},", self.trials);
        let _ = writeln!(out, "  \"seed\": {},", self.seed);
        let _ = writeln!(out, "  \"timestamp\": {},", json_str(&self.timestamp));
        out.push_str("  \"rows\": [");
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(
                out,
                "\n    {{\"w\": {}, \"threshold\": {}, \"analytic_bound\": {}, \"empirical_tail\": {}, \"ci_upper\": {}, \"dominance_ok\": {}}}",
                r.w,
                fmt_g12(r.threshold),
                fmt_g12(r.analytic_bound),
                fmt_g12(r.empirical_tail),
                fmt_g12(r.ci_upper),
                r.dominance_ok
            );
        }
        if self.rows.is_empty() {
            out.push(']');
        } else {
            out.push_str("\n  ]");
        }
        match &self.karp {
            None => out.push_str(",\n  \"karp\": null\n"),
            Some(k) => {
                out.push_str(",\n  \"karp\": {");
                let _ = write!(
                    out,
                    "\"n\": {}, \"k\": {}, \"w\": {}, \"expected_work\": {}, \"ours_threshold\": {}, \"ours_bound\": {}, \"karp_threshold\": {}, \"karp_bound\": {}",
                    k.n,
                    k.k,
                    k.w,
                    fmt_g12(k.expected_work),
                    fmt_g12(k.ours_threshold),
                    fmt_g12(k.ours_bound),
                    fmt_g12(k.karp_threshold),
                    fmt_g12(k.karp_bound)
                );
                out.push_str("}\n");
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ReportError::Json(e.to_string()))?;
        let err = |m: &str| ReportError::Json(m.to_string());
        let obj = v.as_object().ok_or_else(|| err("expected object"))?;
        let s = |k: &str| -> Result<String, ReportError> {
            Ok(obj
                .get(k)
                .and_then(|v| v.as_str())
                .ok_or_else(|| err(&format!("missing string `{k}`")))?
                .to_string())
        };
        let u = |k: &str| -> Result<u64, ReportError> {
            obj.get(k)
                .and_then(|v| v.as_u64())
                .ok_or_else(|| err(&format!("missing integer `{k}`")))
        };
        let metric_name = s("metric")?;
        let metric = Metric::parse(&metric_name)
            .ok_or_else(|| err(&format!("bad metric `{metric_name}`")))?;
        let rows_v = obj
            .get("rows")
            .and_then(|v| v.as_array())
            .ok_or_else(|| err("missing array `rows`"))?;
        let mut rows = Vec::with_capacity(rows_v.len());
        for rv in rows_v {
            let ro = rv.as_object().ok_or_else(|| err("row must be object"))?;
            let f = |k: &str| -> Result<f64, ReportError> {
                ro.get(k)
                    .and_then(|v| v.as_f64())
                    .ok_or_else(|| err(&format!("row missing number `{k}`")))
            };
            rows.push(CompareRow {
                w: ro
                    .get("w")
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| err("row missing `w`"))? as u32,
                threshold: f("threshold")?,
                analytic_bound: f("analytic_bound")?,
                empirical_tail: f("empirical_tail")?,
                ci_upper: f("ci_upper")?,
                dominance_ok: ro
                    .get("dominance_ok")
                    .and_then(|v| v.as_bool())
                    .ok_or_else(|| err("row missing `dominance_ok`"))?,
            });
        }
        let karp = match obj.get("karp") {
            None | Some(serde_json::Value::Null) => None,
            Some(kv) => {
                let ko = kv.as_object().ok_or_else(|| err("karp must be object"))?;
                let f = |k: &str| -> Result<f64, ReportError> {
                    ko.get(k)
                        .and_then(|v| v.as_f64())
                        .ok_or_else(|| err(&format!("karp missing number `{k}`")))
                };
                let ku = |k: &str| -> Result<u64, ReportError> {
                    ko.get(k)
                        .and_then(|v| v.as_u64())
                        .ok_or_else(|| err(&format!("karp missing integer `{k}`")))
                };
                Some(KarpComparison {
                    n: ku("n")?,
                    k: ku("k")? as u32,
                    w: ku("w")?,
                    expected_work: f("expected_work")?,
                    ours_threshold: f("ours_threshold")?,
                    ours_bound: f("ours_bound")?,
                    karp_threshold: f("karp_threshold")?,
                    karp_bound: f("karp_bound")?,
                })
            }
        };
        Ok(ComparisonReport {
            spec_name: s("spec")?,
            model_name: s("model")?,
            metric,
            n: u("n")?,
            trials: u("trials")?,
            seed: u("seed")?,
            timestamp: s("timestamp")?,
            rows,
            karp,
        })
    }

    /// Write in the given format; parent directories must exist.
    pub fn write_to(&self, path: &Path, format: ReportFormat) -> Result<(), ReportError> {
        let body = match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        };
        let mut f = std::fs::File::create(path)?;
        f.write_all(body.as_bytes())?;
        Ok(())
    }
}

fn json_str(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ComparisonReport {
        ComparisonReport {
            spec_name: "quicksort-work".into(),
            model_name: "quicksort".into(),
            metric: Metric::Work,
            n: 128,
            trials: 1000,
            seed: 42,
            timestamp: "2000-01-01T00:00:00Z".into(),
            rows: vec![
                CompareRow {
                    w: 1,
                    threshold: 4869.327,
                    analytic_bound: 1.0,
                    empirical_tail: 0.0,
                    ci_upper: 5.384e-5,
                    dominance_ok: true,
                },
                CompareRow {
                    w: 2,
                    threshold: 4996.327,
                    analytic_bound: 1.0,
                    empirical_tail: 0.001,
                    ci_upper: 0.0041,
                    dominance_ok: true,
                },
            ],
            karp: Some(crate::bounds::karp_comparison(128, 3)),
        }
    }

    #[test]
    fn csv_shape() {
        let r = sample();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().count(), 3);
        let rows = ComparisonReport::rows_from_csv(&csv).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].w, 1);
        assert!((rows[0].threshold - 4869.327).abs() < 1e-6);

        let empty = ComparisonReport {
            rows: vec![],
            ..sample()
        };
        assert_eq!(empty.to_csv(), format!("{CSV_HEADER}\n"));
        assert!(ComparisonReport::rows_from_csv("nope").is_err());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        // The contract is equality at printed precision: reloading and
        // re-serializing reproduces the bytes exactly.
        let r = sample();
        let json = r.to_json();
        let back = ComparisonReport::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
        assert_eq!(back.rows, r.rows);
        let (k0, k1) = (r.karp.unwrap(), back.karp.unwrap());
        assert_eq!((k0.n, k0.k, k0.w), (k1.n, k1.k, k1.w));
        for (a, b) in [
            (k0.expected_work, k1.expected_work),
            (k0.ours_threshold, k1.ours_threshold),
            (k0.ours_bound, k1.ours_bound),
            (k0.karp_threshold, k1.karp_threshold),
            (k0.karp_bound, k1.karp_bound),
        ] {
            assert!((a - b).abs() <= 1e-11 * a.abs().max(1.0));
        }

        let no_karp = ComparisonReport {
            karp: None,
            ..sample()
        };
        let json = no_karp.to_json();
        let back = ComparisonReport::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn g12_formatting() {
        assert_eq!(fmt_g12(1.0), "1.00000000000e0");
        assert_eq!(fmt_g12(0.0), "0.00000000000e0");
        let v = 1.0 / 3.0;
        let s = fmt_g12(v);
        let back: f64 = s.parse().unwrap();
        assert!((back - v).abs() <= 1e-12 * v);
    }
}
