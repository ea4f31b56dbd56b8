//! Recurrence specifications: the functions and constants that describe one
//! probabilistic divide-and-conquer recurrence, plus validation and presets.
//!
//! A spec packages the toll `a(x)` (or `b(x)` for span), the shrink bound
//! `m(x)` on the expected maximum subproblem size, the terminal size `d`,
//! the optional weights `g1`/`g2`, and an optional analytic solution `u` of
//! the companion recurrence `u(x) >= a(x) + u(m(x))`.
//!
//! Validation spot-checks the theorem hypotheses on a sampled grid: it can
//! reject a spec that visibly violates them, but a pass is not a proof.

use crate::bounds::USolution;
use crate::exprfn::{
    check_monotone, parse_expr, sample_grid, EvalError, MonotoneMode, ParseError, PiecewiseError,
    PiecewiseFn, Segment, REL_TOL,
};
use std::fmt;
use thiserror::Error;

/// Which recurrence shape the spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Single recursive call: `W(x) = a(x) + W(h(x))`.
    Unary,
    /// Maximum over calls: `S(x) = b(x) + max_i S(h_i(x))`.
    Span,
    /// Sum over calls: `W(x) = a(x) + sum_i W(h_i(x))`, bounded through
    /// the `W/g2` transformation.
    Work,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Unary => "unary",
            Kind::Span => "span",
            Kind::Work => "work",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        match s {
            "unary" => Some(Kind::Unary),
            "span" => Some(Kind::Span),
            "work" => Some(Kind::Work),
            _ => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A full recurrence description, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceSpec {
    pub name: String,
    pub kind: Kind,
    /// Toll paid at one level before recursing; must vanish on `[0, d]`.
    pub toll: PiecewiseFn,
    /// Bound on the expected maximum subproblem size.
    pub shrink: PiecewiseFn,
    /// Size at or below which the recurrence terminates.
    pub terminal_d: f64,
    pub g1: Option<PiecewiseFn>,
    pub g2: Option<PiecewiseFn>,
    /// Analytic solution of the companion recurrence, when known.
    pub u: Option<PiecewiseFn>,
    /// Value of `u` on `[0, d]`; must bound the terminal cost.
    pub u_base: f64,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("unknown preset `{0}` (see `presets`)")]
    UnknownPreset(String),
    #[error("spec JSON: {0}")]
    Json(String),
    #[error("in `{field}`: {source}")]
    Expr {
        field: String,
        source: ParseError,
    },
    #[error("in `{field}`: {source}")]
    Piecewise {
        field: String,
        source: PiecewiseError,
    },
    #[error("work spec `{0}` has no g2")]
    MissingG2(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl RecurrenceSpec {
    /// Effective toll of the transformed recurrence: `a(x)` for unary and
    /// span specs, `a(x)/g2(x)` for work specs.
    pub fn toll_eff(&self, x: f64) -> Result<f64, SpecError> {
        let t = self.toll.eval(x)?;
        match self.kind {
            Kind::Work => {
                let g2 = self
                    .g2
                    .as_ref()
                    .ok_or_else(|| SpecError::MissingG2(self.name.clone()))?;
                Ok(t / g2.eval(x)?)
            }
            _ => Ok(t),
        }
    }

    /// Parse the JSON spec format:
    ///
    /// ```json
    /// {"name": "...", "kind": "work", "d": 1,
    ///  "toll": [[0, "0"], [1, "x - 1"]],
    ///  "shrink": [[0, "0"], [1.1428571428571428, "7*x/8"]],
    ///  "g1": "x", "g2": [[0, true, "1/2"], [1, "1"], [2, "x - 1"]],
    ///  "u": [[0, true, "0"], [1, "log(x, 8/7) + 1"]], "u_base": 0}
    /// ```
    ///
    /// Each segment is `[lo, "expr"]` or `[lo, closed_hi, "expr"]`; a bare
    /// string is shorthand for a single segment starting at 0.
    pub fn from_json_str(text: &str) -> Result<Self, SpecError> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))?;
        let obj = v
            .as_object()
            .ok_or_else(|| SpecError::Json("top level must be an object".into()))?;
        let name = obj
            .get("name")
            .and_then(|v| v.as_str())
            .ok_or_else(|| SpecError::Json("missing string field `name`".into()))?
            .to_string();
        let kind_str = obj
            .get("kind")
            .and_then(|v| v.as_str())
            .ok_or_else(|| SpecError::Json("missing string field `kind`".into()))?;
        let kind = Kind::parse(kind_str)
            .ok_or_else(|| SpecError::Json(format!("kind must be work|span|unary, got `{kind_str}`")))?;
        let terminal_d = obj
            .get("d")
            .and_then(|v| v.as_f64())
            .ok_or_else(|| SpecError::Json("missing numeric field `d`".into()))?;
        if terminal_d < 0.0 || terminal_d.is_nan() {
            return Err(SpecError::Json("`d` must be >= 0".into()));
        }
        let required = |field: &str| -> Result<PiecewiseFn, SpecError> {
            let val = obj
                .get(field)
                .ok_or_else(|| SpecError::Json(format!("missing field `{field}`")))?;
            piecewise_from_json(field, val)
        };
        let optional = |field: &str| -> Result<Option<PiecewiseFn>, SpecError> {
            match obj.get(field) {
                Some(serde_json::Value::Null) | None => Ok(None),
                Some(val) => piecewise_from_json(field, val).map(Some),
            }
        };
        let u_base = match obj.get("u_base") {
            None | Some(serde_json::Value::Null) => 0.0,
            Some(v) => v
                .as_f64()
                .ok_or_else(|| SpecError::Json("`u_base` must be a number".into()))?,
        };
        Ok(RecurrenceSpec {
            name,
            kind,
            toll: required("toll")?,
            shrink: required("shrink")?,
            terminal_d,
            g1: optional("g1")?,
            g2: optional("g2")?,
            u: optional("u")?,
            u_base,
        })
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpecError::Json(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

fn piecewise_from_json(field: &str, v: &serde_json::Value) -> Result<PiecewiseFn, SpecError> {
    let parse_seg_expr = |text: &str| -> Result<_, SpecError> {
        parse_expr(text).map_err(|source| SpecError::Expr {
            field: field.to_string(),
            source,
        })
    };
    match v {
        serde_json::Value::String(s) => Ok(PiecewiseFn::from_expr(parse_seg_expr(s)?)),
        serde_json::Value::Array(segs) => {
            let mut out = Vec::with_capacity(segs.len());
            for seg in segs {
                let parts = seg.as_array().ok_or_else(|| {
                    SpecError::Json(format!("`{field}`: segment must be an array"))
                })?;
                let (lo, closed_hi, expr_text) = match parts.as_slice() {
                    [lo, expr] => (lo, false, expr),
                    [lo, closed, expr] => (
                        lo,
                        closed.as_bool().ok_or_else(|| {
                            SpecError::Json(format!(
                                "`{field}`: middle segment entry must be a bool"
                            ))
                        })?,
                        expr,
                    ),
                    _ => {
                        return Err(SpecError::Json(format!(
                            "`{field}`: segment must be [lo, \"expr\"] or [lo, closed_hi, \"expr\"]"
                        )))
                    }
                };
                let lo = lo.as_f64().ok_or_else(|| {
                    SpecError::Json(format!("`{field}`: segment lower bound must be a number"))
                })?;
                let expr_text = expr_text.as_str().ok_or_else(|| {
                    SpecError::Json(format!("`{field}`: segment expression must be a string"))
                })?;
                out.push(Segment {
                    lo,
                    closed_hi,
                    expr: parse_seg_expr(expr_text)?,
                });
            }
            PiecewiseFn::new(out).map_err(|source| SpecError::Piecewise {
                field: field.to_string(),
                source,
            })
        }
        _ => Err(SpecError::Json(format!(
            "`{field}` must be an expression string or a segment array"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

pub const PRESET_NAMES: [&str; 4] = [
    "quicksort-span",
    "quicksort-work",
    "bst-height",
    "unary-halving",
];

fn pw(segs: &[(f64, bool, &str)]) -> PiecewiseFn {
    PiecewiseFn::new(
        segs.iter()
            .map(|&(lo, closed_hi, text)| Segment {
                lo,
                closed_hi,
                expr: parse_expr(text).expect("preset expression"),
            })
            .collect(),
    )
    .expect("preset segments")
}

/// Shrink bound shared by the quicksort and BST presets: the expected
/// maximum sublist length is at most `7x/8`, taken as 0 below `8/7` so the
/// companion recurrence bottoms out.
fn pivot_shrink() -> PiecewiseFn {
    pw(&[(0.0, false, "0"), (8.0 / 7.0, false, "7*x/8")])
}

/// Quicksort span recurrence with a configurable logarithm base for the
/// per-level toll. The analytic `u` is valid for any base where
/// `log_b(x) <= 2*log_{8/7}(x) + 1`, i.e. any `b >= sqrt(8/7)`; validation
/// will reject bases below that.
pub fn quicksort_span_with_base(base: f64) -> RecurrenceSpec {
    let toll = if base == 2.0 {
        pw(&[(0.0, false, "0"), (1.0, false, "log2(x)")])
    } else {
        pw(&[(0.0, false, "0"), (1.0, false, &format!("log(x, {base})"))])
    };
    RecurrenceSpec {
        name: "quicksort-span".into(),
        kind: Kind::Span,
        toll,
        shrink: pivot_shrink(),
        terminal_d: 1.0,
        g1: Some(pw(&[(0.0, false, "x")])),
        g2: None,
        u: Some(pw(&[(0.0, true, "0"), (1.0, false, "(log(x, 8/7) + 1)^2")])),
        u_base: 0.0,
    }
}

fn quicksort_work() -> RecurrenceSpec {
    RecurrenceSpec {
        name: "quicksort-work".into(),
        kind: Kind::Work,
        toll: pw(&[(0.0, false, "0"), (1.0, false, "x - 1")]),
        shrink: pivot_shrink(),
        terminal_d: 1.0,
        g1: Some(pw(&[(0.0, false, "x")])),
        g2: Some(pw(&[
            (0.0, true, "1/2"),
            (1.0, false, "1"),
            (2.0, false, "x - 1"),
        ])),
        u: Some(pw(&[(0.0, true, "0"), (1.0, false, "log(x, 8/7) + 1")])),
        u_base: 0.0,
    }
}

fn bst_height() -> RecurrenceSpec {
    RecurrenceSpec {
        name: "bst-height".into(),
        kind: Kind::Span,
        toll: pw(&[(0.0, true, "0"), (1.0, false, "1")]),
        shrink: pivot_shrink(),
        terminal_d: 1.0,
        g1: Some(pw(&[(0.0, false, "x")])),
        g2: None,
        u: Some(pw(&[(0.0, true, "0"), (1.0, false, "log(x, 8/7) + 1")])),
        u_base: 0.0,
    }
}

fn unary_halving() -> RecurrenceSpec {
    RecurrenceSpec {
        name: "unary-halving".into(),
        kind: Kind::Unary,
        toll: pw(&[(0.0, true, "0"), (1.0, false, "1")]),
        shrink: pw(&[(0.0, false, "x/2")]),
        terminal_d: 1.0,
        g1: None,
        g2: None,
        u: None, // solved by iteration
        u_base: 0.0,
    }
}

/// Look up a shipped recurrence preset by name.
pub fn preset(name: &str) -> Result<RecurrenceSpec, SpecError> {
    match name {
        "quicksort-span" => Ok(quicksort_span_with_base(2.0)),
        "quicksort-work" => Ok(quicksort_work()),
        "bst-height" => Ok(bst_height()),
        "unary-halving" => Ok(unary_halving()),
        other => Err(SpecError::UnknownPreset(other.to_string())),
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub severity: Severity,
    pub witness: Option<String>,
}

/// Outcome of [`validate_spec`]: one entry per hypothesis check.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub spec_name: String,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    /// True when no error-severity check failed (warnings allowed).
    pub fn ok(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.passed || c.severity == Severity::Warning)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks
            .iter()
            .filter(|c| !c.passed && c.severity == Severity::Error)
    }

    fn push(&mut self, name: &str, passed: bool, witness: Option<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            severity: Severity::Error,
            witness,
        });
    }

    fn push_warning(&mut self, name: &str, passed: bool, witness: Option<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            severity: Severity::Warning,
            witness,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "validation of `{}`:", self.spec_name)?;
        for c in &self.checks {
            let tag = match (c.passed, c.severity) {
                (true, _) => "PASS",
                (false, Severity::Warning) => "WARN",
                (false, Severity::Error) => "FAIL",
            };
            write!(f, "  [{tag}] {}", c.name)?;
            if let Some(w) = &c.witness {
                write!(f, " ({w})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Upper end of the sampled grids. The checks are spot checks; functions
/// used at larger sizes are outside validated range.
pub const VALIDATE_HI: f64 = 1e6;
/// Default grid size: 1024 log-spaced samples plus all breakpoints.
pub const VALIDATE_SAMPLES: usize = 1024;

fn above_d(d: f64) -> f64 {
    if d > 0.0 {
        d * (1.0 + 1e-9)
    } else {
        1e-9
    }
}

fn approx_le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Sampled check of every hypothesis the bound engine relies on.
///
/// Failures are report entries, not errors; evaluation faults (domain
/// errors while sampling) also surface as failed checks.
pub fn validate_spec(spec: &RecurrenceSpec) -> ValidationReport {
    let mut report = ValidationReport {
        spec_name: spec.name.clone(),
        checks: Vec::new(),
    };
    let d = spec.terminal_d;
    let lo = above_d(d);

    // Toll is zero up to the terminal size.
    {
        let bps: Vec<f64> = spec.toll.breakpoints().collect();
        let grid = if d > 0.0 {
            sample_grid(0.0, d, 256, &bps)
        } else {
            vec![0.0]
        };
        let mut witness = None;
        for &x in &grid {
            match spec.toll.eval(x) {
                Ok(v) if v.abs() <= 1e-12 => {}
                Ok(v) => {
                    witness = Some(format!("toll({x}) = {v}"));
                    break;
                }
                Err(e) => {
                    witness = Some(e.to_string());
                    break;
                }
            }
        }
        report.push("toll zero on [0, d]", witness.is_none(), witness);
    }

    // Toll monotone above d.
    match check_monotone(&spec.toll, lo, VALIDATE_HI, VALIDATE_SAMPLES, MonotoneMode::Value) {
        Ok(r) => report.push(
            "toll monotone on (d, inf)",
            r.non_decreasing,
            r.violation.map(|v| format!("toll({}) = {} > toll({}) = {}", v.x1, v.f1, v.x2, v.f2)),
        ),
        Err(e) => report.push("toll monotone on (d, inf)", false, Some(e.to_string())),
    }

    // 0 <= shrink(x) <= x.
    {
        let bps: Vec<f64> = spec.shrink.breakpoints().collect();
        let grid = sample_grid(0.0, VALIDATE_HI, VALIDATE_SAMPLES, &bps);
        let mut witness = None;
        for &x in &grid {
            match spec.shrink.eval(x) {
                Ok(m) if m >= 0.0 && approx_le(m, x) => {}
                Ok(m) => {
                    witness = Some(format!("shrink({x}) = {m} outside [0, x]"));
                    break;
                }
                Err(e) => {
                    witness = Some(e.to_string());
                    break;
                }
            }
        }
        report.push("shrink within [0, x]", witness.is_none(), witness);
    }

    // shrink(x)/x non-decreasing.
    match check_monotone(
        &spec.shrink,
        1e-9,
        VALIDATE_HI,
        VALIDATE_SAMPLES,
        MonotoneMode::RatioToX,
    ) {
        Ok(r) => report.push(
            "shrink ratio non-decreasing",
            r.non_decreasing,
            r.violation
                .map(|v| format!("m(x)/x drops from {} at x = {} to {} at x = {}", v.f1, v.x1, v.f2, v.x2)),
        ),
        Err(e) => report.push("shrink ratio non-decreasing", false, Some(e.to_string())),
    }

    // g1 requirements (span and work kinds).
    if matches!(spec.kind, Kind::Span | Kind::Work) {
        match &spec.g1 {
            None => report.push("g1 present", false, Some("kind requires g1".into())),
            Some(g1) => {
                report.push("g1 present", true, None);
                match check_monotone(g1, 1e-9, VALIDATE_HI, VALIDATE_SAMPLES, MonotoneMode::Value) {
                    Ok(r) => report.push(
                        "g1 monotone",
                        r.non_decreasing,
                        r.violation.map(|v| format!("g1 drops at ({}, {})", v.x1, v.x2)),
                    ),
                    Err(e) => report.push("g1 monotone", false, Some(e.to_string())),
                }
                let grid = sample_grid(lo, VALIDATE_HI, VALIDATE_SAMPLES, &g1.breakpoints().collect::<Vec<_>>());
                let mut witness = None;
                for &x in &grid {
                    match g1.eval(x) {
                        Ok(v) if approx_le(1.0, v) => {}
                        Ok(v) => {
                            witness = Some(format!("g1({x}) = {v} < 1"));
                            break;
                        }
                        Err(e) => {
                            witness = Some(e.to_string());
                            break;
                        }
                    }
                }
                report.push("g1 >= 1 above d", witness.is_none(), witness);
            }
        }
    }

    // g2 requirements (work kind).
    if spec.kind == Kind::Work {
        match &spec.g2 {
            None => report.push("g2 present", false, Some("work kind requires g2".into())),
            Some(g2) => {
                report.push("g2 present", true, None);
                let grid = sample_grid(0.0, VALIDATE_HI, VALIDATE_SAMPLES, &g2.breakpoints().collect::<Vec<_>>());
                let mut witness = None;
                for &x in &grid {
                    match g2.eval(x) {
                        Ok(v) if v > 0.0 => {}
                        Ok(v) => {
                            witness = Some(format!("g2({x}) = {v} <= 0"));
                            break;
                        }
                        Err(e) => {
                            witness = Some(e.to_string());
                            break;
                        }
                    }
                }
                report.push("g2 positive", witness.is_none(), witness);

                // The transformed toll a/g2 must vanish below d and be
                // monotone above it.
                let mut witness = None;
                let bps: Vec<f64> = spec
                    .toll
                    .breakpoints()
                    .chain(g2.breakpoints())
                    .collect();
                let grid = if d > 0.0 {
                    sample_grid(0.0, d, 256, &bps)
                } else {
                    vec![0.0]
                };
                for &x in &grid {
                    match spec.toll_eff(x) {
                        Ok(v) if v.abs() <= 1e-12 => {}
                        Ok(v) => {
                            witness = Some(format!("toll/g2 at {x} = {v}"));
                            break;
                        }
                        Err(e) => {
                            witness = Some(e.to_string());
                            break;
                        }
                    }
                }
                report.push("toll/g2 zero on [0, d]", witness.is_none(), witness);

                let grid = sample_grid(lo, VALIDATE_HI, VALIDATE_SAMPLES, &bps);
                let mut witness = None;
                let mut prev: Option<(f64, f64)> = None;
                for &x in &grid {
                    match spec.toll_eff(x) {
                        Ok(v) => {
                            if let Some((px, pv)) = prev {
                                if v < pv - REL_TOL * pv.abs().max(1.0) {
                                    witness = Some(format!(
                                        "toll/g2 drops from {pv} at x = {px} to {v} at x = {x}"
                                    ));
                                    break;
                                }
                            }
                            prev = Some((x, v));
                        }
                        Err(e) => {
                            witness = Some(e.to_string());
                            break;
                        }
                    }
                }
                report.push("toll/g2 monotone on (d, inf)", witness.is_none(), witness);
            }
        }
    }

    // Analytic-u checks and the step-function warning.
    validate_u(spec, &mut report);

    report
}

fn validate_u(spec: &RecurrenceSpec, report: &mut ValidationReport) {
    let d = spec.terminal_d;
    let lo = above_d(d);
    let usol = USolution::new(spec);

    if let Some(u_pw) = &spec.u {
        match check_monotone(u_pw, lo, VALIDATE_HI, VALIDATE_SAMPLES, MonotoneMode::Value) {
            Ok(r) => report.push(
                "u monotone",
                r.non_decreasing,
                r.violation.map(|v| format!("u drops at ({}, {})", v.x1, v.x2)),
            ),
            Err(e) => report.push("u monotone", false, Some(e.to_string())),
        }

        // u(x) >= toll_eff(x) + u(shrink(x)) on the sampled grid.
        let bps: Vec<f64> = u_pw
            .breakpoints()
            .chain(spec.toll.breakpoints())
            .chain(spec.shrink.breakpoints())
            .collect();
        let grid = sample_grid(lo, VALIDATE_HI, VALIDATE_SAMPLES, &bps);
        let mut witness = None;
        for &x in &grid {
            let step = || -> Result<(f64, f64), SpecError> {
                let ux = usol.eval(x).map_err(|e| SpecError::Json(e.to_string()))?;
                let m = spec.shrink.eval(x)?;
                let um = usol.eval(m).map_err(|e| SpecError::Json(e.to_string()))?;
                Ok((ux, spec.toll_eff(x)? + um))
            };
            match step() {
                Ok((lhs, rhs)) if approx_le(rhs, lhs) => {}
                Ok((lhs, rhs)) => {
                    witness = Some(format!("u({x}) = {lhs} < toll_eff + u(shrink) = {rhs}"));
                    break;
                }
                Err(e) => {
                    witness = Some(e.to_string());
                    break;
                }
            }
        }
        report.push("u recurrence inequality", witness.is_none(), witness);
    }

    // Discontinuity scan: a step in u means the general-r bound from the
    // closed-form D_r loses the theorem's constant; the w-form is then the
    // authoritative output. Warning only.
    let mut jump_witness = None;
    let grid = sample_grid(lo, VALIDATE_HI, 256, &[]);
    'outer: for pair in grid.windows(2) {
        let (mut x1, mut x2) = (pair[0], pair[1]);
        let eval2 = |a: f64, b: f64| -> Option<(f64, f64)> {
            Some((usol.eval(a).ok()?, usol.eval(b).ok()?))
        };
        let Some((mut u1, mut u2)) = eval2(x1, x2) else {
            break;
        };
        if (u2 - u1).abs() <= 1e-3 * u1.abs().max(1.0) {
            continue;
        }
        // Bisect toward the variation; a genuine jump survives as the
        // bracket shrinks, smooth growth does not.
        for _ in 0..60 {
            let mid = 0.5 * (x1 + x2);
            let Ok(um) = usol.eval(mid) else { break 'outer };
            if (u2 - um).abs() >= (um - u1).abs() {
                x1 = mid;
                u1 = um;
            } else {
                x2 = mid;
                u2 = um;
            }
            if (u2 - u1).abs() <= 1e-3 * u1.abs().max(1.0) {
                break;
            }
        }
        if (u2 - u1).abs() > 1e-3 * u1.abs().max(1.0) {
            jump_witness = Some(format!(
                "u jumps from {u1} to {u2} near x = {x1}; w-form bounds are authoritative"
            ));
            break;
        }
    }
    report.push_warning("u continuous above d (sampled)", jump_witness.is_none(), jump_witness);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for name in PRESET_NAMES {
            let spec = preset(name).unwrap();
            assert_eq!(spec.name, name);
            let report = validate_spec(&spec);
            assert!(
                report.ok(),
                "preset {name} failed validation:\n{report}"
            );
        }
        assert!(matches!(
            preset("nope"),
            Err(SpecError::UnknownPreset(_))
        ));
    }

    #[test]
    fn preset_point_values() {
        let qw = preset("quicksort-work").unwrap();
        // Both neighbouring segments give 1 at the boundary x = 2.
        assert_eq!(qw.g2.as_ref().unwrap().eval(2.0).unwrap(), 1.0);
        assert_eq!(qw.g2.as_ref().unwrap().eval(1.0).unwrap(), 0.5);

        let bst = preset("bst-height").unwrap();
        let u = bst.u.as_ref().unwrap();
        let v = u.eval(8.0 / 7.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "u(8/7) = {v}");

        let qs = preset("quicksort-span").unwrap();
        assert_eq!(qs.shrink.eval(1.0).unwrap(), 0.0);
        assert_eq!(qs.shrink.eval(8.0).unwrap(), 7.0);
        // Step toll is monotone but not strictly increasing: still accepted.
        let bst_toll_lo = bst.toll.eval(1.0).unwrap();
        let bst_toll_hi = bst.toll.eval(5.0).unwrap();
        assert_eq!((bst_toll_lo, bst_toll_hi), (0.0, 1.0));
    }

    #[test]
    fn rejects_decreasing_shrink_ratio() {
        let mut spec = preset("quicksort-span").unwrap();
        spec.shrink = PiecewiseFn::parse("sqrt(x)").unwrap();
        let report = validate_spec(&spec);
        assert!(!report.ok());
        assert!(report
            .failures()
            .any(|c| c.name == "shrink ratio non-decreasing"));
    }

    #[test]
    fn rejects_small_g1() {
        let mut spec = preset("bst-height").unwrap();
        spec.g1 = Some(PiecewiseFn::parse("1/2").unwrap());
        let report = validate_spec(&spec);
        assert!(!report.ok());
        assert!(report.failures().any(|c| c.name == "g1 >= 1 above d"));
    }

    #[test]
    fn iterated_u_step_warning() {
        let spec = preset("unary-halving").unwrap();
        let report = validate_spec(&spec);
        assert!(report.ok(), "warnings must not fail validation:\n{report}");
        let warn = report
            .checks
            .iter()
            .find(|c| c.name == "u continuous above d (sampled)")
            .unwrap();
        assert!(!warn.passed, "iterated halving u is a step function");

        let bst = preset("bst-height").unwrap();
        let report = validate_spec(&bst);
        let warn = report
            .checks
            .iter()
            .find(|c| c.name == "u continuous above d (sampled)")
            .unwrap();
        assert!(warn.passed, "analytic bst u is continuous:\n{report}");
    }

    #[test]
    fn json_round_trip_of_format() {
        let text = r#"{
            "name": "custom",
            "kind": "work",
            "d": 1,
            "toll": [[0, "0"], [1, "x - 1"]],
            "shrink": [[0, "0"], [1.1428571428571428, "7*x/8"]],
            "g1": "x",
            "g2": [[0, true, "1/2"], [1, "1"], [2, "x - 1"]],
            "u": [[0, true, "0"], [1, "log(x, 8/7) + 1"]],
            "u_base": 0
        }"#;
        let spec = RecurrenceSpec::from_json_str(text).unwrap();
        assert_eq!(spec.kind, Kind::Work);
        assert_eq!(spec.g2.as_ref().unwrap().eval(1.0).unwrap(), 0.5);
        assert!(validate_spec(&spec).ok());
    }

    #[test]
    fn json_errors() {
        assert!(RecurrenceSpec::from_json_str("{").is_err());
        assert!(RecurrenceSpec::from_json_str(r#"{"name": "a"}"#).is_err());
        let bad_kind = r#"{"name": "a", "kind": "other", "d": 1, "toll": "0", "shrink": "x/2"}"#;
        assert!(RecurrenceSpec::from_json_str(bad_kind).is_err());
        let bad_expr = r#"{"name": "a", "kind": "unary", "d": 1, "toll": "7*", "shrink": "x/2"}"#;
        match RecurrenceSpec::from_json_str(bad_expr) {
            Err(SpecError::Expr { field, .. }) => assert_eq!(field, "toll"),
            other => panic!("expected expr error, got {other:?}"),
        }
    }
}
