//! The tail-bound engine: the companion recurrence `u`, its inverse, the
//! piecewise bound function `D_r`, and the theorem-level convenience forms.
//!
//! For a recurrence with toll `a`, shrink bound `m` (on the expected
//! maximum subproblem size) and terminal size `d`, let `u` solve
//! `u(x) >= a(x) + u(m(x))` and let `u'` invert `u` above `d`. The bound
//! function is
//!
//! ```text
//! D_r(x) = 1                                        if r <= u(d)
//!        = 0                                        if r > u(d), x <= d
//!        = 1                                        if x > d, u(x) >= r
//!        = (m(x)/x)^ceil((r-u(x))/a(x))
//!            * x / u'(r - a(x)*ceil((r-u(x))/a(x))) otherwise
//! ```
//!
//! and the tail bounds are:
//!
//! * unary   `P[W(x) > r] <= D_r(x)`
//! * span    `P[S(x) > r] <= g1(x) * D_r(x)`
//! * work    `P[W(x) > r] <= g1(x) * D_{r/g2(x)}(x)` with toll `a/g2`
//!
//! At the natural thresholds `r = u(x) + w*a(x)` (integer `w >= 1`) the
//! general form collapses to `g1(x) * (m(x)/x)^w`, which the `*_w`
//! operations compute directly.

use crate::exprfn::EvalError;
use crate::recspec::{Kind, RecurrenceSpec, SpecError};
use std::fmt;
use thiserror::Error;

/// Relative tolerance of the bisection used for `u'`.
pub const BISECT_REL_TOL: f64 = 1e-9;
/// Iteration cap for the bisection.
pub const BISECT_MAX_ITER: usize = 200;
/// Iteration cap for the iterated companion recurrence.
pub const SOLVE_U_MAX_STEPS: usize = 1_000_000;
/// Ceiling arguments within this relative distance of an integer are
/// snapped before rounding up, so `r = u(x) + w*a(x)` yields exactly `w`.
pub const CEIL_SNAP_TOL: f64 = 1e-12;

/// Which case of the bound function produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// `r <= u(d)`: nothing can be said, bound 1.
    RLeUd,
    /// Terminal instance with `r` above the terminal support: bound 0.
    BelowD,
    /// `u(x) >= r`: the threshold is below the deterministic solution.
    UGeR,
    /// The displayed closed-form case.
    General,
    /// A `*_w` convenience form at threshold `u(x) + w*a(x)`.
    SimplifiedW,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::RLeUd => "r_le_ud",
            CaseTag::BelowD => "below_d",
            CaseTag::UGeR => "u_ge_r",
            CaseTag::General => "general",
            CaseTag::SimplifiedW => "simplified_w",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which theorem-level bound produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    KarpUnary,
    KarpWork15,
    Span,
    Work,
}

impl Theorem {
    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::KarpUnary => "karp_unary",
            Theorem::KarpWork15 => "karp_work_1_5",
            Theorem::Span => "span",
            Theorem::Work => "work",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An evaluated tail bound `P[cost > threshold] <= bound`.
///
/// `raw` keeps the formula value before clamping so vacuous bounds
/// (raw > 1) remain visible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub threshold: f64,
    pub bound: f64,
    pub raw: f64,
    pub case: CaseTag,
    pub theorem: Theorem,
}

impl BoundValue {
    fn new(threshold: f64, raw: f64, case: CaseTag, theorem: Theorem) -> Self {
        BoundValue {
            threshold,
            bound: raw.clamp(0.0, 1.0),
            raw,
            case,
            theorem,
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P[cost > {}] <= {} ({}, case {}",
            self.threshold, self.bound, self.theorem, self.case
        )?;
        if self.raw > 1.0 {
            write!(f, ", raw {} clamped", self.raw)?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("zero toll above threshold at x = {x}: ceiling in D_r is undefined")]
    ZeroToll { x: f64 },
    #[error("recurrence does not contract below d within {steps} steps (x = {x})")]
    NoContraction { x: f64, steps: usize },
    #[error("u appears unbounded: no x with u(x) >= {y} within the f64 range")]
    UnboundedU { y: f64 },
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Where a [`USolution`] gets its values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum USource {
    /// The spec supplied an analytic `u`.
    Analytic,
    /// Values come from iterating `u(x) = toll_eff(x) + u(shrink(x))`.
    Iterated,
}

/// Evaluator for the companion recurrence solution.
///
/// Below and at `d` the value is pinned to `u_base`; above `d` it either
/// evaluates the spec's analytic `u` or iterates the recurrence (the
/// minimal solution, which may be a step function).
pub struct USolution<'a> {
    spec: &'a RecurrenceSpec,
    source: USource,
    max_steps: usize,
}

impl<'a> USolution<'a> {
    pub fn new(spec: &'a RecurrenceSpec) -> Self {
        USolution {
            spec,
            source: if spec.u.is_some() {
                USource::Analytic
            } else {
                USource::Iterated
            },
            max_steps: SOLVE_U_MAX_STEPS,
        }
    }

    pub fn source(&self) -> USource {
        self.source
    }

    /// `u(d)`, which by convention is the value on all of `[0, d]`.
    pub fn u_of_d(&self) -> f64 {
        self.spec.u_base
    }

    pub fn eval(&self, x: f64) -> Result<f64, BoundError> {
        if x <= self.spec.terminal_d {
            return Ok(self.spec.u_base);
        }
        match self.source {
            USource::Analytic => Ok(self.spec.u.as_ref().expect("analytic source").eval(x)?),
            USource::Iterated => {
                let mut total = 0.0;
                let mut cur = x;
                for _ in 0..self.max_steps {
                    if cur <= self.spec.terminal_d {
                        return Ok(total + self.spec.u_base);
                    }
                    total += self.spec.toll_eff(cur)?;
                    let next = self.spec.shrink.eval(cur)?;
                    if next >= cur {
                        return Err(BoundError::NoContraction {
                            x,
                            steps: self.max_steps,
                        });
                    }
                    cur = next;
                }
                Err(BoundError::NoContraction {
                    x,
                    steps: self.max_steps,
                })
            }
        }
    }
}

/// Minimal solution of `u(x) = toll_eff(x) + u(shrink(x))` by direct
/// iteration, regardless of whether the spec carries an analytic `u`.
pub fn solve_u(spec: &RecurrenceSpec, x: f64) -> Result<f64, BoundError> {
    let iterated = USolution {
        spec,
        source: USource::Iterated,
        max_steps: SOLVE_U_MAX_STEPS,
    };
    iterated.eval(x)
}

/// Smallest `x` with `u(x) >= y`, by exponential bracketing and bisection.
/// Arguments at or below `u(d)` clamp to `d`; clamping only loosens the
/// final bound, never invalidates it.
pub fn invert_u(spec: &RecurrenceSpec, y: f64) -> Result<f64, BoundError> {
    let u = USolution::new(spec);
    invert_with(&u, y)
}

fn invert_with(u: &USolution<'_>, y: f64) -> Result<f64, BoundError> {
    let d = u.spec.terminal_d;
    if y <= u.u_of_d() {
        return Ok(d);
    }
    let mut lo = d;
    let mut hi = d.max(1.0);
    let mut steps = 0usize;
    while u.eval(hi)? < y {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if !hi.is_finite() || steps > 1100 {
            return Err(BoundError::UnboundedU { y });
        }
    }
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= BISECT_REL_TOL * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if u.eval(mid)? >= y {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn snapped_ceil(t: f64) -> f64 {
    let r = t.round();
    if (t - r).abs() < CEIL_SNAP_TOL * t.abs().max(1.0) {
        r
    } else {
        t.ceil()
    }
}

/// Evaluate the bound function `D_r` for a validated spec.
///
/// Uses the effective toll (`a` or `a/g2` by kind). In the closed-form
/// case, when the inverse is queried exactly at `u(x)` the defining
/// identity `u'(u(x)) = x` is applied directly, so thresholds of the form
/// `u(x) + w*a(x)` reproduce `(m(x)/x)^w` even when the minimal `u` is a
/// step function.
pub fn d_r(spec: &RecurrenceSpec, r: f64, x: f64) -> Result<BoundValue, BoundError> {
    let theorem = theorem_for(spec.kind);
    let u = USolution::new(spec);
    if r <= u.u_of_d() {
        return Ok(BoundValue::new(r, 1.0, CaseTag::RLeUd, theorem));
    }
    if x <= spec.terminal_d {
        return Ok(BoundValue::new(r, 0.0, CaseTag::BelowD, theorem));
    }
    let ux = u.eval(x)?;
    if ux >= r {
        return Ok(BoundValue::new(r, 1.0, CaseTag::UGeR, theorem));
    }
    let a = spec.toll_eff(x)?;
    if a <= 0.0 {
        return Err(BoundError::ZeroToll { x });
    }
    let k = snapped_ceil((r - ux) / a);
    let q = r - a * k;
    let ratio = spec.shrink.eval(x)? / x;
    let denom = if (q - ux).abs() <= 1e-9 * ux.abs().max(q.abs()).max(1.0) {
        x // u'(u(x)) = x by definition of the inverse
    } else {
        invert_with(&u, q)?
    };
    let pow = ratio.powf(k);
    let raw = if denom <= 0.0 {
        // u' clamped all the way to d = 0; the bound degenerates to 1
        // unless the shrink ratio already kills it.
        if pow == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        pow * x / denom
    };
    Ok(BoundValue::new(r, raw, CaseTag::General, theorem))
}

fn theorem_for(kind: Kind) -> Theorem {
    match kind {
        Kind::Unary => Theorem::KarpUnary,
        Kind::Span => Theorem::Span,
        Kind::Work => Theorem::Work,
    }
}

fn require_w(w: u32) -> Result<f64, BoundError> {
    if w == 0 {
        return Err(BoundError::Hypothesis("w must be a positive integer".into()));
    }
    Ok(f64::from(w))
}

fn shrink_ratio_pow(spec: &RecurrenceSpec, x: f64, w: f64) -> Result<f64, BoundError> {
    let m = spec.shrink.eval(x)?;
    Ok((m / x).powf(w))
}

/// Tail bound for a unary recurrence at the natural threshold
/// `u(x) + w*a(x)`: `P[W(x) > u(x) + w*a(x)] <= (m(x)/x)^w`.
pub fn karp_unary_bound(spec: &RecurrenceSpec, x: f64, w: u32) -> Result<BoundValue, BoundError> {
    if spec.kind != Kind::Unary {
        return Err(BoundError::Hypothesis(format!(
            "karp_unary_bound needs a unary spec, `{}` is {}",
            spec.name, spec.kind
        )));
    }
    if x <= spec.terminal_d {
        return Err(BoundError::Hypothesis(format!(
            "x = {x} is not above the terminal size d = {}",
            spec.terminal_d
        )));
    }
    let w = require_w(w)?;
    let toll = spec.toll.eval(x)?;
    if toll <= 0.0 {
        return Err(BoundError::ZeroToll { x });
    }
    let u = USolution::new(spec).eval(x)?;
    let raw = shrink_ratio_pow(spec, x, w)?;
    Ok(BoundValue::new(
        u + w * toll,
        raw,
        CaseTag::SimplifiedW,
        Theorem::KarpUnary,
    ))
}

fn g1_at(spec: &RecurrenceSpec, x: f64) -> Result<f64, BoundError> {
    let g1 = spec.g1.as_ref().ok_or_else(|| {
        BoundError::Hypothesis(format!("spec `{}` has no g1", spec.name))
    })?;
    let v = g1.eval(x)?;
    if v < 1.0 {
        return Err(BoundError::Hypothesis(format!(
            "g1({x}) = {v} < 1; the span/work bound requires g1(x) >= 1"
        )));
    }
    Ok(v)
}

/// General-threshold span bound `min(1, g1(x) * D_r(x))`.
pub fn span_bound(spec: &RecurrenceSpec, r: f64, x: f64) -> Result<BoundValue, BoundError> {
    if spec.kind != Kind::Span {
        return Err(BoundError::Hypothesis(format!(
            "span_bound needs a span spec, `{}` is {}",
            spec.name, spec.kind
        )));
    }
    let g1 = g1_at(spec, x)?;
    let inner = d_r(spec, r, x)?;
    Ok(BoundValue::new(r, g1 * inner.raw, inner.case, Theorem::Span))
}

/// Span bound at the natural threshold `u(x) + w*b(x)`:
/// `P[S(x) > u(x) + w*b(x)] <= g1(x) * (m(x)/x)^w`.
pub fn span_bound_w(spec: &RecurrenceSpec, x: f64, w: u32) -> Result<BoundValue, BoundError> {
    if spec.kind != Kind::Span {
        return Err(BoundError::Hypothesis(format!(
            "span_bound_w needs a span spec, `{}` is {}",
            spec.name, spec.kind
        )));
    }
    let w = require_w(w)?;
    let g1 = g1_at(spec, x)?;
    let toll = spec.toll.eval(x)?;
    let u = USolution::new(spec).eval(x)?;
    let raw = g1 * shrink_ratio_pow(spec, x, w)?;
    Ok(BoundValue::new(
        u + w * toll,
        raw,
        CaseTag::SimplifiedW,
        Theorem::Span,
    ))
}

fn g2_at(spec: &RecurrenceSpec, x: f64) -> Result<f64, BoundError> {
    let g2 = spec.g2.as_ref().ok_or_else(|| {
        BoundError::Hypothesis(format!("spec `{}` has no g2", spec.name))
    })?;
    let v = g2.eval(x)?;
    if v <= 0.0 {
        return Err(BoundError::Hypothesis(format!(
            "g2({x}) = {v} <= 0; the work transformation divides by g2"
        )));
    }
    Ok(v)
}

/// General-threshold work bound, via the `H = W/g2` transformation:
/// `P[W(x) > r] <= g1(x) * D_{r/g2(x)}(x)` with effective toll `a/g2`.
pub fn work_bound(spec: &RecurrenceSpec, r: f64, x: f64) -> Result<BoundValue, BoundError> {
    if spec.kind != Kind::Work {
        return Err(BoundError::Hypothesis(format!(
            "work_bound needs a work spec, `{}` is {}",
            spec.name, spec.kind
        )));
    }
    let g1 = g1_at(spec, x)?;
    let g2 = g2_at(spec, x)?;
    let inner = d_r(spec, r / g2, x)?;
    Ok(BoundValue::new(r, g1 * inner.raw, inner.case, Theorem::Work))
}

/// Work bound at the natural threshold `g2(x)*u(x) + w*a(x)`:
/// `P[W(x) > g2(x)*u(x) + w*a(x)] <= g1(x) * (m(x)/x)^w`.
pub fn work_bound_w(spec: &RecurrenceSpec, x: f64, w: u32) -> Result<BoundValue, BoundError> {
    if spec.kind != Kind::Work {
        return Err(BoundError::Hypothesis(format!(
            "work_bound_w needs a work spec, `{}` is {}",
            spec.name, spec.kind
        )));
    }
    let w = require_w(w)?;
    let g1 = g1_at(spec, x)?;
    let g2 = g2_at(spec, x)?;
    let toll = spec.toll.eval(x)?;
    let u = USolution::new(spec).eval(x)?;
    let raw = g1 * shrink_ratio_pow(spec, x, w)?;
    Ok(BoundValue::new(
        g2 * u + w * toll,
        raw,
        CaseTag::SimplifiedW,
        Theorem::Work,
    ))
}

/// Expectation-based tail bound `P[W >= (w+1) E[W]] < e^-w` (valid for any
/// positive real `w`), for comparison against the `g`-weighted bounds.
pub fn karp_expectation_bound(expected_work: f64, w: f64) -> Result<BoundValue, BoundError> {
    if w <= 0.0 || w.is_nan() {
        return Err(BoundError::Hypothesis("w must be positive".into()));
    }
    if expected_work < 0.0 {
        return Err(BoundError::Hypothesis(
            "expected work must be non-negative".into(),
        ));
    }
    Ok(BoundValue::new(
        (w + 1.0) * expected_work,
        (-w).exp(),
        CaseTag::SimplifiedW,
        Theorem::KarpWork15,
    ))
}

/// `H_n`, the n-th harmonic number.
pub fn harmonic(n: u64) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// Expected comparison count of randomized quicksort on `n` distinct keys:
/// `2((n+1)(H_n - 1) - (n - 1))`, and 0 for `n <= 1`.
pub fn quicksort_expected_work(n: u64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let nf = n as f64;
    2.0 * ((nf + 1.0) * (harmonic(n) - 1.0) - (nf - 1.0))
}

/// Side-by-side comparison of the g2-weighted quicksort work bound with
/// the expectation-based bound, both at their natural thresholds.
///
/// With `w = ceil(k * log_{8/7} n)` the work bound yields
/// `P[W > (k+1)(n log_{8/7} n + n)] <= (1/n)^(k-1)`, while the
/// expectation form gives `P[W >= (k+1) E[W]] < e^-k`. The thresholds
/// differ, so the comparison is displayed rather than asserted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KarpComparison {
    pub n: u64,
    pub k: u32,
    /// `w` at which the weighted bound was instantiated.
    pub w: u64,
    pub expected_work: f64,
    pub ours_threshold: f64,
    pub ours_bound: f64,
    pub karp_threshold: f64,
    pub karp_bound: f64,
}

pub fn karp_comparison(n: u64, k: u32) -> KarpComparison {
    let nf = n as f64;
    let kf = f64::from(k);
    let log87 = nf.ln() / (8.0f64 / 7.0).ln();
    KarpComparison {
        n,
        k,
        w: (kf * log87).ceil() as u64,
        expected_work: quicksort_expected_work(n),
        ours_threshold: (kf + 1.0) * (nf * log87 + nf),
        ours_bound: nf.powf(1.0 - kf),
        karp_threshold: (kf + 1.0) * quicksort_expected_work(n),
        karp_bound: (-kf).exp(),
    }
}
