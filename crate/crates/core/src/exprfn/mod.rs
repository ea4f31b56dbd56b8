//! The small expression language used for all size-dependent functions.
//!
//! Every real-valued function of the problem size (tolls, shrink bounds,
//! the weights `g1`/`g2`, analytic solutions `u`) is written in a tiny
//! infix grammar over one variable `x`:
//!
//! ```text
//! 7*x/8          (log(x, 8/7) + 1)^2          max(x - 1, 0)
//! ```
//!
//! `^` is right-associative and binds tightest, unary minus is allowed,
//! and `log(e, b)` takes an arbitrary base expression so bases like `8/7`
//! are first-class. Evaluation either yields a finite real or reports a
//! domain error; it never lets a NaN escape.

mod parse;

pub use parse::parse_expr;

use std::fmt;
use thiserror::Error;

/// Relative tolerance used by the sampled validators in this crate.
pub const REL_TOL: f64 = 1e-9;

/// Binary infix operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// One-argument builtin functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func1 {
    Ln,
    Log2,
    Ceil,
    Floor,
    Sqrt,
}

/// Two-argument builtin functions. `Log` is `log(value, base)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func2 {
    Log,
    Max,
    Min,
}

/// Parsed expression over the single variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call1(Func1, Box<Expr>),
    Call2(Func2, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdent { offset: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error at x = {x}: {message}")]
    Domain { x: f64, message: String },
}

fn domain(x: f64, message: impl Into<String>) -> EvalError {
    EvalError::Domain {
        x,
        message: message.into(),
    }
}

impl Expr {
    /// Evaluate at `x`. Returns a finite real or a domain error.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = self.eval_inner(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain(x, "non-finite result"))
        }
    }

    fn eval_inner(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(c) => *c,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval_inner(x)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval_inner(x)?;
                let b = b.eval_inner(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(domain(x, "division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call1(f, e) => {
                let a = e.eval_inner(x)?;
                match f {
                    Func1::Ln => {
                        if a <= 0.0 {
                            return Err(domain(x, "log of non-positive value"));
                        }
                        a.ln()
                    }
                    Func1::Log2 => {
                        if a <= 0.0 {
                            return Err(domain(x, "log of non-positive value"));
                        }
                        a.log2()
                    }
                    Func1::Ceil => a.ceil(),
                    Func1::Floor => a.floor(),
                    Func1::Sqrt => {
                        if a < 0.0 {
                            return Err(domain(x, "sqrt of negative value"));
                        }
                        a.sqrt()
                    }
                }
            }
            Expr::Call2(f, a, b) => {
                let a = a.eval_inner(x)?;
                let b = b.eval_inner(x)?;
                match f {
                    Func2::Log => {
                        if a <= 0.0 {
                            return Err(domain(x, "log of non-positive value"));
                        }
                        if b <= 0.0 {
                            return Err(domain(x, "log base non-positive"));
                        }
                        if b == 1.0 {
                            return Err(domain(x, "log base 1"));
                        }
                        a.ln() / b.ln()
                    }
                    Func2::Max => a.max(b),
                    Func2::Min => a.min(b),
                }
            }
        };
        if v.is_nan() {
            return Err(domain(x, "operation produced NaN"));
        }
        Ok(v)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

// The printer re-inserts parentheses exactly where the grammar needs them,
// so `parse(print(e)) == e` for every AST the parser can produce.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(
            f: &mut fmt::Formatter<'_>,
            e: &Expr,
            parent: u8,
            parens_on_tie: bool,
        ) -> fmt::Result {
            let p = e.precedence();
            if p < parent || (p == parent && parens_on_tie) {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "x"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                child(f, e, 3, false)
            }
            Expr::Bin(op, a, b) => {
                let p = self.precedence();
                let (sym, right_assoc) = match op {
                    BinOp::Add => ("+", false),
                    BinOp::Sub => ("-", false),
                    BinOp::Mul => ("*", false),
                    BinOp::Div => ("/", false),
                    BinOp::Pow => ("^", true),
                };
                child(f, a, p, right_assoc)?;
                write!(f, " {sym} ")?;
                child(f, b, p, !right_assoc)
            }
            Expr::Call1(func, a) => {
                let name = match func {
                    Func1::Ln => "ln",
                    Func1::Log2 => "log2",
                    Func1::Ceil => "ceil",
                    Func1::Floor => "floor",
                    Func1::Sqrt => "sqrt",
                };
                write!(f, "{name}({a})")
            }
            Expr::Call2(func, a, b) => {
                let name = match func {
                    Func2::Log => "log",
                    Func2::Max => "max",
                    Func2::Min => "min",
                };
                write!(f, "{name}({a}, {b})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PiecewiseError {
    #[error("piecewise function needs at least one segment")]
    Empty,
    #[error("first segment must start at 0, got {0}")]
    FirstLoNonZero(f64),
    #[error("segment {index} lower bound {lo} does not increase")]
    NonIncreasing { index: usize, lo: f64 },
    #[error("segment lower bound must be finite, got {0}")]
    NonFinite(f64),
}

/// One piece of a [`PiecewiseFn`]: the expression applies from `lo` up to
/// the next segment's lower bound. When `closed_hi` is set the piece also
/// owns that upper endpoint, which lets strict inequalities like
/// `1 < x < 2` sit next to `x <= 1` without ambiguity at the breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub closed_hi: bool,
    pub expr: Expr,
}

/// A total function on `[0, inf)` given by ordered segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFn {
    segments: Vec<Segment>,
}

impl PiecewiseFn {
    pub fn new(segments: Vec<Segment>) -> Result<Self, PiecewiseError> {
        if segments.is_empty() {
            return Err(PiecewiseError::Empty);
        }
        if segments[0].lo != 0.0 {
            return Err(PiecewiseError::FirstLoNonZero(segments[0].lo));
        }
        let mut prev = 0.0;
        for (i, seg) in segments.iter().enumerate() {
            if !seg.lo.is_finite() {
                return Err(PiecewiseError::NonFinite(seg.lo));
            }
            if i > 0 && seg.lo <= prev {
                return Err(PiecewiseError::NonIncreasing {
                    index: i,
                    lo: seg.lo,
                });
            }
            prev = seg.lo;
        }
        Ok(PiecewiseFn { segments })
    }

    /// Single-segment function covering all of `[0, inf)`.
    pub fn from_expr(expr: Expr) -> Self {
        PiecewiseFn {
            segments: vec![Segment {
                lo: 0.0,
                closed_hi: false,
                expr,
            }],
        }
    }

    /// Parse a bare expression as a single-segment function.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self::from_expr(parse_expr(text)?))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Interior breakpoints (every segment boundary except 0).
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().skip(1).map(|s| s.lo)
    }

    /// Evaluate at `x >= 0`, picking the segment whose interval contains `x`.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if x < 0.0 || x.is_nan() {
            return Err(domain(x, "piecewise function defined on [0, inf)"));
        }
        let mut idx = match self
            .segments
            .binary_search_by(|s| s.lo.partial_cmp(&x).expect("finite lo"))
        {
            Ok(i) => i,
            Err(i) => i - 1, // i >= 1 because segments[0].lo == 0 <= x
        };
        // A closed upper bound on the previous segment claims the breakpoint.
        if idx > 0 && self.segments[idx].lo == x && self.segments[idx - 1].closed_hi {
            idx -= 1;
        }
        self.segments[idx].expr.eval(x)
    }
}

impl fmt::Display for PiecewiseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.segments.len() == 1 {
            return write!(f, "{}", self.segments[0].expr);
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            let hi = self
                .segments
                .get(i + 1)
                .map(|s| s.lo)
                .unwrap_or(f64::INFINITY);
            let close = if seg.closed_hi { "]" } else { ")" };
            write!(f, "{} on [{}, {}{}", seg.expr, seg.lo, hi, close)?;
        }
        Ok(())
    }
}

/// What [`check_monotone`] should test for non-decrease.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotoneMode {
    /// The function values themselves.
    Value,
    /// The ratio `f(x)/x` (the shrink-bound hypothesis).
    RatioToX,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneViolation {
    pub x1: f64,
    pub x2: f64,
    pub f1: f64,
    pub f2: f64,
}

/// Result of a sampled monotonicity check. A pass is evidence, not a proof.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    pub mode: MonotoneMode,
    pub samples: usize,
    pub non_decreasing: bool,
    pub violation: Option<MonotoneViolation>,
}

/// Log-spaced grid on `[lo, hi]` with all breakpoints in range merged in.
/// Falls back to linear spacing when `lo <= 0`.
pub fn sample_grid(lo: f64, hi: f64, n: usize, breakpoints: &[f64]) -> Vec<f64> {
    assert!(lo < hi && n >= 2);
    let mut pts = Vec::with_capacity(n + breakpoints.len());
    if lo > 0.0 {
        let (ll, lh) = (lo.ln(), hi.ln());
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            pts.push((ll + t * (lh - ll)).exp());
        }
    } else {
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            pts.push(lo + t * (hi - lo));
        }
    }
    pts.extend(breakpoints.iter().copied().filter(|&b| b >= lo && b <= hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // Keep the interval ends exact.
    *pts.first_mut().unwrap() = lo;
    *pts.last_mut().unwrap() = hi;
    pts
}

/// Sampled check that `f` (or `f(x)/x`) is non-decreasing on `[lo, hi]`.
///
/// Uses `samples` log-spaced points plus every piecewise breakpoint in
/// range; violations are compared with relative tolerance [`REL_TOL`].
/// Violations are reported as data, not errors.
pub fn check_monotone(
    f: &PiecewiseFn,
    lo: f64,
    hi: f64,
    samples: usize,
    mode: MonotoneMode,
) -> Result<MonotoneReport, EvalError> {
    let bps: Vec<f64> = f.breakpoints().collect();
    let grid = sample_grid(lo, hi, samples.max(2), &bps);
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        if mode == MonotoneMode::RatioToX && x <= 0.0 {
            continue;
        }
        let fx = f.eval(x)?;
        let val = match mode {
            MonotoneMode::Value => fx,
            MonotoneMode::RatioToX => fx / x,
        };
        if let Some((px, pv)) = prev {
            if val < pv - REL_TOL * pv.abs().max(1.0) {
                return Ok(MonotoneReport {
                    mode,
                    samples: grid.len(),
                    non_decreasing: false,
                    violation: Some(MonotoneViolation {
                        x1: px,
                        x2: x,
                        f1: pv,
                        f2: val,
                    }),
                });
            }
        }
        prev = Some((x, val));
    }
    Ok(MonotoneReport {
        mode,
        samples: grid.len(),
        non_decreasing: true,
        violation: None,
    })
}
