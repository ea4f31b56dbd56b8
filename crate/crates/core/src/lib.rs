//! `recbound`: tail bounds for probabilistic divide-and-conquer
//! recurrences, checked against the processes they describe.
//!
//! Randomized divide-and-conquer algorithms satisfy cost recurrences of
//! the form
//!
//! ```text
//! W(x) = a(x) + sum_i W(h_i(x))     (work)
//! S(x) = b(x) + max_i S(h_i(x))     (span, heights, stack depth)
//! ```
//!
//! where the subproblems `h_i(x)` are random. Given a bound `m(x)` on the
//! expected *maximum* subproblem size and weight functions `g1`, `g2` that
//! are subadditive over splits, this crate evaluates exponential tail
//! bounds of the form `P[S(x) > u(x) + w b(x)] <= g1(x) (m(x)/x)^w` and
//! their general-threshold counterparts, and verifies them empirically:
//!
//! * [`exprfn`] — the expression language for `a`, `m`, `g1`, `g2`, `u`;
//! * [`recspec`] — recurrence specifications, presets, hypothesis checks;
//! * [`bounds`] — the bound engine (`u`, its inverse, `D_r`, theorem forms);
//! * [`mcsim`] — Monte-Carlo simulation and exact small-instance oracles;
//! * [`report`] — CSV/JSON comparison reports.
//!
//! The `recbound` binary exposes all of it on the command line.
//!
//! ```
//! use recbound::{paired_model, preset, run_trials, span_bound_w, tail_prob, validate_spec};
//!
//! let spec = preset("bst-height")?;
//! assert!(validate_spec(&spec).ok());
//!
//! // P[H(256) > log_{8/7} 256 + 1 + 20] <= min(1, 256 (7/8)^20)
//! let b = span_bound_w(&spec, 256.0, 20)?;
//!
//! // ... and the simulated process stays below it.
//! let (model, metric) = paired_model("bst-height").unwrap();
//! let dist = run_trials(&model, 256, metric, 2_000, 42)?;
//! assert!(tail_prob(&dist, b.threshold).ci99_upper.unwrap() <= b.bound);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

#![forbid(unsafe_code)]

pub mod bounds;
pub mod exprfn;
pub mod mcsim;
pub mod recspec;
pub mod report;

pub use bounds::{
    d_r, invert_u, karp_comparison, karp_expectation_bound, karp_unary_bound,
    quicksort_expected_work, solve_u, span_bound, span_bound_w, work_bound, work_bound_w,
    BoundError, BoundValue, CaseTag, Theorem, USolution,
};
pub use exprfn::{check_monotone, parse_expr, Expr, MonotoneMode, MonotoneReport, PiecewiseFn};
pub use mcsim::{
    compare_report, exact_dist, g_subadditivity_check, model_preset, paired_model, run_trials,
    split_max_expectation, tail_prob, DistSummary, Metric, ProcessModel, SplitLaw,
};
pub use recspec::{preset, validate_spec, Kind, RecurrenceSpec, ValidationReport};
pub use report::{ComparisonReport, ReportFormat};
