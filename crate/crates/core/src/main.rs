//! Command-line front end for the recbound toolkit.
//!
//! Exit codes: 0 on success, 1 when a validation check or bound
//! hypothesis fails (including dominance violations in `compare`),
//! 2 for usage or I/O problems.

use clap::{Args, Parser, Subcommand};
use recbound::bounds::{
    d_r, karp_comparison, karp_unary_bound, span_bound, span_bound_w, work_bound, work_bound_w,
    BoundError, BoundValue,
};
use recbound::mcsim::{
    self, exact_dist, model_preset, paired_model, run_trials, tail_prob, CompareOptions,
    DistSummary, Metric, ProcessModel,
};
use recbound::recspec::{self, validate_spec, Kind, RecurrenceSpec};
use recbound::report::{fmt_g12, ReportFormat};
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable naming the default directory for report output.
const OUT_DIR_ENV: &str = "RECBOUND_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "recbound",
    version,
    about = "Tail bounds for probabilistic divide-and-conquer recurrences, \
             with Monte-Carlo verification"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SpecSource {
    /// Shipped preset name (see `recbound presets`).
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    /// JSON recurrence spec file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Logarithm base for the quicksort-span toll (default 2).
    #[arg(long)]
    span_base: Option<f64>,
}

impl SpecSource {
    fn load(&self) -> Result<RecurrenceSpec, AppError> {
        match (&self.preset, &self.spec) {
            (Some(name), None) => {
                if name == "quicksort-span" {
                    if let Some(base) = self.span_base {
                        return Ok(recspec::quicksort_span_with_base(base));
                    }
                }
                Ok(recspec::preset(name).map_err(usage)?)
            }
            (None, Some(path)) => Ok(RecurrenceSpec::from_json_file(path).map_err(usage)?),
            _ => Err(AppError::Usage(
                "exactly one of --preset or --spec is required".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a tail bound for one spec at one size.
    Bound {
        #[command(flatten)]
        source: SpecSource,
        /// Problem size.
        #[arg(long)]
        x: f64,
        /// Natural-threshold form: bound P[cost > u(x) + w*toll(x)].
        #[arg(long, conflicts_with = "r")]
        w: Option<u32>,
        /// General form: bound P[cost > r].
        #[arg(long)]
        r: Option<f64>,
        /// Print the bound as a JSON object.
        #[arg(long)]
        json: bool,
    },
    /// Run the matching random process and print distribution statistics.
    Simulate {
        #[command(flatten)]
        source: SpecSource,
        /// Process model (quicksort | bst | unary-uniform); inferred for presets.
        #[arg(long)]
        model: Option<String>,
        /// Metric (work | span | height); inferred for presets.
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Exact enumeration instead of sampling (n <= 12).
        #[arg(long)]
        exact: bool,
        /// Also print P[X > r] with its 99% Wilson upper bound.
        #[arg(long)]
        r: Option<f64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compare analytic bounds against simulated tails for w = 1..w-max.
    Compare {
        #[command(flatten)]
        source: SpecSource,
        /// Process model; inferred for presets.
        #[arg(long)]
        model: Option<String>,
        /// Metric; inferred for presets.
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 30)]
        w_max: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Output file; relative paths resolve under $RECBOUND_OUT_DIR.
        #[arg(long)]
        out: PathBuf,
        /// csv or json (default: by file extension, else csv).
        #[arg(long)]
        format: Option<String>,
        /// Pin the report timestamp (for reproducible output).
        #[arg(long)]
        timestamp: Option<String>,
        /// k for the expectation-bound comparison on work specs.
        #[arg(long, default_value_t = 3)]
        karp_k: u32,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a spec against the theorem hypotheses.
    Validate {
        #[command(flatten)]
        source: SpecSource,
    },
    /// List the shipped recurrence presets.
    Presets,
    /// Expected quicksort comparison count 2((n+1)(H_n - 1) - (n - 1)).
    ExpectedWork {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Debug)]
enum AppError {
    /// Hypothesis or validation failure -> exit 1.
    Failed(String),
    /// Usage or I/O problem -> exit 2.
    Usage(String),
}

fn usage<E: std::fmt::Display>(e: E) -> AppError {
    AppError::Usage(e.to_string())
}

impl From<BoundError> for AppError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::Hypothesis(_) | BoundError::ZeroToll { .. } => {
                AppError::Failed(e.to_string())
            }
            other => AppError::Usage(other.to_string()),
        }
    }
}

impl From<mcsim::SimError> for AppError {
    fn from(e: mcsim::SimError) -> Self {
        AppError::Usage(e.to_string())
    }
}

impl From<mcsim::CompareError> for AppError {
    fn from(e: mcsim::CompareError) -> Self {
        match e {
            mcsim::CompareError::Sim(e) => e.into(),
            mcsim::CompareError::Bound(e) => e.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, AppError>
where
    T: Send,
{
    match workers {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(usage)?;
            Ok(pool.install(f))
        }
    }
}

fn resolve_model(
    source: &SpecSource,
    spec: &RecurrenceSpec,
    model: &Option<String>,
    metric: &Option<String>,
) -> Result<(ProcessModel, Metric), AppError> {
    let inferred = source
        .preset
        .as_deref()
        .or(Some(spec.name.as_str()))
        .and_then(paired_model);
    let mut model = match model {
        Some(name) => model_preset(name)?,
        None => match &inferred {
            Some((m, _)) => m.clone(),
            None => {
                return Err(AppError::Usage(
                    "no shipped model matches this spec; pass --model".into(),
                ))
            }
        },
    };
    // Keep the simulated span toll in the same log base as the spec toll.
    if let Some(base) = source.span_base {
        if model.name == "quicksort" {
            model = mcsim::quicksort_model_with_span_base(base);
        }
    }
    let metric = match metric {
        Some(name) => Metric::parse(name)
            .ok_or_else(|| AppError::Usage(format!("unknown metric `{name}`")))?,
        None => match &inferred {
            Some((_, m)) => *m,
            None => match spec.kind {
                Kind::Work | Kind::Unary => Metric::Work,
                Kind::Span => Metric::Span,
            },
        },
    };
    Ok((model, metric))
}

fn print_bound(b: &BoundValue, json: bool) {
    if json {
        println!(
            "{{\"threshold\": {}, \"bound\": {}, \"raw\": {}, \"case\": \"{}\", \"theorem\": \"{}\"}}",
            fmt_g12(b.threshold),
            fmt_g12(b.bound),
            fmt_g12(b.raw),
            b.case,
            b.theorem
        );
    } else {
        println!("threshold      {}", b.threshold);
        println!("bound          {}", b.bound);
        if b.raw > 1.0 {
            println!("raw            {}   (vacuous: clamped to 1)", b.raw);
        }
        println!("case           {}", b.case);
        println!("theorem        {}", b.theorem);
    }
}

fn run(cmd: Cmd) -> Result<(), AppError> {
    match cmd {
        Cmd::Bound {
            source,
            x,
            w,
            r,
            json,
        } => {
            let spec = source.load()?;
            let b = match (w, r) {
                (Some(w), None) => match spec.kind {
                    Kind::Unary => karp_unary_bound(&spec, x, w)?,
                    Kind::Span => span_bound_w(&spec, x, w)?,
                    Kind::Work => work_bound_w(&spec, x, w)?,
                },
                (None, Some(r)) => match spec.kind {
                    Kind::Unary => d_r(&spec, r, x)?,
                    Kind::Span => span_bound(&spec, r, x)?,
                    Kind::Work => work_bound(&spec, r, x)?,
                },
                _ => {
                    return Err(AppError::Usage(
                        "exactly one of --w or --r is required".into(),
                    ))
                }
            };
            print_bound(&b, json);
            Ok(())
        }

        Cmd::Simulate {
            source,
            model,
            metric,
            n,
            trials,
            seed,
            exact,
            r,
            workers,
        } => {
            let spec = source.load()?;
            let (model, metric) = resolve_model(&source, &spec, &model, &metric)?;
            let dist = if exact {
                exact_dist(&model, n, metric)?
            } else {
                with_workers(workers, || run_trials(&model, n, metric, trials, seed))??
            };
            println!(
                "model {} metric {} n {} ({})",
                model.name,
                metric,
                n,
                dist.kind_str()
            );
            match &dist {
                DistSummary::Empirical { trials, seed, .. } => {
                    println!("trials {trials} seed {seed}");
                    println!("mean {}", dist.mean());
                    println!("min {} max {}", dist.min(), dist.max());
                    println!(
                        "p50 {} p90 {} p99 {}",
                        dist.quantile(0.50),
                        dist.quantile(0.90),
                        dist.quantile(0.99)
                    );
                }
                DistSummary::Exact { support } => {
                    println!("mean {}", dist.mean());
                    println!("support ({} points):", support.len());
                    for (v, p) in support {
                        println!("  {v}\t{p}");
                    }
                }
            }
            if let Some(r) = r {
                let t = tail_prob(&dist, r);
                match t.ci99_upper {
                    Some(ci) => println!("P[X > {r}] = {} (99% Wilson upper {ci})", t.prob),
                    None => println!("P[X > {r}] = {}", t.prob),
                }
            }
            Ok(())
        }

        Cmd::Compare {
            source,
            model,
            metric,
            n,
            w_max,
            trials,
            seed,
            out,
            format,
            timestamp,
            karp_k,
            workers,
        } => {
            let spec = source.load()?;
            let report = validate_spec(&spec);
            if !report.ok() {
                eprint!("{report}");
                return Err(AppError::Failed(format!(
                    "spec `{}` failed validation",
                    spec.name
                )));
            }
            let (model, metric) = resolve_model(&source, &spec, &model, &metric)?;
            if w_max == 0 {
                return Err(AppError::Usage("--w-max must be at least 1".into()));
            }
            let ws: Vec<u32> = (1..=w_max).collect();
            let opts = CompareOptions {
                timestamp,
                karp_k: Some(karp_k),
            };
            let cmp = with_workers(workers, || {
                mcsim::compare_report(&spec, &model, metric, n, &ws, trials, seed, &opts)
            })??;

            let path = resolve_out_path(out);
            let format = match format {
                Some(name) => ReportFormat::parse(&name)
                    .ok_or_else(|| AppError::Usage(format!("unknown format `{name}`")))?,
                None => ReportFormat::for_path(&path),
            };
            cmp.write_to(&path, format).map_err(usage)?;

            println!(
                "spec {} model {} metric {} n {} trials {} seed {}",
                cmp.spec_name, cmp.model_name, cmp.metric, cmp.n, cmp.trials, cmp.seed
            );
            println!("{}", recbound::report::CSV_HEADER);
            for row in &cmp.rows {
                println!(
                    "{},{},{},{},{},{}",
                    row.w,
                    fmt_g12(row.threshold),
                    fmt_g12(row.analytic_bound),
                    fmt_g12(row.empirical_tail),
                    fmt_g12(row.ci_upper),
                    row.dominance_ok
                );
            }
            if let Some(k) = &cmp.karp {
                println!();
                println!(
                    "expectation-bound comparison at n = {} (E[W] = {}):",
                    k.n,
                    fmt_g12(k.expected_work)
                );
                println!(
                    "  g2-weighted bound: P[W > {}] <= {}   (k = {}, w = {})",
                    fmt_g12(k.ours_threshold),
                    fmt_g12(k.ours_bound),
                    k.k,
                    k.w
                );
                println!(
                    "  expectation bound: P[W >= {}] < {}   (at its own threshold)",
                    fmt_g12(k.karp_threshold),
                    fmt_g12(k.karp_bound)
                );
                println!("  the thresholds differ; the rows above are the authoritative check");
            }
            println!("wrote {}", path.display());
            if cmp.dominance_ok() {
                println!("dominance: OK ({} rows)", cmp.rows.len());
                Ok(())
            } else {
                let bad = cmp.rows.iter().filter(|r| !r.dominance_ok).count();
                Err(AppError::Failed(format!(
                    "dominance violated in {bad} of {} rows",
                    cmp.rows.len()
                )))
            }
        }

        Cmd::Validate { source } => {
            let spec = source.load()?;
            let report = validate_spec(&spec);
            print!("{report}");
            if report.ok() {
                println!("spec `{}` accepted", spec.name);
                Ok(())
            } else {
                Err(AppError::Failed(format!(
                    "spec `{}` rejected: {}",
                    spec.name,
                    report
                        .failures()
                        .map(|c| c.name.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                )))
            }
        }

        Cmd::Presets => {
            println!("recurrence presets:");
            for name in recspec::PRESET_NAMES {
                let spec = recspec::preset(name).expect("shipped preset");
                let pairing = paired_model(name)
                    .map(|(m, metric)| format!("{} / {}", m.name, metric))
                    .unwrap_or_else(|| "-".into());
                println!(
                    "  {name:<16} kind {:<6} d {:<4} model {pairing}",
                    spec.kind.as_str(),
                    spec.terminal_d
                );
                println!("      toll   {}", spec.toll);
                println!("      shrink {}", spec.shrink);
                if let Some(u) = &spec.u {
                    println!("      u      {u}");
                }
            }
            println!("process models: {}", mcsim::MODEL_NAMES.join(", "));
            Ok(())
        }

        Cmd::ExpectedWork { n } => {
            let e = recbound::quicksort_expected_work(n);
            println!("{e}");
            // Context for comparisons against the expectation bound.
            if n >= 2 {
                let k = karp_comparison(n, 3);
                println!(
                    "# expectation-bound threshold (w+1)E[W] at w=3: {}",
                    fmt_g12(k.karp_threshold)
                );
            }
            Ok(())
        }
    }
}

fn resolve_out_path(out: PathBuf) -> PathBuf {
    if out.is_relative() {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(out);
            }
        }
    }
    out
}
