mod output;
mod spec_args;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metafib::asymptotics::{classify_growth, ClassifyOptions, GrowthClass};
use metafib::bounds::{verify_main_theorem, BoundsRow};
use metafib::classical::{from_label, LimitQuantity};
use metafib::corpus::{random_corpus, DEFAULT_CAP};
use metafib::extended::{extend, ExtendedRow};
use metafib::scalar::{format_ratio, parse_ratio};
use metafib::{generate, RSpec, Ratio, Scalar, SublinearSpec, Term};
use serde::Serialize;
use serde_json::{json, Value};

use output::{emit, emit_report, Format, Header, Record, Summary};

#[derive(Parser)]
#[command(name = "metafib", version, about = "Generate and analyse variable-order meta-Fibonacci sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SpecArgs {
    /// JSON order-function file
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Order-function kind (constant, identity, table, periodic, indicator) or a preset
    /// (fibonacci, even-odd, alternating-2-3, powers-of-two, towers)
    #[arg(long, value_name = "K")]
    kind: Option<String>,
    /// Kind parameters, e.g. `value=3 clamp=false` or `values=1,1,2,2`
    #[arg(long, value_name = "KEY=VALUE", num_args = 1..)]
    params: Vec<String>,
}

impl SpecArgs {
    fn given(&self) -> bool {
        self.spec.is_some() || self.kind.is_some()
    }

    fn load(&self) -> Result<RSpec, Failure> {
        spec_args::load(self.spec.as_deref(), self.kind.as_deref(), &self.params).map_err(Failure::Input)
    }

    fn sublinear(&self) -> Result<SublinearSpec, Failure> {
        self.load()?.validate().map_err(input)
    }
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Last index N
    #[arg(long, value_name = "N")]
    horizon: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Recorded in the header; drives the random sweep
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict the printed rows to LO..=HI
    #[arg(long, value_name = "LO:HI", allow_hyphen_values = true, value_parser = parse_window)]
    window: Option<(i64, i64)>,
}

impl OutArgs {
    fn horizon(&self, default: usize) -> Result<usize, Failure> {
        let n = self.horizon.unwrap_or(default);
        if n < 1 {
            return Err(Failure::Input("horizon must be at least 1".into()));
        }
        Ok(n)
    }

    fn keeps(&self, n: i64) -> bool {
        self.window.is_none_or(|(lo, hi)| lo <= n && n <= hi)
    }
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad window start {lo:?}"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad window end {hi:?}"))?;
    if lo > hi {
        return Err(format!("window start {lo} exceeds end {hi}"));
    }
    Ok((lo, hi))
}

#[derive(Subcommand)]
enum Command {
    /// Print n, r(n), b(n)
    Generate {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check the per-step ratio bounds and growth cases at every index
    Bounds {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Sweep COUNT random order tables instead of one spec
        #[arg(long, value_name = "COUNT")]
        random: Option<usize>,
        /// Largest order drawn in the random sweep
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Classify long-run growth from the tail of the ratios
    Classify {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Convergence tolerance
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Share of the horizon used as evidence
        #[arg(long, default_value_t = 0.2)]
        tail: f64,
    },
    /// Side-by-side table against a classical sequence
    Compare {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
        /// fibonacci, r-bonacci:R, hofstadter-q, conway or tak:A:K
        #[arg(long = "with", value_name = "SEQ")]
        with: String,
        /// Tolerance for the final limit probe
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Two-sided extension from initial values β(-1), …, β(-M)
    Extend {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Comma-separated p/q values for β(-1), β(-2), …
        #[arg(long, value_name = "P/Q,...", allow_hyphen_values = true)]
        init: String,
        /// Extra backward terms below -M
        #[arg(long, default_value_t = 5)]
        back: usize,
    },
}

enum Failure {
    Input(String),
    Io(io::Error),
}

fn input(e: metafib::Error) -> Failure {
    Failure::Input(e.to_string())
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// `Ok(true)` when every check passed.
type Run = Result<bool, Failure>;

#[derive(Serialize)]
struct TermRow {
    n: usize,
    r: usize,
    b: String,
}

impl Record for TermRow {
    const HEADER: &'static [&'static str] = &["n", "r", "b"];
    fn cells(&self) -> Vec<String> {
        vec![self.n.to_string(), self.r.to_string(), self.b.clone()]
    }
}

impl Record for BoundsRow {
    const HEADER: &'static [&'static str] =
        &["n", "r", "delta_r", "lambda", "mu_lo", "mu_hi", "lower", "upper", "actual", "case"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.r.to_string(),
            self.delta_r.to_string(),
            self.lambda.clone(),
            self.mu_lo.clone(),
            self.mu_hi.clone(),
            self.lower.clone(),
            self.upper.clone(),
            self.actual.clone(),
            self.case.as_str().to_string(),
        ]
    }
}

#[derive(Serialize)]
struct SweepRow {
    spec: usize,
    checked: usize,
    violations: usize,
    case_mismatches: usize,
    first_violation: Option<usize>,
}

impl Record for SweepRow {
    const HEADER: &'static [&'static str] = &["spec", "checked", "violations", "case_mismatches", "first_violation"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.spec.to_string(),
            self.checked.to_string(),
            self.violations.to_string(),
            self.case_mismatches.to_string(),
            self.first_violation.map(|n| n.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Serialize)]
struct CompareRow {
    n: usize,
    b: Option<String>,
    b_ratio: Option<String>,
    t: String,
    t_over_n: String,
    t_over_n_approx: f64,
    t_up: Option<bool>,
    same: Option<bool>,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl Record for CompareRow {
    const HEADER: &'static [&'static str] = &["n", "b", "b_ratio", "t", "t_over_n", "t_over_n_approx", "t_up", "same"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            opt(&self.b),
            opt(&self.b_ratio),
            self.t.clone(),
            self.t_over_n.clone(),
            format!("{:.6}", self.t_over_n_approx),
            opt(&self.t_up),
            opt(&self.same),
        ]
    }
}

impl Record for ExtendedRow {
    const HEADER: &'static [&'static str] = &["n", "r", "beta"];
    fn cells(&self) -> Vec<String> {
        vec![self.n.to_string(), self.r.to_string(), self.beta.clone()]
    }
}

fn header<'a>(command: &'a str, out: &OutArgs, horizon: usize) -> Header<'a> {
    Header {
        command,
        seed: out.seed,
        extra: vec![("horizon", horizon.to_string())],
    }
}

fn cmd_generate(spec: &SpecArgs, out: &OutArgs, w: &mut impl Write) -> Run {
    let horizon = out.horizon(20)?;
    let seq = generate(&spec.sublinear()?, horizon).map_err(input)?;
    let rows: Vec<TermRow> = (0..=horizon)
        .filter(|&n| out.keeps(n as i64))
        .map(|n| TermRow {
            n,
            r: seq.r(n),
            b: seq.term(n).to_string(),
        })
        .collect();
    emit(w, out.format, &header("generate", out, horizon), &rows, &Summary::new())?;
    Ok(true)
}

fn cmd_bounds(spec: &SpecArgs, out: &OutArgs, w: &mut impl Write) -> Run {
    let horizon = out.horizon(50)?;
    let seq = generate(&spec.sublinear()?, horizon).map_err(input)?;
    let records = verify_main_theorem(&seq, 1, horizon).map_err(input)?;
    let violations = records.iter().filter(|r| r.violates()).count();
    let mismatches = records.iter().filter(|r| !r.case_matches()).count();
    let rows: Vec<BoundsRow> = records
        .iter()
        .filter(|r| out.keeps(r.n as i64))
        .map(|r| r.row())
        .collect();
    let summary: Summary = vec![
        ("checked", json!(records.len())),
        ("violations", json!(violations)),
        ("case_mismatches", json!(mismatches)),
    ];
    emit(w, out.format, &header("bounds", out, horizon), &rows, &summary)?;
    Ok(violations == 0 && mismatches == 0)
}

fn sweep_one(index: usize, spec: &SublinearSpec, horizon: usize) -> Result<SweepRow, metafib::Error> {
    let seq = generate(spec, horizon)?;
    let records = verify_main_theorem(&seq, 1, horizon)?;
    Ok(SweepRow {
        spec: index,
        checked: records.len(),
        violations: records.iter().filter(|r| r.violates()).count(),
        case_mismatches: records.iter().filter(|r| !r.case_matches()).count(),
        first_violation: records.iter().find(|r| r.violates()).map(|r| r.n),
    })
}

fn cmd_sweep(count: usize, cap: usize, out: &OutArgs, w: &mut impl Write) -> Run {
    let horizon = out.horizon(300)?;
    if cap < 1 {
        return Err(Failure::Input("--cap must be at least 1".into()));
    }
    let specs = random_corpus(out.seed, count, horizon, cap);
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(count.max(1));
    let chunk = count.div_ceil(threads).max(1);
    // each worker owns its specs; results are re-assembled in spec order
    let results: Vec<Result<SweepRow, metafib::Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                scope.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(i, s)| sweep_one(c * chunk + i, s, horizon))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker")).collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>().map_err(input)?;
    let violations: usize = rows.iter().map(|r| r.violations).sum();
    let mismatches: usize = rows.iter().map(|r| r.case_mismatches).sum();
    let summary: Summary = vec![
        ("specs", json!(rows.len())),
        ("cap", json!(cap)),
        ("violations", json!(violations)),
        ("case_mismatches", json!(mismatches)),
    ];
    let mut head = header("bounds", out, horizon);
    head.extra.push(("random", count.to_string()));
    emit(w, out.format, &head, &rows, &summary)?;
    Ok(violations == 0 && mismatches == 0)
}

fn cmd_classify(spec: &SpecArgs, out: &OutArgs, tol: f64, tail: f64, w: &mut impl Write) -> Run {
    let horizon = out.horizon(500)?;
    let seq = generate(&spec.sublinear()?, horizon).map_err(input)?;
    let opts = ClassifyOptions {
        tail_fraction: tail,
        tol,
        ..ClassifyOptions::default()
    };
    let report = classify_growth(&seq, &opts).map_err(input)?;
    let mut fields = vec![
        ("class", report.class.name().to_string()),
        (
            "order",
            match report.class {
                GrowthClass::ConvergesToAlpha { order } => order.to_string(),
                _ => String::new(),
            },
        ),
        ("evidence_lo", report.evidence_window.0.to_string()),
        ("evidence_hi", report.evidence_window.1.to_string()),
        ("estimate", format!("{:.9}", report.estimate)),
        ("spread", format!("{:e}", report.spread)),
        ("alpha_ref", report.alpha_ref.map(|a| format!("{a:.12}")).unwrap_or_default()),
    ];
    if let GrowthClass::SlowGrowth(d) = &report.class {
        fields.push(("fitted_exponent", format!("{:.4}", d.fitted_exponent)));
        fields.push(("regime", format!("{:?}", d.regime).to_lowercase()));
        fields.push(("b_over_n", format!("{:.6}..{:.6}", d.b_over_n.0, d.b_over_n.1)));
        fields.push(("b_over_log2n", format!("{:.6}..{:.6}", d.b_over_log2n.0, d.b_over_log2n.1)));
    }
    let value = serde_json::to_value(&report).map_err(|e| Failure::Input(e.to_string()))?;
    emit_report(w, out.format, &header("classify", out, horizon), &value, &fields)?;
    Ok(true)
}

fn cmd_compare(spec: &SpecArgs, out: &OutArgs, with: &str, tol: f64, w: &mut impl Write) -> Run {
    let horizon = out.horizon(50)?;
    let seq = if spec.given() {
        Some(generate(&spec.sublinear()?, horizon).map_err(input)?)
    } else {
        None
    };
    let classical = from_label(with, horizon).map_err(input)?;
    let first = classical.first_index().max(1);
    let ratio = |t: &Term, n: usize| Ratio::new(t.clone().into(), n.into());
    let rows: Vec<CompareRow> = (first..=horizon)
        .filter(|&n| out.keeps(n as i64))
        .map(|n| {
            let t = classical.get(n).expect("within horizon");
            let q = ratio(t, n);
            let b = seq.as_ref().map(|s| s.term(n));
            CompareRow {
                n,
                b: b.map(|b| b.to_string()),
                b_ratio: seq.as_ref().map(|s| format_ratio(&s.term_ratio(n).expect("n ≥ 1"))),
                t: t.to_string(),
                t_over_n: format_ratio(&q),
                t_over_n_approx: q.to_f64_lossy(),
                t_up: classical.get(n - 1).map(|prev| t >= prev),
                same: b.map(|b| b == t),
            }
        })
        .collect();
    let mut summary: Summary = vec![("sequence", json!(classical.kind.label()))];
    if let Some(s) = &seq {
        let b_monotone = (1..=horizon).all(|n| s.term(n) >= s.term(n - 1));
        summary.push(("b_nondecreasing", json!(b_monotone)));
        let same = (first..=horizon).all(|n| classical.get(n) == Some(s.term(n)));
        summary.push(("identical_terms", json!(same)));
    }
    summary.push(("t_first_decrease", json!(classical.first_decrease())));
    if let Some(limit) = &classical.known_limit {
        let last = classical.last_index();
        let observed = match limit.quantity {
            LimitQuantity::TermOverIndex => ratio(classical.get(last).expect("last"), last).to_f64_lossy(),
            LimitQuantity::SuccessiveRatio => {
                let (a, b) = (classical.get(last).expect("last"), classical.get(last - 1).expect("prev"));
                Ratio::new(a.clone().into(), b.clone().into()).to_f64_lossy()
            }
        };
        summary.push(("limit_quantity", serde_json::to_value(limit.quantity).unwrap_or(Value::Null)));
        summary.push(("limit", json!(limit.approx)));
        summary.push(("observed", json!(observed)));
        summary.push(("within_tol", json!((observed - limit.approx).abs() < tol)));
        summary.push(("citation", json!(limit.citation)));
    }
    let mut head = header("compare", out, horizon);
    head.extra.push(("with", classical.kind.label()));
    emit(w, out.format, &head, &rows, &summary)?;
    Ok(true)
}

fn cmd_extend(spec: &SpecArgs, out: &OutArgs, init: &str, back: usize, w: &mut impl Write) -> Run {
    let horizon = out.horizon(20)?;
    let spec = spec.load()?;
    let init: Vec<Ratio> = init
        .split(',')
        .map(|s| parse_ratio(s))
        .collect::<Result<_, _>>()
        .map_err(input)?;
    let ext = extend(&spec, &init, horizon, back).map_err(input)?;
    let bad = ext.verify_extended(ext.first_checkable(), ext.highest()).map_err(input)?;
    let rows: Vec<ExtendedRow> = ext.rows().into_iter().filter(|r| out.keeps(r.n)).collect();
    let summary: Summary = vec![
        ("m_r", json!(ext.m_r())),
        ("lowest", json!(ext.lowest())),
        ("verified_from", json!(ext.first_checkable())),
        ("recursion_failures", json!(bad.len())),
    ];
    let mut head = header("extend", out, horizon);
    head.extra.push(("back", back.to_string()));
    emit(w, out.format, &head, &rows, &summary)?;
    Ok(bad.is_empty())
}

fn run(cli: &Cli, w: &mut impl Write) -> Run {
    match &cli.command {
        Command::Generate { spec, out } => cmd_generate(spec, out, w),
        Command::Bounds { spec, out, random, cap } => match random {
            Some(count) => {
                if spec.given() {
                    return Err(Failure::Input("--random replaces --spec/--kind".into()));
                }
                cmd_sweep(*count, *cap, out, w)
            }
            None => cmd_bounds(spec, out, w),
        },
        Command::Classify { spec, out, tol, tail } => cmd_classify(spec, out, *tol, *tail, w),
        Command::Compare { spec, out, with, tol } => cmd_compare(spec, out, with, *tol, w),
        Command::Extend {
            spec,
            out,
            init,
            back,
        } => cmd_extend(spec, out, init, *back, w),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut w = io::BufWriter::new(stdout.lock());
    let result = run(&cli, &mut w);
    let flushed = w.flush();
    match (result, flushed) {
        (Ok(true), Ok(())) => ExitCode::SUCCESS,
        (Ok(false), Ok(())) => {
            eprintln!("metafib: verification failed");
            ExitCode::from(1)
        }
        (Err(Failure::Input(msg)), _) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        (Err(Failure::Io(e)), _) | (_, Err(e)) => {
            if e.kind() == io::ErrorKind::BrokenPipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
