//! Argument handling and dispatch for the `lpflow` binary.

pub mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lpflow_core::appendix_verify::{run_suite, SuiteConfig};
use lpflow_core::chain::{chain_check, ConstantMethod};
use lpflow_core::flow_classifier::{classify, phi_derivative_from_measure, r_limit, threshold_n};
use lpflow_core::lp_model::{moment_set, p1_mixed_fourth, p1_variance};
use lpflow_core::order_lab::{convex_order_test, default_grid, schur_scan, threshold_grid, Verdict};
use lpflow_core::profile::{coordinate_profile_phi, laplace_m};
use lpflow_core::sampler::sample_uniform_ball;
use lpflow_core::{BallParams, Direction, McBudget, QuadratureSpec, RngStream};
use num_traits::ToPrimitive;
use output::{Quantity, Report, Status};
use serde_json::Value;
use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;

#[derive(Debug, Parser)]
#[command(name = "lpflow", version, about = "Projection profiles of l_p balls under Gaussian smoothing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form coordinate moments, excess kurtosis and normalizers.
    Moments,
    /// Uniform draws from the ball.
    Sample,
    /// Smoothed profile M, A and A~ along one direction.
    Profile,
    /// Ordering of M along the canonical chain u(1), ..., u(n).
    ScanSchur,
    /// Stop-loss comparison of two squared projections.
    ConvexOrder,
    /// Strict decrease of the profile along the canonical chain.
    Chain,
    /// Monotone or nonmonotone coordinate flow.
    Classify,
    /// Smallest n with a monotone coordinate flow.
    Threshold,
    /// Exact and numeric checks of the auxiliary inequalities.
    VerifyAppendix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Exponent p of the ball.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Dimension n.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Smoothing time t.
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// Threshold count for convex-order.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Direction: e1, diag, u:k, or comma-separated coordinates.
    #[arg(long, global = true)]
    pub dir: Option<String>,
    /// Second direction for convex-order.
    #[arg(long, global = true)]
    pub eta: Option<String>,
    /// Monte Carlo samples, or random polynomial samples for verify-appendix.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Absolute and relative quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    /// Worker threads; machine parallelism when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(lpflow_core::Error),
    Io(String),
}

impl From<lpflow_core::Error> for CliError {
    fn from(e: lpflow_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn need<T>(v: Option<T>, flag: &str, cmd: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("{cmd} requires --{flag}")))
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Sample => "sample",
            Command::Profile => "profile",
            Command::ScanSchur => "scan-schur",
            Command::ConvexOrder => "convex-order",
            Command::Chain => "chain",
            Command::Classify => "classify",
            Command::Threshold => "threshold",
            Command::VerifyAppendix => "verify-appendix",
        }
    }
}

/// Resolved inputs of one invocation; echoed in the output and hashed.
struct Inputs {
    config: serde_json::Map<String, Value>,
}

impl Inputs {
    fn new() -> Self {
        Self { config: serde_json::Map::new() }
    }

    fn set(&mut self, key: &str, v: impl serde::Serialize) {
        self.config.insert(key.into(), serde_json::to_value(v).expect("config value"));
    }
}

fn quad_spec(opts: &Opts, default: QuadratureSpec, inputs: &mut Inputs) -> CliResult<QuadratureSpec> {
    let spec = match opts.tol {
        Some(tol) => QuadratureSpec::new(tol, tol, default.max_subdivisions)?,
        None => default,
    };
    inputs.set("tol", spec.abs_tol);
    Ok(spec)
}

fn params(opts: &Opts, cmd: Command, inputs: &mut Inputs) -> CliResult<BallParams> {
    let p = need(opts.p, "p", cmd.name())?;
    let n = need(opts.n, "n", cmd.name())?;
    inputs.set("p", p);
    inputs.set("n", n);
    Ok(BallParams::new(p, n)?)
}

fn budget(opts: &Opts, default: u64, inputs: &mut Inputs) -> CliResult<McBudget> {
    let b = McBudget::new(opts.budget.unwrap_or(default))?;
    inputs.set("budget", b.samples);
    inputs.set("seed", opts.seed);
    Ok(b)
}

fn direction(spec: &Option<String>, default: &str, n: usize, key: &str, inputs: &mut Inputs) -> CliResult<Direction> {
    let s = spec.as_deref().unwrap_or(default);
    inputs.set(key, s);
    Ok(Direction::parse(s, n)?)
}

fn mc_quantity(name: impl Into<String>, value: f64, err: f64) -> Quantity {
    Quantity::estimate(name, value, err, "monte_carlo")
}

fn cmd_moments(opts: &Opts, inputs: &mut Inputs) -> CliResult<Report> {
    let bp = params(opts, Command::Moments, inputs)?;
    let ms = moment_set(bp);
    let mut r = Report::new(Status::Ok);
    r.rows.push(Quantity::closed_form("volume", ms.volume));
    let delta_err = output::CLOSED_FORM_REL_ERR * (ms.m4 + 3.0 * ms.v * ms.v);
    let sign = if bp.p == 1.0 && bp.n >= 2 {
        let v = p1_variance(bp.n);
        let m4 = p1_mixed_fourth(bp.n)?.0;
        let delta = &m4 - &v * &v * num_rational::BigRational::from_integer(3.into());
        let f = |x: &num_rational::BigRational| x.to_f64().unwrap_or(f64::NAN);
        r.rows.push(Quantity::exact("v", f(&v), "exact_rational").with_rational(&v));
        r.rows.push(Quantity::exact("m4", f(&m4), "exact_rational").with_rational(&m4));
        r.rows.push(Quantity::exact("delta", f(&delta), "exact_rational").with_rational(&delta));
        let zero = num_rational::BigRational::from_integer(0.into());
        match delta.cmp(&zero) {
            std::cmp::Ordering::Greater => "positive",
            std::cmp::Ordering::Less => "negative",
            std::cmp::Ordering::Equal => "zero",
        }
    } else {
        r.rows.push(Quantity::closed_form("v", ms.v));
        r.rows.push(Quantity::closed_form("m4", ms.m4));
        r.rows.push(Quantity::estimate("delta", ms.delta, delta_err, "closed_form"));
        if ms.delta.abs() <= delta_err {
            "indeterminate"
        } else if ms.delta > 0.0 {
            "positive"
        } else {
            "negative"
        }
    };
    r.rows.push(Quantity::closed_form("kurtosis_ratio", ms.big_r));
    r.rows.push(Quantity::closed_form("c_norm", ms.c_norm));
    Ok(r.finding("delta_sign", sign))
}

fn cmd_sample(opts: &Opts, inputs: &mut Inputs) -> CliResult<Report> {
    let p = need(opts.p, "p", "sample")?;
    let n = need(opts.n, "n", "sample")?;
    inputs.set("p", p);
    inputs.set("n", n);
    let bp = BallParams::new(p, n)?;
    let count = opts.budget.unwrap_or(10);
    inputs.set("budget", count);
    inputs.set("seed", opts.seed);
    let mut rng = RngStream::new(opts.seed, 0).generator();
    let mut r = Report::new(Status::Ok);
    for i in 0..count {
        let x = sample_uniform_ball(bp, &mut rng).x;
        for (j, xj) in x.iter().enumerate() {
            r.rows.push(Quantity::exact(format!("x[{i}][{j}]"), *xj, "sign_dirichlet_draw"));
        }
    }
    Ok(r)
}

fn cmd_profile(opts: &Opts, inputs: &mut Inputs) -> CliResult<Report> {
    let bp = params(opts, Command::Profile, inputs)?;
    let t = need(opts.t, "t", "profile")?;
    inputs.set("t", t);
    let dir = direction(&opts.dir, "e1", bp.n, "dir", inputs)?;
    let b = budget(opts, McBudget::default().samples, inputs)?;
    let spec = quad_spec(opts, QuadratureSpec::default(), inputs)?;
    let m = laplace_m(bp, t, &dir, b, RngStream::new(opts.seed, 0))?;
    let v = moment_set(bp).v;
    let a_scale = 1.0 / (2.0 * PI * t).sqrt();
    let tilde_scale = (1.0 + v / t).sqrt() / (2.0 * PI).sqrt();
    let mut r = Report::new(Status::Ok);
    r.rows.push(mc_quantity("m", m.value, m.err));
    r.rows.push(mc_quantity("a", m.value * a_scale, m.err * a_scale));
    r.rows.push(mc_quantity("a_tilde", m.value * tilde_scale, m.err * tilde_scale));
    if dir == Direction::e1(bp.n)? {
        let phi = coordinate_profile_phi(bp, t, spec)?;
        r.rows.push(Quantity::estimate("phi", phi.value, phi.err, "quadrature"));
    }
    Ok(r)
}

fn cmd_scan_schur(opts: &Opts, inputs: &mut Inputs) -> CliResult<Report> {
    let bp = params(opts, Command::ScanSchur, inputs)?;
    let t = need(opts.t, "t", "scan-schur")?;
    inputs.set("t", t);
    let b = budget(opts, McBudget::default().samples, inputs)?;
    let chain = (1..=bp.n).map(|k| Direction::canonical(bp.n, k)).collect::<Result<Vec<_>, _>>()?;
    let scan = schur_scan(bp, t, &chain, b, RngStream::new(opts.seed, 0))?;
    let margins: Vec<f64> = scan.pairs.iter().map(|p| p.margin_se).collect();
    let mut r = Report::new(Status::from_margins(&margins, 3.0)).finding("monotone", scan.monotone);
    r = r.finding("first_failure", scan.first_failure.map(|i| format!("u({})/u({})", i + 1, i + 2)));
    for (i, v) in scan.values.iter().enumerate() {
        r.rows.push(mc_quantity(format!("k={}", i + 1), v.value, v.err));
    }
    for pair in &scan.pairs {
        let label = format!("u({})-u({})", pair.index + 1, pair.index + 2);
        r.summary.push(Quantity::estimate(format!("gap {label}"), pair.gap, pair.se, "control_variate"));
        r.summary.push(Quantity::estimate(format!("margin_se {label}"), pair.margin_se, 1.0, "se_units"));
    }
    Ok(r)
}

fn cmd_convex_order(opts: &Opts, inputs: &mut Inputs) -> CliResult<Report> {
    let bp = params(opts, Command::ConvexOrder, inputs)?;
    let theta = direction(&opts.dir, "e1", bp.n, "dir", inputs)?;
    let eta = direction(&opts.eta, "diag", bp.n, "eta", inputs)?;
    let grid = match opts.k {
        Some(k) => threshold_grid(6.0 * moment_set(bp).v, k),
        None => default_grid(bp),
    };
    inputs.set("k", grid.len());
    let b = budget(opts, McBudget::default().samples, inputs)?;
    let rep = convex_order_test(bp, &theta, &eta, &grid, b, RngStream::new(opts.seed, 0))?;
    let status = if rep.verdict == Verdict::Violation { Status::Violation } else { Status::Pass };
    let mut r = Report::new(status).finding("verdict", rep.verdict);
    for (i, a) in rep.thresholds.iter().enumerate() {
        r.rows.push(Quantity::estimate(format!("a={}", output::fmt17(*a)), rep.diff[i], rep.se[i], "control_variate"));
    }
    r.summary.push(mc_quantity("mean_u", rep.mean_u.value, rep.mean_u.se));
    r.summary.push(mc_quantity("mean_v", rep.mean_v.value, rep.mean_v.se));
    r.summary.push(Quantity::estimate("mean_gap_z", rep.mean_gap_z, 1.0, "se_units"));
    r.summary.push(Quantity::estimate("worst_z", rep.worst_z, 1.0, "se_units"));
    Ok(r)
}

fn cmd_chain(opts: &Opts, inputs: &mut Inputs) -> CliResult<Report> {
    let bp = params(opts, Command::Chain, inputs)?;
    let t = opts.t.unwrap_or(0.0);
    inputs.set("t", t);
    let b = budget(opts, McBudget::default().samples, inputs)?;
    let spec = quad_spec(opts, QuadratureSpec::default(), inputs)?;
    let rep = chain_check(bp, t, spec, b, RngStream::new(opts.seed, 0))?;
    let method = match rep.method {
        ConstantMethod::ClosedForm => "closed_form",
        ConstantMethod::Fourier => "fourier",
        ConstantMethod::MonteCarlo => "monte_carlo",
    };
    let pass = if t == 0.0 { 1.0 } else { 3.0 };
    let status = Status::from_margins(&rep.margins, pass);
    let mut r = Report::new(status).finding("strictly_decreasing", rep.strictly_decreasing);
    for e in &rep.entries {
        let err = e.err.max(output::CLOSED_FORM_REL_ERR * e.value.abs());
        r.rows.push(Quantity::estimate(format!("k={}", e.k), e.value, err, method));
    }
    for (i, m) in rep.margins.iter().enumerate() {
        r.summary.push(Quantity::estimate(format!("margin u({})-u({})", i + 1, i + 2), *m, 1.0, "err_units"));
    }
    Ok(r)
}

fn cmd_classify(opts: &Opts, inputs: &mut Inputs) -> CliResult<Report> {
    let bp = params(opts, Command::Classify, inputs)?;
    let spec = quad_spec(opts, QuadratureSpec::new(1e-14, 1e-13, 4000)?, inputs)?;
    let c = classify(bp)?;
    let mut r = Report::new(Status::Ok).finding("verdict", c.verdict);
    let ms = moment_set(bp);
    r.rows.push(Quantity::estimate("delta", c.delta, output::CLOSED_FORM_REL_ERR * (ms.m4 + 3.0 * ms.v * ms.v), "closed_form"));
    r.rows.push(Quantity::closed_form("kurtosis_ratio", c.big_r));
    if let Some((t1, t2)) = c.witness {
        for (name, t) in [("t1", t1), ("t2", t2)] {
            r.summary.push(Quantity::exact(name, t, "grid_point"));
            let (d, e) = phi_derivative_from_measure(bp, t, spec)?;
            r.summary.push(Quantity::estimate(format!("phi_prime({name})"), d, e, "signed_measure"));
        }
    }
    if let Some(x) = c.crossing {
        r.summary.push(Quantity::estimate("crossing", x, 4.0 * f64::EPSILON * x, "bisection"));
    }
    Ok(r)
}

fn cmd_threshold(opts: &Opts, inputs: &mut Inputs) -> CliResult<Report> {
    let p = need(opts.p, "p", "threshold")?;
    inputs.set("p", p);
    let n = threshold_n(p)?;
    let mut r = Report::new(Status::Ok);
    r.rows.push(Quantity::integer("threshold_n", n as i64, "exact_search"));
    r.summary.push(Quantity::closed_form("r_limit", r_limit(p)?));
    Ok(r)
}

fn cmd_verify_appendix(opts: &Opts, inputs: &mut Inputs) -> CliResult<Report> {
    let spec = quad_spec(opts, QuadratureSpec::new(1e-13, 1e-12, 4000)?, inputs)?;
    let mut config = SuiteConfig { seed: opts.seed, ..SuiteConfig::default() };
    if let Some(b) = opts.budget {
        config.poly_samples = b;
    }
    inputs.set("budget", config.poly_samples);
    inputs.set("seed", config.seed);
    let s = run_suite(config, spec)?;
    let mut r = Report::new(Status::from_check(s.holds))
        .finding("bernstein_lists_match", s.poly.bernstein.iter().all(|b| b.matches))
        .finding("boundary_identity", s.poly.boundary_identity)
        .finding("quotient_decomposition", s.poly.quotient_decomposition)
        .finding("poly_inequality", s.poly.holds)
        .finding("trapezoid", s.trapezoid.iter().all(|t| t.holds))
        .finding("two_interval", s.two_interval.holds)
        .finding("wcl", s.wcl.holds)
        .finding("wcl_failures", &s.wcl.failures)
        .finding("dlt", s.dlt.holds)
        .finding("dlt_failures", &s.dlt.failures)
        .finding("second_derivative_identity", s.second_derivative.holds)
        .finding("append", s.append.holds)
        .finding("base_case", s.base_case.iter().all(|b| b.holds));
    let int = |name: &str, v: u64| Quantity::integer(name, v as i64, "count");
    r.rows.push(int("poly_samples", s.poly.samples));
    r.rows.push(int("poly_negative_samples", s.poly.negative_samples));
    r.rows.push(Quantity::estimate("poly_min_value", s.poly.min_value, 1e-14, "sampled_evaluation"));
    for (i, t) in s.trapezoid.iter().enumerate() {
        r.rows.push(Quantity::estimate(format!("trapezoid_slack[{i}]"), t.slack, t.lhs_err, "quadrature"));
    }
    r.rows.push(int("two_interval_samples", s.two_interval.count as u64));
    r.rows.push(int("two_interval_violations", s.two_interval.violations as u64));
    for (name, sw) in [("wcl", &s.wcl), ("dlt", &s.dlt)] {
        r.rows.push(int(&format!("{name}_scenarios"), sw.count as u64));
        r.rows.push(int(&format!("{name}_passed"), sw.passed as u64));
        r.rows.push(int(&format!("{name}_perturbed"), sw.perturbed as u64));
        r.rows.push(Quantity::estimate(format!("{name}_min_relative_slack"), sw.min_relative_slack, 1e-10, "quadrature"));
    }
    r.rows.push(Quantity::estimate("dlt_max_route_gap", s.dlt.max_route_gap, 1e-12, "quadrature"));
    r.rows.push(Quantity::estimate("second_derivative_max_gap", s.second_derivative.max_gap, 1e-8, "finite_difference"));
    let (slack, err) = s
        .append
        .lhs
        .iter()
        .zip(&s.append.rhs)
        .zip(&s.append.err)
        .map(|((l, rr), e)| (rr - l, *e))
        .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc });
    r.rows.push(Quantity::estimate("append_min_slack", slack, err, "quadrature"));
    for b in &s.base_case {
        r.rows.push(Quantity::estimate(format!("base_case_max_gap p={}", b.p), b.max_gap, 1e-8, "finite_difference"));
    }
    Ok(r)
}

fn dispatch(cli: &Cli, inputs: &mut Inputs) -> CliResult<Report> {
    let o = &cli.opts;
    match cli.command {
        Command::Moments => cmd_moments(o, inputs),
        Command::Sample => cmd_sample(o, inputs),
        Command::Profile => cmd_profile(o, inputs),
        Command::ScanSchur => cmd_scan_schur(o, inputs),
        Command::ConvexOrder => cmd_convex_order(o, inputs),
        Command::Chain => cmd_chain(o, inputs),
        Command::Classify => cmd_classify(o, inputs),
        Command::Threshold => cmd_threshold(o, inputs),
        Command::VerifyAppendix => cmd_verify_appendix(o, inputs),
    }
}

/// Parses a parsed command line into the rendered document and its exit status.
pub fn execute(cli: &Cli) -> CliResult<(String, Status)> {
    let mut inputs = Inputs::new();
    let report = dispatch(cli, &mut inputs)?;
    let text = match cli.opts.format {
        Format::Json => output::to_json(cli.command.name(), &Value::Object(inputs.config), &report),
        Format::Csv => output::to_csv(&report),
    };
    Ok((text, report.status))
}

fn emit(text: &str, out: &Option<std::path::PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Runs one invocation and returns the process exit code: 0 on success or a
/// passed check, 1 on a violated property, 2 on usage, domain, convergence or
/// output errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(threads) = cli.opts.threads {
        if threads == 0 {
            eprintln!("usage error: --threads must be at least 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }
    let result = execute(&cli).and_then(|(text, status)| emit(&text, &cli.opts.out).map(|_| status));
    match result {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("lpflow {}: {e}", cli.command.name());
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> CliResult<(String, Status)> {
        let cli = Cli::try_parse_from(std::iter::once("lpflow").chain(args.iter().copied())).unwrap();
        execute(&cli)
    }

    #[test]
    fn moments_for_cross_polytope() {
        let (text, status) = exec(&["moments", "--p", "1", "--n", "4"]).unwrap();
        assert_eq!(status, Status::Ok);
        let v: Value = serde_json::from_str(&text).unwrap();
        let row = |name: &str| v["rows"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap().clone();
        assert_eq!(row("v")["rational"], "1/15");
        assert_eq!(row("m4")["rational"], "1/70");
        assert_eq!(row("delta")["rational"], "1/1050");
        assert_eq!(row("v")["exact"], true);
        assert_eq!(v["findings"]["delta_sign"], "positive");
    }

    #[test]
    fn threshold_is_integer() {
        let (text, _) = exec(&["threshold", "--p", "1", "--format", "csv"]).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "threshold_n,4,0,exact");
    }

    #[test]
    fn missing_flags_are_usage_errors() {
        assert!(matches!(exec(&["moments", "--p", "1"]), Err(CliError::Usage(_))));
        assert!(matches!(exec(&["moments", "--p", "3", "--n", "2"]), Err(CliError::Core(_))));
    }

    #[test]
    fn every_number_has_an_error_marker() {
        let (text, _) = exec(&["classify", "--p", "1", "--n", "3"]).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        for q in v["rows"].as_array().unwrap().iter().chain(v["summary"].as_array().unwrap()) {
            assert!(q.get("err").is_some() || q["exact"] == true, "{q}");
        }
        assert_eq!(v["findings"]["verdict"], "nonmonotone");
    }
}
