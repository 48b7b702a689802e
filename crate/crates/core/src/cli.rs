//! Command-line front end. [`run`] is the whole program minus process exit.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::distortion::DistortionFunction;
use crate::drm_bounds::{bound, BoundResult, BoundSide, Options};
use crate::error::Error;
use crate::exec::Execution;
use crate::oracle::{self, OracleReport, SearchOptions};
use crate::quadrature::DEFAULT_TOL;
use crate::quantile::{MomentSpec, ShapeClass};
use crate::sweep::{parse_grid, sweep, Template};

/// Exit status for malformed input.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for runtime errors and oracle violations.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "robust-drm", version, about = "Worst- and best-case distortion risk under moment and shape constraints")]
pub struct Cli {
    /// JSON run configuration, used in place of a subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Supremum and/or infimum of the risk measure.
    Bound(BoundArgs),
    /// Quantile function of the law attaining a bound, as CSV.
    Extremal(ExtremalArgs),
    /// Brute-force search against the analytic bounds.
    Verify(VerifyArgs),
    /// Bounds along a grid of levels.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Sup,
    Inf,
    Both,
}

impl SideArg {
    fn sides(self) -> Vec<BoundSide> {
        match self {
            SideArg::Sup => vec![BoundSide::Sup],
            SideArg::Inf => vec![BoundSide::Inf],
            SideArg::Both => vec![BoundSide::Sup, BoundSide::Inf],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// identity, var:α, varplus:α, tvar:α, rvar:α,β, ph:α,r, pwl:p,h;..., steps:t,c[,l];...
    #[arg(long, short = 'd')]
    pub distortion: String,
    /// general, symmetric, unimodal or us
    #[arg(long, short = 'c', default_value = "general")]
    pub class: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Write here instead of stdout.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Quadrature tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Points in the bracket scan.
    #[arg(long, default_value_t = crate::optimize::DEFAULT_SCAN)]
    pub scan: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "both")]
    pub side: SideArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ExtremalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "sup")]
    pub side: SideArg,
    /// Interior grid points per unit of p, besides segment ends.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Export the feasible law at the constructive end of a bracket.
    #[arg(long)]
    pub witness: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Distortion to check; the default suite runs when omitted.
    #[arg(long, short = 'd')]
    pub distortion: Option<String>,
    #[arg(long, short = 'c')]
    pub class: Option<String>,
    #[arg(long, value_enum, default_value = "both")]
    pub side: SideArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, env = "DRM_BOUNDS_SEED", default_value_t = oracle::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// var, varplus, tvar, rvar:β or ph:r; α comes from the grid.
    #[arg(long, short = 'd')]
    pub distortion: String,
    #[arg(long, short = 'c', default_value = "general")]
    pub class: String,
    /// start:stop:step
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

/// Configuration file: `command` plus the flags of that command.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub distortion: Option<String>,
    pub class: Option<String>,
    pub side: Option<SideArg>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
    pub scan: Option<usize>,
    pub grid: Option<usize>,
    pub witness: Option<bool>,
}

impl RunConfig {
    /// Rebuilds the equivalent command line.
    fn to_args(&self) -> Vec<String> {
        let mut v = vec!["robust-drm".to_string(), self.command.clone()];
        let mut flag = |name: &str, val: Option<String>| {
            if let Some(x) = val {
                v.push(format!("--{name}"));
                v.push(x);
            }
        };
        flag("distortion", self.distortion.clone());
        flag("class", self.class.clone());
        flag(
            "side",
            self.side.map(|s| s.to_possible_value().unwrap().get_name().to_string()),
        );
        flag("mu", self.mu.map(|x| x.to_string()));
        flag("sigma", self.sigma.map(|x| x.to_string()));
        flag("alpha", self.alpha.clone());
        flag("output", self.output.as_ref().map(|p| p.display().to_string()));
        flag(
            "format",
            self.format.map(|f| f.to_possible_value().unwrap().get_name().to_string()),
        );
        flag("seed", self.seed.map(|x| x.to_string()));
        flag("budget", self.budget.map(|x| x.to_string()));
        flag("tol", self.tol.map(|x| x.to_string()));
        flag("scan", self.scan.map(|x| x.to_string()));
        flag("grid", self.grid.map(|x| x.to_string()));
        if self.witness == Some(true) {
            v.push("--witness".into());
        }
        v
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidLevel { .. } | Error::InvalidDistortion(_) | Error::NonPositiveScale(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Runs the program on `args` (including the program name) and returns the
/// exit status. Results go to `out` unless an output file is given.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    let command = match (cli.command, cli.config) {
        (Some(c), None) => c,
        (None, Some(path)) => match load_config(&path) {
            Ok(c) => c,
            Err(msg) => {
                let _ = writeln!(err, "error: {msg}");
                return EXIT_USAGE;
            }
        },
        (Some(_), Some(_)) => {
            let _ = writeln!(err, "error: give either a subcommand or --config, not both");
            return EXIT_USAGE;
        }
        (None, None) => {
            let _ = writeln!(err, "error: a subcommand or --config is required (try --help)");
            return EXIT_USAGE;
        }
    };
    match dispatch(command, out, err) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn load_config(path: &PathBuf) -> std::result::Result<Command, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))?;
    Cli::try_parse_from(cfg.to_args())
        .map_err(|e| format!("bad config {}: {}", path.display(), e.render()))?
        .command
        .ok_or_else(|| "config names no command".to_string())
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<i32, Failure> {
    match command {
        Command::Bound(a) => cmd_bound(&a, out),
        Command::Extremal(a) => cmd_extremal(&a, out),
        Command::Verify(a) => cmd_verify(&a, out, err),
        Command::Sweep(a) => cmd_sweep(&a, out),
    }
}

fn emit(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Nine decimals; infinities as `inf` / `-inf`.
pub fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        let s = format!("{v:.9}");
        if s == "-0.000000000" {
            "0.000000000".into()
        } else {
            s
        }
    }
}

/// JSON number rounded to nine decimals, or a string for non-finite values.
pub fn json_num(v: f64) -> Value {
    if v.is_finite() {
        let s = fmt_num(v);
        Value::Number(serde_json::Number::from_f64(s.parse().unwrap()).unwrap())
    } else {
        Value::String(fmt_num(v))
    }
}

fn parse_common(c: &Common) -> std::result::Result<(DistortionFunction, ShapeClass, MomentSpec, Options), Failure> {
    let h = DistortionFunction::parse(&c.distortion)?;
    let class: ShapeClass = c.class.parse()?;
    let m = MomentSpec::new(c.mu, c.sigma)?;
    if !(c.tol > 0.0) {
        return Err(Failure::Usage(format!("tolerance must be positive, got {}", c.tol)));
    }
    let opts = Options {
        execution: Execution::Auto,
        scan: c.scan.max(3),
        tol: c.tol,
    };
    Ok((h, class, m, opts))
}

fn result_json(r: &BoundResult) -> Map<String, Value> {
    let mut o = Map::new();
    o.insert("side".into(), json!(r.side.to_string()));
    o.insert("value".into(), json_num(r.value));
    o.insert("method".into(), json!(r.method.to_string()));
    o.insert("attainable".into(), json!(r.attainable));
    o.insert("degenerate".into(), json!(r.degenerate));
    o.insert(
        "bracket".into(),
        match &r.bracket {
            Some(b) => json!({
                "lower": json_num(b.lower),
                "upper": json_num(b.upper),
                "argmax_b": json_num(b.argmax_b),
                "branch": b.branch,
                "grid_size": b.grid_size,
                "refinements": b.refinements,
            }),
            None => Value::Null,
        },
    );
    o.insert("diagnostics".into(), json!(r.diagnostics));
    o
}

fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let (h, class, m, opts) = parse_common(&a.common)?;
    let results: Vec<BoundResult> = a
        .side
        .sides()
        .into_iter()
        .map(|s| bound(&h, class, s, &m, &opts))
        .collect::<crate::error::Result<_>>()?;
    let text = match a.format {
        Format::Json => {
            let mut o = Map::new();
            o.insert("distortion".into(), json!(h.to_string()));
            o.insert("class".into(), json!(class.to_string()));
            o.insert("mu".into(), json_num(m.mu));
            o.insert("sigma".into(), json_num(m.sigma));
            if let [r] = results.as_slice() {
                o.extend(result_json(r));
            } else {
                for r in &results {
                    o.insert(r.side.to_string(), Value::Object(result_json(r)));
                }
            }
            serde_json::to_string_pretty(&Value::Object(o)).unwrap() + "\n"
        }
        Format::Csv => {
            let mut s = String::from("side,value,method,attainable,lower,upper\n");
            for r in &results {
                let (lo, hi) = r.bracket.as_ref().map_or((String::new(), String::new()), |b| {
                    (fmt_num(b.lower), fmt_num(b.upper))
                });
                s += &format!("{},{},{},{},{lo},{hi}\n", r.side, fmt_num(r.value), r.method, r.attainable);
            }
            s
        }
    };
    emit(&a.common.output, &text, out)?;
    Ok(0)
}

fn cmd_extremal(a: &ExtremalArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let (h, class, m, opts) = parse_common(&a.common)?;
    let side = match a.side {
        SideArg::Sup => BoundSide::Sup,
        SideArg::Inf => BoundSide::Inf,
        SideArg::Both => return Err(Failure::Usage("extremal needs --side sup or --side inf".into())),
    };
    let r = bound(&h, class, side, &m, &opts)?;
    let law = match (&r.extremal, &r.bracket) {
        (Some(q), _) => q.clone(),
        (None, Some(b)) if a.witness && b.witness.is_some() => b.witness.clone().unwrap(),
        (None, Some(_)) => {
            return Err(Failure::Runtime(
                "the bound is a bracket with no attaining law; pass --witness for the feasible law at its constructive end".into(),
            ))
        }
        (None, None) => {
            return Err(Failure::Runtime(format!(
                "the {side} {} is approached but not attained",
                fmt_num(r.value)
            )))
        }
    };
    let mut s = String::from("p,q\n");
    for (p, q) in law.csv_rows(a.grid.max(1)) {
        s += &format!("{},{}\n", fmt_num(p), fmt_num(q));
    }
    emit(&a.common.output, &s, out)?;
    Ok(0)
}

/// The matrix checked by `verify` when no distortion is given.
pub fn default_suite() -> Vec<(DistortionFunction, ShapeClass, BoundSide)> {
    let specs = ["var:0.9", "varplus:0.3", "tvar:0.75", "rvar:0.6,0.95", "ph:0.8,0.75"];
    let mut v = Vec::new();
    for s in specs {
        let h = DistortionFunction::parse(s).expect("suite specs parse");
        for class in ShapeClass::ALL {
            for side in [BoundSide::Sup, BoundSide::Inf] {
                v.push((h.clone(), class, side));
            }
        }
    }
    v
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let m = MomentSpec::new(a.mu, a.sigma)?;
    let cases: Vec<(DistortionFunction, ShapeClass, BoundSide)> = match &a.distortion {
        Some(d) => {
            let h = DistortionFunction::parse(d)?;
            let classes = match &a.class {
                Some(c) => vec![c.parse::<ShapeClass>()?],
                None => ShapeClass::ALL.to_vec(),
            };
            let mut v = Vec::new();
            for class in classes {
                for side in a.side.sides() {
                    v.push((h.clone(), class, side));
                }
            }
            v
        }
        None if a.class.is_some() => {
            return Err(Failure::Usage("--class needs --distortion".into()));
        }
        None => default_suite(),
    };
    let opts = SearchOptions {
        budget: a.budget.max(1),
        seed: a.seed,
        execution: Execution::Auto,
    };
    let mut reports: Vec<OracleReport> = Vec::new();
    for (h, class, side) in &cases {
        reports.push(oracle::search(h, *class, *side, &m, &opts)?);
    }
    let violations = reports.iter().filter(|r| r.violation).count();
    let unreached = reports.iter().filter(|r| r.reached == Some(false)).count();
    let body: Vec<Value> = reports.iter().map(report_json).collect();
    let doc = json!({
        "cases": body.len(),
        "violations": violations,
        "unreached": unreached,
        "seed": a.seed,
        "budget": opts.budget,
        "reports": body,
    });
    emit(&a.output, &(serde_json::to_string_pretty(&doc).unwrap() + "\n"), out)?;
    if violations > 0 {
        let _ = writeln!(err, "error: {violations} bound violation(s)");
        return Ok(EXIT_FAILURE);
    }
    Ok(0)
}

fn report_json(r: &OracleReport) -> Value {
    let mut v = serde_json::to_value(r).expect("reports serialize");
    // keep numbers on the nine-decimal grid, and infinities as strings
    round_numbers(&mut v);
    let o = v.as_object_mut().unwrap();
    o.insert("best_value".into(), json_num(r.best_value));
    o.insert("analytic_value".into(), json_num(r.analytic_value));
    o.insert("gap".into(), json_num(r.gap));
    v
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => *v = json_num(n.as_f64().unwrap()),
        Value::Array(a) => a.iter_mut().for_each(round_numbers),
        Value::Object(o) => o.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let t = Template::parse(&a.distortion)?;
    let class: ShapeClass = a.class.parse()?;
    let grid = parse_grid(&a.alpha)?;
    let m = MomentSpec::new(a.mu, a.sigma)?;
    let rows = sweep(&t, class, &grid, &m, &Options::default());
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("alpha,sup,inf,method\n");
            for r in &rows {
                let f = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
                let method = match (&r.method, &r.error) {
                    (Some(m), _) => m.to_string(),
                    (None, Some(e)) => format!("\"error: {}\"", e.replace('"', "'")),
                    (None, None) => String::new(),
                };
                s += &format!("{},{},{},{}\n", fmt_num(r.alpha), f(r.sup), f(r.inf), method);
            }
            s
        }
        Format::Json => {
            let body: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "alpha": json_num(r.alpha),
                        "sup": r.sup.map(json_num),
                        "inf": r.inf.map(json_num),
                        "method": r.method.map(|m| m.to_string()),
                        "error": r.error,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&json!({"class": class.to_string(), "rows": body})).unwrap() + "\n"
        }
    };
    emit(&a.output, &text, out)?;
    Ok(0)
}
